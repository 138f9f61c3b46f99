/*
 * SPDX-FileCopyrightText: Copyright 2026 The throttlesim Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "throttlesim/scenario.hpp"
#include "throttlesim/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace throttlesim {

using nlohmann::json;

namespace {

// Reads fields out of one JSON object, remembering which keys were used so
// that typos in the scenario file are reported instead of ignored.
class Fields {
  public:
    Fields(const json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object())
            fail(path_, "expected an object");
    }

    ~Fields() noexcept(false) {
        if (std::uncaught_exceptions() > 0)
            return;
        for (const auto &[key, _] : obj_.items())
            if (!used_.count(key))
                fail(at(key), "unknown field");
    }

    bool has(const std::string &key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

    const json &raw(const std::string &key) {
        used_.insert(key);
        if (!obj_.contains(key))
            fail(at(key), "missing required field");
        return obj_.at(key);
    }

    double number(const std::string &key) {
        const json &v = raw(key);
        if (!v.is_number())
            fail(at(key), "expected a number");
        return v.get<double>();
    }
    double number(const std::string &key, double fallback) {
        used_.insert(key);
        return has(key) ? number(key) : fallback;
    }

    std::uint64_t unsigned_int(const std::string &key) {
        const json &v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            fail(at(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::uint64_t unsigned_int(const std::string &key, std::uint64_t fallback) {
        used_.insert(key);
        return has(key) ? unsigned_int(key) : fallback;
    }

    std::string string(const std::string &key) {
        const json &v = raw(key);
        if (!v.is_string())
            fail(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string &key, const std::string &fallback) {
        used_.insert(key);
        return has(key) ? string(key) : fallback;
    }

    Block block(const std::string &key) {
        try {
            return Block::from_hex(string(key));
        } catch (const std::invalid_argument &e) {
            fail(at(key), e.what());
        }
    }

    /// Marks an optional key as known (e.g. an explicit null).
    void allow(const std::string &key) { used_.insert(key); }

    std::string at(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] static void fail(const std::string &where, const std::string &what) {
        throw ConfigError(where + ": " + what);
    }

  private:
    const json &obj_;
    std::string path_;
    std::set<std::string> used_;
};

PowerParams parse_power(const json &j) {
    Fields f(j, "power");
    PowerParams p;
    p.alpha_base = f.number("alpha_base", p.alpha_base);
    p.cap_c = f.number("cap_c", p.cap_c);
    p.leakage_per_bit = f.number("leakage_per_bit", p.leakage_per_bit);
    p.static_power = f.number("static_power_w", p.static_power);
    p.noise_sigma = f.number("noise_sigma_w", p.noise_sigma);
    if (f.has("voltage")) {
        Fields v(f.raw("voltage"), "power.voltage");
        p.voltage.v0 = v.number("v0", p.voltage.v0);
        p.voltage.slope = v.number("slope", p.voltage.slope);
    } else {
        f.allow("voltage");
    }
    if (f.has("leakage")) {
        Fields l(f.raw("leakage"), "power.leakage");
        p.leakage.round0_hw = l.number("round0_hw", p.leakage.round0_hw);
        p.leakage.round10_hw = l.number("round10_hw", p.leakage.round10_hw);
        p.leakage.round10_hd = l.number("round10_hd", p.leakage.round10_hd);
    } else {
        f.allow("leakage");
    }
    return p;
}

MitigationConfig parse_mitigation(const json &j) {
    Fields f(j, "controller.mitigation");
    const std::string mode = f.string("mode", "off");
    if (mode == "off")
        return mitigation::Off{};
    if (mode == "lowest_frequency")
        return mitigation::LowestFrequency{};
    if (mode == "limit_fuzzing") {
        mitigation::LimitFuzzing m;
        m.range_low = f.number("range_low");
        m.range_high = f.number("range_high");
        m.reconfig_period = f.number("reconfig_period_s", m.reconfig_period);
        return m;
    }
    if (mode == "modelled_power")
        return mitigation::ModelledPower{f.number("fixed_activity")};
    if (mode == "power_input_noise")
        return mitigation::PowerInputNoise{f.number("sigma_w")};
    Fields::fail(f.at("mode"), "unknown mitigation '" + mode +
                                   "' (expected off, lowest_frequency, limit_fuzzing, "
                                   "modelled_power or power_input_noise)");
}

json mitigation_to_json(const MitigationConfig &m) {
    json j;
    j["mode"] = std::string(mitigation_name(m));
    if (const auto *f = std::get_if<mitigation::LimitFuzzing>(&m)) {
        j["range_low"] = f->range_low;
        j["range_high"] = f->range_high;
        j["reconfig_period_s"] = f->reconfig_period;
    } else if (const auto *p = std::get_if<mitigation::ModelledPower>(&m)) {
        j["fixed_activity"] = p->fixed_activity;
    } else if (const auto *n = std::get_if<mitigation::PowerInputNoise>(&m)) {
        j["sigma_w"] = n->sigma;
    }
    return j;
}

ControllerConfig parse_controller(const json &j) {
    Fields f(j, "controller");
    ControllerConfig c;
    c.polling_interval = f.number("polling_interval_s", c.polling_interval);
    c.hysteresis_fraction = f.number("hysteresis_fraction", c.hysteresis_fraction);
    c.ceiling_factor = f.number("ceiling_factor", c.ceiling_factor);

    const json &ladder = f.raw("pstate_ladder_ghz");
    if (ladder.is_array()) {
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            if (!ladder[i].is_number())
                Fields::fail("controller.pstate_ladder_ghz[" + std::to_string(i) + "]",
                             "expected a number");
            c.pstate_ladder.push_back(ladder[i].get<double>());
        }
    } else {
        Fields l(ladder, "controller.pstate_ladder_ghz");
        const double max = l.number("max"), min = l.number("min"), step = l.number("step");
        try {
            c.pstate_ladder = make_ladder(max, min, step);
        } catch (const ConfigError &e) {
            Fields::fail("controller.pstate_ladder_ghz", e.what());
        }
    }

    if (f.has("limits")) {
        const json &limits = f.raw("limits");
        if (!limits.is_array())
            Fields::fail("controller.limits", "expected an array");
        for (std::size_t i = 0; i < limits.size(); ++i) {
            Fields l(limits[i], "controller.limits[" + std::to_string(i) + "]");
            ReactiveLimit lim;
            lim.label = l.string("label", "PL" + std::to_string(i + 1));
            const std::string kind = l.string("kind", "power");
            if (kind == "power")
                lim.kind = LimitKind::power_watts;
            else if (kind == "current")
                lim.kind = LimitKind::current_amps;
            else
                Fields::fail(l.at("kind"), "expected 'power' or 'current'");
            lim.limit_value = l.number("limit");
            lim.tau = l.number("tau_s");
            c.limits.push_back(lim);
        }
    } else {
        f.allow("limits");
    }
    if (f.has("mitigation"))
        c.mitigation = parse_mitigation(f.raw("mitigation"));
    else
        f.allow("mitigation");
    return c;
}

json to_json(const Scenario &s) {
    const auto &w = s.workload;
    json j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["name"] = s.name;
    j["base_seed"] = s.base_seed;
    j["victim"] = {
        {"key", w.victim.key.to_hex()},
        {"cycles_per_encryption", w.victim.cycles_per_encryption},
        {"repetitions_n", w.victim.repetitions_n},
        {"parallel_instances", w.victim.parallel_instances},
    };
    j["power"] = {
        {"alpha_base", w.power.alpha_base},
        {"cap_c", w.power.cap_c},
        {"leakage_per_bit", w.power.leakage_per_bit},
        {"static_power_w", w.power.static_power},
        {"noise_sigma_w", w.power.noise_sigma},
        {"voltage", {{"v0", w.power.voltage.v0}, {"slope", w.power.voltage.slope}}},
        {"leakage",
         {{"round0_hw", w.power.leakage.round0_hw},
          {"round10_hw", w.power.leakage.round10_hw},
          {"round10_hd", w.power.leakage.round10_hd}}},
    };
    json limits = json::array();
    for (const auto &l : w.controller.limits)
        limits.push_back({{"label", l.label},
                          {"kind", l.kind == LimitKind::power_watts ? "power" : "current"},
                          {"limit", l.limit_value},
                          {"tau_s", l.tau}});
    j["controller"] = {
        {"polling_interval_s", w.controller.polling_interval},
        {"pstate_ladder_ghz", w.controller.pstate_ladder},
        {"limits", limits},
        {"hysteresis_fraction", w.controller.hysteresis_fraction},
        {"ceiling_factor", w.controller.ceiling_factor},
        {"mitigation", mitigation_to_json(w.controller.mitigation)},
    };
    j["stressor"] = w.stressor ? json{{"mean_power_w", w.stressor->mean_power},
                                      {"power_sigma_w", w.stressor->power_sigma}}
                               : json();
    j["measurement"] = {{"timer_jitter_s", w.measurement.timer_jitter}};
    json sched = {{"mode", std::string(schedule_mode_name(s.schedule.mode))},
                  {"count", s.schedule.count}};
    if (s.schedule.mode == PlaintextSchedule::Mode::fixed)
        sched["plaintext"] = s.schedule.fixed.to_hex();
    if (s.schedule.mode == PlaintextSchedule::Mode::random)
        sched["seed"] = s.schedule.seed;
    j["schedule"] = sched;
    return j;
}

std::string position_of(const std::string &text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

void Scenario::validate() const {
    workload.validate();
    schedule.validate();
}

Scenario parse_scenario(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError("scenario syntax error at " + position_of(text, e.byte) + ": " +
                          e.what());
    }

    Scenario s;
    {
        Fields top(doc, "");
        const auto version = top.unsigned_int("schema_version");
        if (version != kScenarioSchemaVersion)
            Fields::fail("schema_version", "unsupported version " + std::to_string(version) +
                                               " (expected " +
                                               std::to_string(kScenarioSchemaVersion) + ")");
        s.name = top.string("name", "");
        s.base_seed = top.unsigned_int("base_seed", s.base_seed);

        auto &w = s.workload;
        w.power = parse_power(top.raw("power"));
        w.controller = parse_controller(top.raw("controller"));
        w.controller.validate();

        {
            Fields v(top.raw("victim"), "victim");
            w.victim.key = v.block("key");
            w.victim.cycles_per_encryption =
                v.unsigned_int("cycles_per_encryption", w.victim.cycles_per_encryption);
            w.victim.parallel_instances = static_cast<unsigned>(
                v.unsigned_int("parallel_instances", w.victim.parallel_instances));
            const bool has_n = v.has("repetitions_n");
            const bool has_target = v.has("calibrate_t_delta_s");
            if (has_n == has_target)
                Fields::fail("victim", "give exactly one of repetitions_n or calibrate_t_delta_s");
            if (has_n) {
                w.victim.repetitions_n = v.unsigned_int("repetitions_n");
                v.allow("calibrate_t_delta_s");
            } else {
                v.unsigned_int("repetitions_n", 0);
                const double target = v.number("calibrate_t_delta_s");
                if (w.victim.cycles_per_encryption == 0)
                    Fields::fail("victim.cycles_per_encryption", "must be > 0");
                try {
                    w.victim.repetitions_n = calibrate(w.victim, w.controller, target);
                } catch (const std::invalid_argument &e) {
                    Fields::fail("victim.calibrate_t_delta_s", e.what());
                }
            }
        }

        if (top.has("stressor")) {
            Fields st(top.raw("stressor"), "stressor");
            StressorSpec spec;
            spec.mean_power = st.number("mean_power_w");
            spec.power_sigma = st.number("power_sigma_w", 0.0);
            w.stressor = spec;
        } else {
            top.allow("stressor");
        }

        if (top.has("measurement")) {
            Fields m(top.raw("measurement"), "measurement");
            w.measurement.timer_jitter = m.number("timer_jitter_s", 0.0);
        } else {
            top.allow("measurement");
        }

        Fields sc(top.raw("schedule"), "schedule");
        s.schedule.mode = parse_schedule_mode(sc.string("mode"));
        s.schedule.count = sc.unsigned_int("count");
        s.schedule.seed = sc.unsigned_int("seed", 0);
        if (s.schedule.mode == PlaintextSchedule::Mode::fixed)
            s.schedule.fixed = sc.block("plaintext");
        else
            sc.allow("plaintext");
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str());
    } catch (const ConfigError &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string canonical_json(const Scenario &scenario) { return to_json(scenario).dump(); }

std::string pretty_json(const Scenario &scenario) { return to_json(scenario).dump(2); }

std::string scenario_digest(const Scenario &scenario) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_json(scenario)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

} // namespace throttlesim
