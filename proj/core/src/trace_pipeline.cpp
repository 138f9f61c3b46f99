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

#include "throttlesim/trace_pipeline.hpp"
#include "throttlesim/error.hpp"
#include "throttlesim/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace throttlesim {

namespace fs = std::filesystem;

std::vector<double> TraceSet::t_deltas() const {
    std::vector<double> out;
    out.reserve(traces.size());
    for (const auto &t : traces)
        out.push_back(t.t_delta());
    return out;
}

Block PlaintextSchedule::plaintext_at(std::size_t i) const {
    switch (mode) {
    case Mode::all_zero:
        return Block::filled(0x00);
    case Mode::all_one:
        return Block::filled(0xff);
    case Mode::fixed:
        return fixed;
    case Mode::random:
        break;
    }
    Rng rng(mix_seed(seed, i));
    Block b;
    for (std::size_t k = 0; k < 16; k += 8) {
        std::uint64_t word = rng();
        for (std::size_t j = 0; j < 8; ++j, word >>= 8)
            b[k + j] = static_cast<std::uint8_t>(word & 0xff);
    }
    return b;
}

void PlaintextSchedule::validate() const {
    if (count < 1)
        throw ConfigError("schedule.count must be >= 1");
}

std::string_view schedule_mode_name(PlaintextSchedule::Mode mode) {
    switch (mode) {
    case PlaintextSchedule::Mode::all_zero:
        return "all_zero";
    case PlaintextSchedule::Mode::all_one:
        return "all_one";
    case PlaintextSchedule::Mode::fixed:
        return "fixed";
    case PlaintextSchedule::Mode::random:
        return "random";
    }
    return "random";
}

PlaintextSchedule::Mode parse_schedule_mode(std::string_view name) {
    if (name == "all_zero")
        return PlaintextSchedule::Mode::all_zero;
    if (name == "all_one")
        return PlaintextSchedule::Mode::all_one;
    if (name == "fixed")
        return PlaintextSchedule::Mode::fixed;
    if (name == "random")
        return PlaintextSchedule::Mode::random;
    throw ConfigError("unknown schedule mode '" + std::string(name) +
                      "' (expected all_zero, all_one, fixed or random)");
}

void Workload::validate() const {
    victim.validate();
    power.validate();
    controller.validate();
    if (stressor)
        stressor->validate();
    if (!(measurement.timer_jitter >= 0))
        throw ConfigError("measurement.timer_jitter_s must be >= 0");
}

std::uint64_t calibrate(const VictimSpec &victim, const ControllerConfig &config,
                        double target_t_delta) {
    if (!(target_t_delta > 0))
        throw std::invalid_argument("calibrate: target must be > 0");
    auto duration = [&](std::uint64_t n) {
        VictimSpec v = victim;
        v.repetitions_n = n;
        return unthrottled_duration(v, config);
    };
    // Tolerate rounding of the target itself (e.g. exactly one encryption).
    const double one = duration(1);
    if (target_t_delta < one * (1 - 1e-12))
        throw std::invalid_argument("calibrate: target shorter than one encryption (" +
                                    std::to_string(one) + " s)");

    // Largest n whose duration does not exceed the target.
    std::uint64_t lo = 1, hi = 2;
    while (duration(hi) <= target_t_delta)
        hi *= 2;
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (duration(mid) <= target_t_delta)
            lo = mid;
        else
            hi = mid;
    }
    const std::uint64_t n =
        std::abs(duration(hi) - target_t_delta) < std::abs(duration(lo) - target_t_delta) ? hi
                                                                                         : lo;
    if (std::abs(duration(n) - target_t_delta) > 0.05 * target_t_delta)
        throw std::invalid_argument("calibrate: cannot reach target within 5%");
    return n;
}

TimingTrace measure_one(const Workload &workload, const KeySchedule &schedule,
                        const Block &plaintext, std::uint64_t trace_id, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    const double activity = victim_activity(plaintext, schedule, workload.power);
    const SimResult run = simulate_activity(activity, workload.victim, workload.power,
                                            workload.controller, workload.stressor, rng);
    double t = run.t_delta;
    if (workload.measurement.timer_jitter > 0)
        t += std::normal_distribution<double>(0.0, workload.measurement.timer_jitter)(rng);

    TimingTrace trace;
    trace.trace_id = trace_id;
    trace.plaintext = plaintext;
    trace.ciphertext = aes::encrypt(plaintext, schedule).ciphertext();
    trace.t_delta_ns = std::max<std::int64_t>(1, std::llround(t * 1e9));
    trace.seed = seed;
    return trace;
}

TraceSet collect(const PlaintextSchedule &schedule, const Workload &workload,
                 const CollectOptions &options) {
    schedule.validate();
    workload.validate();
    const KeySchedule keys = aes::expand_key(workload.victim.key);

    TraceSet ts;
    ts.scenario_digest = options.scenario_digest;
    ts.traces.resize(schedule.count);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            ts.traces[i] = measure_one(workload, keys, schedule.plaintext_at(i), i,
                                       options.base_seed + i);
    };

    const std::size_t threads =
        std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(1, schedule.count / 64));
    if (threads == 1) {
        work(0, schedule.count);
        return ts;
    }
    // Each worker owns a contiguous slice; the first exception wins.
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (schedule.count + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            const std::size_t begin = std::min(schedule.count, w * chunk);
            const std::size_t end = std::min(schedule.count, begin + chunk);
            pool.emplace_back([&, w, begin, end] {
                try {
                    work(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
    return ts;
}

double median(std::vector<double> values) {
    if (values.empty())
        throw DegenerateInput("median of an empty set");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1)
        return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return (lower + upper) / 2;
}

TraceSet filter_outliers(const TraceSet &ts, double band) {
    if (ts.empty())
        throw DegenerateInput("filter_outliers: empty trace set");
    // Work in nanoseconds so boundary values compare exactly.
    std::vector<double> ns;
    ns.reserve(ts.size());
    for (const auto &t : ts.traces)
        ns.push_back(static_cast<double>(t.t_delta_ns));
    const double mu = median(ns);
    const double lo = (1 - band) * mu;
    const double hi = (1 + band) * mu;

    TraceSet out;
    out.scenario_digest = ts.scenario_digest;
    for (const auto &t : ts.traces) {
        const auto v = static_cast<double>(t.t_delta_ns);
        if (v >= lo && v <= hi)
            out.traces.push_back(t);
    }
    if (out.empty())
        throw DegenerateInput("filter_outliers: every trace fell outside the band");
    return out;
}

fs::path sidecar_path(const fs::path &csv_path) {
    fs::path p = csv_path;
    p.replace_extension(".json");
    if (p == csv_path)
        p += ".meta.json";
    return p;
}

void write_trace_csv(const TraceSet &ts, std::ostream &out) {
    out << "trace_id,plaintext_hex,ciphertext_hex,t_delta_ns,seed\n";
    for (const auto &t : ts.traces)
        out << t.trace_id << ',' << t.plaintext.to_hex() << ',' << t.ciphertext.to_hex() << ','
            << t.t_delta_ns << ',' << t.seed << '\n';
}

namespace {

template <class Int> Int parse_int(const std::string &field, std::size_t line, const char *what) {
    try {
        std::size_t used = 0;
        Int v;
        if constexpr (std::is_signed_v<Int>)
            v = static_cast<Int>(std::stoll(field, &used));
        else {
            if (!field.empty() && field[0] == '-')
                throw std::invalid_argument("negative");
            v = static_cast<Int>(std::stoull(field, &used));
        }
        if (used != field.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception &) {
        throw ConfigError("trace csv line " + std::to_string(line) + ": bad " + what + " '" +
                          field + "'");
    }
}

} // namespace

TraceSet read_trace_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) ||
        line != "trace_id,plaintext_hex,ciphertext_hex,t_delta_ns,seed")
        throw ConfigError("trace csv line 1: unexpected header");
    TraceSet ts;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');)
            fields.push_back(f);
        if (fields.size() != 5)
            throw ConfigError("trace csv line " + std::to_string(lineno) + ": expected 5 fields");
        TimingTrace t;
        t.trace_id = parse_int<std::uint64_t>(fields[0], lineno, "trace_id");
        try {
            t.plaintext = Block::from_hex(fields[1]);
            t.ciphertext = Block::from_hex(fields[2]);
        } catch (const std::invalid_argument &e) {
            throw ConfigError("trace csv line " + std::to_string(lineno) + ": " + e.what());
        }
        t.t_delta_ns = parse_int<std::int64_t>(fields[3], lineno, "t_delta_ns");
        if (t.t_delta_ns <= 0)
            throw ConfigError("trace csv line " + std::to_string(lineno) +
                              ": t_delta_ns must be > 0");
        t.seed = parse_int<std::uint64_t>(fields[4], lineno, "seed");
        ts.traces.push_back(t);
    }
    return ts;
}

void save_traces(const TraceSet &ts, const fs::path &csv_path, const std::string &scenario_json) {
    if (csv_path.has_parent_path())
        fs::create_directories(csv_path.parent_path());
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + csv_path.string());
        write_trace_csv(ts, out);
    }
    nlohmann::json meta;
    meta["format"] = "throttlesim-traces/1";
    meta["scenario_digest"] = ts.scenario_digest;
    meta["trace_count"] = ts.size();
    meta["scenario"] = scenario_json.empty() ? nlohmann::json() : nlohmann::json::parse(scenario_json);
    std::ofstream side(sidecar_path(csv_path), std::ios::binary);
    if (!side)
        throw std::runtime_error("cannot write " + sidecar_path(csv_path).string());
    side << meta.dump(2) << '\n';
}

LoadedTraces load_traces(const fs::path &csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open trace file " + csv_path.string());
    LoadedTraces loaded;
    loaded.traces = read_trace_csv(in);

    std::ifstream side(sidecar_path(csv_path), std::ios::binary);
    if (!side)
        throw ConfigError("missing sidecar " + sidecar_path(csv_path).string());
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(side);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError(sidecar_path(csv_path).string() + ": " + e.what());
    }
    loaded.traces.scenario_digest = meta.value("scenario_digest", std::string());
    if (meta.contains("trace_count") && meta["trace_count"].get<std::size_t>() != loaded.traces.size())
        throw ConfigError(csv_path.string() + ": row count does not match sidecar trace_count");
    if (meta.contains("scenario") && !meta["scenario"].is_null())
        loaded.scenario_json = meta["scenario"].dump();
    return loaded;
}

} // namespace throttlesim
