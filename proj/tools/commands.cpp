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

#include "commands.hpp"

#include "throttlesim/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

namespace throttlesim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_file(const fs::path &path, const std::string &content) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

struct Histogram {
    double lo = 0, width = 0;
    std::vector<std::size_t> counts;
};

Histogram histogram(const std::vector<double> &values, double lo, double hi, unsigned bins) {
    Histogram h;
    h.lo = lo;
    if (!(hi > lo)) {
        // Everything identical: one bin holding all samples.
        h.width = 0;
        h.counts.assign(1, values.size());
        return h;
    }
    h.width = (hi - lo) / bins;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / h.width);
        h.counts[std::min<std::size_t>(b, bins - 1)]++;
    }
    return h;
}

std::pair<double, double> range_of(const std::vector<double> &a, const std::vector<double> &b) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto *v : {&a, &b})
        for (double x : *v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    return {lo, hi};
}

std::string tvla_matrix_csv(const TvlaResult &r) {
    std::ostringstream os;
    os << "set";
    for (const auto &n : r.names)
        os << ',' << n;
    os << '\n';
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        os << r.names[i];
        for (std::size_t j = 0; j < r.names.size(); ++j)
            os << ',' << fmt(r.t_scores[i][j]);
        os << '\n';
    }
    return os.str();
}

std::string tvla_pairs_csv(const TvlaResult &r) {
    std::ostringstream os;
    os << "set_a,set_b,t_score,abs_t,leaks,degenerate\n";
    for (std::size_t i = 0; i < r.names.size(); ++i)
        for (std::size_t j = i + 1; j < r.names.size(); ++j)
            os << r.names[i] << ',' << r.names[j] << ',' << fmt(r.t_scores[i][j]) << ','
               << fmt(std::abs(r.t_scores[i][j])) << ',' << (r.leaks(i, j) ? 1 : 0) << ','
               << (r.degenerate[i][j] ? 1 : 0) << '\n';
    return os.str();
}

json tvla_json(const TvlaResult &r) {
    json pairs = json::array();
    bool any_leak = false;
    for (std::size_t i = 0; i < r.names.size(); ++i)
        for (std::size_t j = i + 1; j < r.names.size(); ++j) {
            any_leak = any_leak || r.leaks(i, j);
            pairs.push_back({{"a", r.names[i]},
                             {"b", r.names[j]},
                             {"t", r.t_scores[i][j]},
                             {"leaks", r.leaks(i, j)},
                             {"degenerate", static_cast<bool>(r.degenerate[i][j])}});
        }
    return {{"threshold", r.threshold}, {"sets", r.names}, {"pairs", pairs}, {"any_leak", any_leak}};
}

std::string ge_curve_csv(const std::vector<std::pair<std::size_t, double>> &curve) {
    std::ostringstream os;
    os << "count,ge\n";
    for (const auto &[n, ge] : curve)
        os << n << ',' << fmt(ge) << '\n';
    return os.str();
}

json ge_curve_json(const std::vector<std::pair<std::size_t, double>> &curve) {
    json a = json::array();
    for (const auto &[n, ge] : curve)
        a.push_back({{"count", n}, {"ge", ge}});
    return a;
}

json optional_count(const std::optional<std::size_t> &v) { return v ? json(*v) : json(); }

void write_tvla_outputs(const TvlaResult &r, const fs::path &dir, const std::string &digest) {
    write_file(dir / "tvla.csv", tvla_matrix_csv(r));
    write_file(dir / "tvla_pairs.csv", tvla_pairs_csv(r));
    json j = tvla_json(r);
    j["scenario_digest"] = digest;
    write_file(dir / "tvla.json", j.dump(2) + "\n");
}

std::vector<std::size_t> parse_checkpoints(const std::string &text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw ConfigError("--checkpoints: '" + item + "' is not a non-negative integer");
        out.push_back(v);
    }
    return out;
}

// Checkpoints past the number of traces that survived outlier filtering
// collapse onto that number.
std::vector<std::size_t> clamp_checkpoints(std::vector<std::size_t> cps, std::size_t n) {
    if (cps.empty())
        return default_checkpoints(n);
    if (!std::is_sorted(cps.begin(), cps.end()))
        throw ConfigError("checkpoints must be ascending");
    if (cps.back() > n) {
        std::cerr << "warning: only " << n << " traces left after outlier filtering; "
                  << "later checkpoints are clamped\n";
        cps.erase(std::upper_bound(cps.begin(), cps.end(), n), cps.end());
        if (cps.empty() || cps.back() != n)
            cps.push_back(n);
    }
    return cps;
}

} // namespace

Scenario with_seed(Scenario scenario, std::optional<std::uint64_t> seed) {
    if (seed)
        scenario.base_seed = *seed;
    return scenario;
}

const DemoCell &DemoReport::cell(const std::string &regime, const std::string &data) const {
    for (const auto &c : cells)
        if (c.regime == regime && c.data == data)
            return c;
    throw std::out_of_range("no demo cell " + regime + "/" + data);
}

DemoReport cmd_demo_poc(const Scenario &scenario, const RunContext &ctx, unsigned runs,
                        unsigned bins) {
    scenario.validate();
    if (runs < 1 || bins < 1)
        throw ConfigError("demo-poc: runs and bins must be >= 1");
    const auto &w = scenario.workload;
    if (w.controller.limits.empty())
        throw ConfigError("demo-poc: the scenario needs at least one reactive limit");

    // The plaintext equal to the key zeroes the initial AddRoundKey output;
    // its complement sets every bit.
    const KeySchedule keys = aes::expand_key(w.victim.key);
    std::array<Block, 2> data = {w.victim.key, ~w.victim.key};
    std::array<double, 2> activity = {victim_activity(data[0], keys, w.power),
                                      victim_activity(data[1], keys, w.power)};
    if (activity[0] > activity[1]) {
        std::swap(data[0], data[1]);
        std::swap(activity[0], activity[1]);
    }

    ControllerConfig unthrottled = w.controller;
    unthrottled.limits.clear();

    DemoReport report;
    report.scenario_digest = scenario_digest(scenario);
    report.limit = w.controller.limits.front().limit_value;

    const std::array<std::pair<std::string, const ControllerConfig *>, 2> regimes = {
        std::pair{std::string("unthrottled"), &unthrottled},
        std::pair{std::string("throttled"), &w.controller}};
    for (const auto &[regime, config] : regimes) {
        for (std::size_t d = 0; d < 2; ++d) {
            DemoCell cell;
            cell.regime = regime;
            cell.data = d == 0 ? "low" : "high";
            cell.plaintext = data[d];
            cell.activity = activity[d];
            SimOptions opts;
            opts.record_power = true;
            double power_sum = 0;
            for (unsigned r = 0; r < runs; ++r) {
                Rng rng = make_rng(scenario.base_seed + r);
                const SimResult res = simulate_activity(activity[d], w.victim, w.power, *config,
                                                        w.stressor, rng, opts);
                cell.t_deltas.push_back(res.t_delta);
                cell.power_samples.insert(cell.power_samples.end(), res.power_samples.begin(),
                                          res.power_samples.end());
                power_sum += res.avg_power;
                cell.throttled = cell.throttled || res.throttled;
            }
            cell.mean_power = power_sum / runs;
            report.cells.push_back(std::move(cell));
        }
    }

    std::ostringstream summary, power_hist, time_hist;
    summary << "regime,data,plaintext_hex,activity,mean_power_w,t_delta_mean_s,t_delta_min_s,"
               "t_delta_max_s,throttled\n";
    power_hist << "regime,data,bin_low_w,bin_high_w,count\n";
    time_hist << "regime,data,bin_low_s,bin_high_s,count\n";
    json cells = json::array();
    for (const auto &c : report.cells) {
        const double mean =
            std::accumulate(c.t_deltas.begin(), c.t_deltas.end(), 0.0) / c.t_deltas.size();
        const auto [tmin, tmax] = std::minmax_element(c.t_deltas.begin(), c.t_deltas.end());
        summary << c.regime << ',' << c.data << ',' << c.plaintext.to_hex() << ','
                << fmt(c.activity) << ',' << fmt(c.mean_power) << ',' << fmt(mean) << ','
                << fmt(*tmin) << ',' << fmt(*tmax) << ',' << (c.throttled ? 1 : 0) << '\n';
        cells.push_back({{"regime", c.regime},
                         {"data", c.data},
                         {"plaintext", c.plaintext.to_hex()},
                         {"activity", c.activity},
                         {"mean_power_w", c.mean_power},
                         {"t_delta_mean_s", mean},
                         {"t_delta_min_s", *tmin},
                         {"t_delta_max_s", *tmax},
                         {"throttled", c.throttled}});
    }
    for (const std::string regime : {"unthrottled", "throttled"}) {
        const DemoCell &low = report.cell(regime, "low");
        const DemoCell &high = report.cell(regime, "high");
        const auto [plo, phi] = range_of(low.power_samples, high.power_samples);
        const auto [tlo, thi] = range_of(low.t_deltas, high.t_deltas);
        for (const DemoCell *c : {&low, &high}) {
            const Histogram hp = histogram(c->power_samples, plo, phi, bins);
            for (std::size_t b = 0; b < hp.counts.size(); ++b)
                power_hist << regime << ',' << c->data << ',' << fmt(hp.lo + b * hp.width) << ','
                           << fmt(hp.width > 0 ? hp.lo + (b + 1) * hp.width : phi) << ','
                           << hp.counts[b] << '\n';
            const Histogram ht = histogram(c->t_deltas, tlo, thi, bins);
            for (std::size_t b = 0; b < ht.counts.size(); ++b)
                time_hist << regime << ',' << c->data << ',' << fmt(ht.lo + b * ht.width) << ','
                          << fmt(ht.width > 0 ? ht.lo + (b + 1) * ht.width : thi) << ','
                          << ht.counts[b] << '\n';
        }
    }
    write_file(ctx.out_dir / "demo_summary.csv", summary.str());
    write_file(ctx.out_dir / "demo_power_hist.csv", power_hist.str());
    write_file(ctx.out_dir / "demo_time_hist.csv", time_hist.str());
    const json j = {{"scenario_digest", report.scenario_digest},
                    {"limit", report.limit},
                    {"runs", runs},
                    {"cells", cells}};
    write_file(ctx.out_dir / "demo.json", j.dump(2) + "\n");
    return report;
}

TraceSet cmd_collect(const Scenario &scenario, const RunContext &ctx) {
    scenario.validate();
    CollectOptions opts;
    opts.base_seed = scenario.base_seed;
    opts.threads = ctx.threads;
    opts.scenario_digest = scenario_digest(scenario);
    TraceSet ts = collect(scenario.schedule, scenario.workload, opts);
    save_traces(ts, ctx.out_dir / "traces.csv", canonical_json(scenario));
    return ts;
}

std::vector<NamedTraceSet> collect_tvla_sets(const Scenario &scenario, const TvlaOptions &opts,
                                             unsigned threads) {
    scenario.validate();
    if (opts.modes.empty() || opts.repeats < 1)
        throw ConfigError("tvla: need at least one plaintext set and one repeat");
    if (opts.modes.size() * opts.repeats < 2)
        throw ConfigError("tvla: need at least two sets to compare");
    const std::string digest = scenario_digest(scenario);
    std::vector<NamedTraceSet> sets;
    std::uint64_t index = 0;
    for (unsigned rep = 1; rep <= opts.repeats; ++rep)
        for (auto mode : opts.modes) {
            ++index;
            PlaintextSchedule sched = scenario.schedule;
            sched.mode = mode;
            sched.count = opts.count.value_or(scenario.schedule.count);
            sched.seed = mix_seed(scenario.schedule.seed, index);
            CollectOptions co;
            co.base_seed = mix_seed(scenario.base_seed, index);
            co.threads = threads;
            co.scenario_digest = digest;
            sets.push_back({std::string(schedule_mode_name(mode)) + "_" + std::to_string(rep),
                            filter_outliers(collect(sched, scenario.workload, co),
                                            opts.outlier_band)});
        }
    return sets;
}

TvlaResult cmd_tvla(const Scenario &scenario, const RunContext &ctx, const TvlaOptions &opts) {
    const TvlaResult r = tvla(collect_tvla_sets(scenario, opts, ctx.threads));
    write_tvla_outputs(r, ctx.out_dir, scenario_digest(scenario));
    return r;
}

TvlaResult cmd_tvla_files(const std::vector<fs::path> &trace_files, const RunContext &ctx,
                          double outlier_band) {
    if (trace_files.size() < 2)
        throw ConfigError("tvla: need at least two trace files");
    std::vector<NamedTraceSet> sets;
    std::string digest;
    for (const auto &f : trace_files) {
        LoadedTraces loaded = load_traces(f);
        if (!digest.empty() && loaded.traces.scenario_digest != digest)
            std::cerr << "warning: " << f.string() << " comes from a different scenario\n";
        if (!sets.empty() && loaded.traces.size() != sets.front().traces.size())
            std::cerr << "warning: set sizes differ (" << f.string() << ")\n";
        digest = loaded.traces.scenario_digest;
        sets.push_back({f.stem().string(), filter_outliers(loaded.traces, outlier_band)});
    }
    const TvlaResult r = tvla(sets);
    write_tvla_outputs(r, ctx.out_dir, digest);
    return r;
}

std::vector<std::size_t> default_checkpoints(std::size_t n, std::size_t steps) {
    std::vector<std::size_t> cps;
    for (std::size_t i = 0; i <= steps; ++i)
        cps.push_back(n * i / steps);
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    return cps;
}

CpaReport cmd_cpa(const fs::path &trace_file, const RunContext &ctx, const CpaOptions &opts) {
    LoadedTraces loaded = load_traces(trace_file);
    std::optional<Block> key = opts.key;
    if (!key && !loaded.scenario_json.empty())
        key = parse_scenario(loaded.scenario_json).workload.victim.key;

    const TraceSet ts = filter_outliers(loaded.traces, opts.outlier_band);
    CpaReport report;
    report.traces_used = ts.size();
    report.scenario_digest = ts.scenario_digest;
    report.result = cpa(ts, opts.model, key, ctx.threads);
    if (key) {
        const auto cps = clamp_checkpoints(opts.checkpoints, ts.size());
        report.ge_curve = ge_curve(ts, opts.model, *key, cps, ctx.threads);
    }

    const CpaResult &r = report.result;
    std::ostringstream summary;
    summary << "byte,best_guess,best_correlation,true_byte,rank,true_correlation\n";
    json bytes = json::array();
    for (unsigned b = 0; b < 16; ++b) {
        const std::uint8_t best = r.best_guess[b];
        summary << b << ',' << unsigned(best) << ',' << fmt(r.correlations[b][best]);
        json jb = {{"byte", b}, {"best_guess", best}, {"best_correlation", r.correlations[b][best]}};
        if (r.ranks) {
            const std::uint8_t t = (*r.true_round_key)[b];
            summary << ',' << unsigned(t) << ',' << (*r.ranks)[b] << ','
                    << fmt(r.correlations[b][t]);
            jb["true_byte"] = t;
            jb["rank"] = (*r.ranks)[b];
            jb["true_correlation"] = r.correlations[b][t];
        } else {
            summary << ",,,";
        }
        summary << '\n';
        if (opts.full_table)
            jb["correlations"] = r.correlations[b];
        bytes.push_back(jb);
    }
    Block best_key;
    for (unsigned b = 0; b < 16; ++b)
        best_key[b] = r.best_guess[b];
    json j = {{"scenario_digest", report.scenario_digest},
              {"model", std::string(model_name(opts.model))},
              {"traces_total", loaded.traces.size()},
              {"traces_used", report.traces_used},
              {"best_round_key", best_key.to_hex()},
              {"degenerate_cells", r.degenerate_cells},
              {"bytes", bytes}};
    if (r.ge) {
        j["ge"] = *r.ge;
        j["true_round_key"] = r.true_round_key->to_hex();
        j["ge_curve"] = ge_curve_json(report.ge_curve);
        j["traces_to_disclosure"] = optional_count(traces_to_disclosure(report.ge_curve));
    }
    write_file(ctx.out_dir / "cpa.json", j.dump(2) + "\n");
    write_file(ctx.out_dir / "cpa_summary.csv", summary.str());
    if (key)
        write_file(ctx.out_dir / "ge_curve.csv", ge_curve_csv(report.ge_curve));
    return report;
}

MitigationConfig default_mitigation(const std::string &mode, const Scenario &scenario) {
    const MitigationConfig &own = scenario.workload.controller.mitigation;
    if (mitigation_name(own) == mode)
        return own;
    if (mode == "off")
        return mitigation::Off{};
    if (mode == "lowest_frequency")
        return mitigation::LowestFrequency{};
    if (mode == "limit_fuzzing") {
        const auto &limits = scenario.workload.controller.limits;
        if (limits.empty())
            throw ConfigError("limit_fuzzing needs at least one reactive limit");
        const double pl = limits.front().limit_value;
        return mitigation::LimitFuzzing{0.8 * pl, 1.2 * pl, 0.010};
    }
    if (mode == "modelled_power")
        return mitigation::ModelledPower{expected_activity(scenario.workload.power)};
    if (mode == "power_input_noise")
        return mitigation::PowerInputNoise{1.0};
    throw ConfigError("unknown mitigation mode '" + mode +
                      "' (expected off, lowest_frequency, limit_fuzzing, modelled_power or "
                      "power_input_noise)");
}

MitigateReport cmd_mitigate(const Scenario &scenario, const MitigationConfig &mitigation,
                            const RunContext &ctx, const MitigateOptions &opts) {
    scenario.validate();
    validate(mitigation);
    MitigateReport report;
    report.scenario_digest = scenario_digest(scenario);

    auto run_arm = [&](const MitigationConfig &m) {
        Scenario s = scenario;
        s.workload.controller.mitigation = m;
        MitigateArm arm;
        arm.mitigation = std::string(mitigation_name(m));
        CollectOptions co;
        co.base_seed = s.base_seed;
        co.threads = ctx.threads;
        co.scenario_digest = report.scenario_digest;
        const TraceSet ts =
            filter_outliers(collect(s.schedule, s.workload, co), opts.outlier_band);
        const auto cps = clamp_checkpoints(opts.checkpoints, ts.size());
        arm.ge_curve = ge_curve(ts, opts.model, s.workload.victim.key, cps, ctx.threads);
        arm.traces_to_disclosure = traces_to_disclosure(arm.ge_curve);
        if (opts.tvla_count > 0) {
            TvlaOptions to;
            to.count = opts.tvla_count;
            to.outlier_band = opts.outlier_band;
            // Without noise an unmitigated arm can yield distinct constant
            // sets; report that instead of failing the whole comparison.
            try {
                arm.tvla = tvla(collect_tvla_sets(s, to, ctx.threads));
            } catch (const DegenerateInput &e) {
                arm.tvla_error = e.what();
            }
        }
        return arm;
    };
    report.baseline = run_arm(mitigation::Off{});
    report.mitigated = run_arm(mitigation);

    json j = {{"scenario_digest", report.scenario_digest},
              {"model", std::string(model_name(opts.model))}};
    for (const auto &[label, arm] :
         {std::pair{"baseline", &report.baseline}, std::pair{"mitigated", &report.mitigated}}) {
        json a = {{"mitigation", arm->mitigation},
                  {"ge_curve", ge_curve_json(arm->ge_curve)},
                  {"final_ge", arm->ge_curve.empty() ? json() : json(arm->ge_curve.back().second)},
                  {"traces_to_disclosure", optional_count(arm->traces_to_disclosure)}};
        if (arm->tvla)
            a["tvla"] = tvla_json(*arm->tvla);
        else if (!arm->tvla_error.empty())
            a["tvla"] = {{"degenerate", arm->tvla_error}};
        j[label] = a;
    }
    write_file(ctx.out_dir / "mitigate.json", j.dump(2) + "\n");
    write_file(ctx.out_dir / "ge_curve_off.csv", ge_curve_csv(report.baseline.ge_curve));
    write_file(ctx.out_dir / "ge_curve_on.csv", ge_curve_csv(report.mitigated.ge_curve));
    if (report.baseline.tvla)
        write_file(ctx.out_dir / "tvla_off.csv", tvla_matrix_csv(*report.baseline.tvla));
    if (report.mitigated.tvla)
        write_file(ctx.out_dir / "tvla_on.csv", tvla_matrix_csv(*report.mitigated.tvla));
    return report;
}

TraceSummary cmd_report(const fs::path &trace_file, const RunContext &ctx, double outlier_band) {
    const LoadedTraces loaded = load_traces(trace_file);
    if (loaded.traces.empty())
        throw DegenerateInput("report: trace file is empty");
    const std::vector<double> t = loaded.traces.t_deltas();
    TraceSummary s;
    s.count = t.size();
    s.scenario_digest = loaded.traces.scenario_digest;
    s.mean = std::accumulate(t.begin(), t.end(), 0.0) / t.size();
    double ss = 0;
    for (double v : t)
        ss += (v - s.mean) * (v - s.mean);
    s.stddev = t.size() > 1 ? std::sqrt(ss / (t.size() - 1)) : 0.0;
    s.median = median(t);
    s.min = *std::min_element(t.begin(), t.end());
    s.max = *std::max_element(t.begin(), t.end());
    s.retained = filter_outliers(loaded.traces, outlier_band).size();

    const json j = {{"scenario_digest", s.scenario_digest},
                    {"count", s.count},
                    {"retained_after_filter", s.retained},
                    {"outlier_band", outlier_band},
                    {"t_delta_mean_s", s.mean},
                    {"t_delta_median_s", s.median},
                    {"t_delta_stddev_s", s.stddev},
                    {"t_delta_min_s", s.min},
                    {"t_delta_max_s", s.max}};
    write_file(ctx.out_dir / "report.json", j.dump(2) + "\n");
    return s;
}

// ---------------------------------------------------------------------------

int run_cli(int argc, const char *const *argv) {
    CLI::App app{"throttlesim: reactive-limit frequency throttling side-channel simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = ".", model = "round0-hw", checkpoints, key_hex, mode;
    std::optional<std::uint64_t> seed;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    unsigned runs = 20, bins = 40, repeats = 2;
    std::optional<std::size_t> count;
    std::size_t tvla_count = 10000;
    std::vector<std::string> trace_files;
    std::string schedule_override, sets_list;
    bool full_table = false;
    double band = 0.05;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
        sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--outlier-band", band, "Outlier band around the median (fraction)")
            ->capture_default_str();
    };
    auto with_scenario = [&](CLI::App *sub, bool required) {
        auto *opt = sub->add_option("--scenario", scenario_path, "Scenario JSON file");
        if (required)
            opt->required();
        sub->add_option("--seed", seed, "Override the scenario base seed");
    };

    auto *demo = app.add_subcommand("demo-poc", "Power vs. time for two data values, with and "
                                                "without throttling");
    with_scenario(demo, true);
    common(demo);
    demo->add_option("--runs", runs, "Runs per data value and regime")->capture_default_str();
    demo->add_option("--bins", bins, "Histogram bins")->capture_default_str();

    auto *coll = app.add_subcommand("collect", "Collect a timing trace set");
    with_scenario(coll, true);
    common(coll);
    coll->add_option("--count", count, "Override the schedule count");
    coll->add_option("--schedule", schedule_override,
                     "Override the schedule mode (all_zero, all_one, random)");

    auto *tv = app.add_subcommand("tvla", "Pairwise Welch t-test between plaintext sets");
    with_scenario(tv, false);
    common(tv);
    tv->add_option("--traces", trace_files, "Trace CSV files to compare instead of a scenario");
    tv->add_option("--count", count, "Traces per set");
    tv->add_option("--repeats", repeats, "Collections per plaintext set")->capture_default_str();
    tv->add_option("--sets", sets_list, "Comma-separated schedule modes (default "
                                        "all_zero,all_one,random)");

    auto *cp = app.add_subcommand("cpa", "Correlation analysis and guessing entropy");
    common(cp);
    cp->add_option("--traces", trace_files, "Trace CSV file")->required()->expected(1);
    cp->add_option("--model", model, "round0-hw | round10-hw | round10-hd | round10-hw-hd")
        ->capture_default_str();
    cp->add_option("--key", key_hex, "True cipher key (hex); defaults to the sidecar scenario");
    cp->add_option("--checkpoints", checkpoints, "Comma-separated trace counts for the GE curve");
    cp->add_flag("--full-table", full_table, "Include all 16x256 correlations in cpa.json");

    auto *mit = app.add_subcommand("mitigate", "Attack with a mitigation off and on");
    with_scenario(mit, true);
    common(mit);
    mit->add_option("--mode", mode,
                    "off | lowest_frequency | limit_fuzzing | modelled_power | power_input_noise")
        ->required();
    mit->add_option("--model", model, "Leakage model")->capture_default_str();
    mit->add_option("--checkpoints", checkpoints, "Comma-separated trace counts for GE curves");
    mit->add_option("--tvla-count", tvla_count, "Traces per TVLA set (0 disables TVLA)")
        ->capture_default_str();

    auto *rep = app.add_subcommand("report", "Summary statistics of a trace file");
    common(rep);
    rep->add_option("--traces", trace_files, "Trace CSV file")->required()->expected(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunContext ctx;
        ctx.out_dir = out_dir;
        ctx.threads = threads;
        auto scenario = [&] { return with_seed(load_scenario(scenario_path), seed); };

        if (demo->parsed()) {
            const DemoReport r = cmd_demo_poc(scenario(), ctx, runs, bins);
            for (const auto &c : r.cells)
                std::cout << c.regime << '/' << c.data << ": mean power " << c.mean_power
                          << " W, t_delta " << c.t_deltas.front() << " s\n";
        } else if (coll->parsed()) {
            Scenario s = scenario();
            if (count)
                s.schedule.count = *count;
            if (!schedule_override.empty())
                s.schedule.mode = parse_schedule_mode(schedule_override);
            const TraceSet ts = cmd_collect(s, ctx);
            std::cout << "wrote " << ts.size() << " traces to "
                      << (ctx.out_dir / "traces.csv").string() << '\n';
        } else if (tv->parsed()) {
            TvlaResult r;
            if (!trace_files.empty()) {
                std::vector<fs::path> files(trace_files.begin(), trace_files.end());
                r = cmd_tvla_files(files, ctx, band);
            } else {
                if (scenario_path.empty())
                    throw ConfigError("tvla: give --scenario or at least two --traces");
                TvlaOptions opts;
                opts.count = count;
                opts.repeats = repeats;
                opts.outlier_band = band;
                if (!sets_list.empty()) {
                    opts.modes.clear();
                    std::stringstream ss(sets_list);
                    for (std::string m; std::getline(ss, m, ',');)
                        opts.modes.push_back(parse_schedule_mode(m));
                }
                r = cmd_tvla(scenario(), ctx, opts);
            }
            std::cout << tvla_matrix_csv(r);
        } else if (cp->parsed()) {
            CpaOptions opts;
            opts.model = parse_leakage_model(model);
            if (!key_hex.empty())
                opts.key = Block::from_hex(key_hex);
            opts.checkpoints = parse_checkpoints(checkpoints);
            opts.full_table = full_table;
            opts.outlier_band = band;
            const CpaReport r = cmd_cpa(trace_files.front(), ctx, opts);
            std::cout << "traces used: " << r.traces_used;
            if (r.result.ge)
                std::cout << ", GE " << *r.result.ge;
            std::cout << '\n';
        } else if (mit->parsed()) {
            const Scenario s = scenario();
            MitigateOptions opts;
            opts.model = parse_leakage_model(model);
            opts.checkpoints = parse_checkpoints(checkpoints);
            opts.tvla_count = tvla_count;
            opts.outlier_band = band;
            const MitigateReport r = cmd_mitigate(s, default_mitigation(mode, s), ctx, opts);
            for (const auto *arm : {&r.baseline, &r.mitigated}) {
                std::cout << arm->mitigation << ": final GE " << arm->ge_curve.back().second
                          << ", traces to disclosure ";
                if (arm->traces_to_disclosure)
                    std::cout << *arm->traces_to_disclosure << '\n';
                else
                    std::cout << "not reached\n";
            }
        } else if (rep->parsed()) {
            const TraceSummary s = cmd_report(trace_files.front(), ctx, band);
            std::cout << s.count << " traces, median " << s.median << " s, " << s.retained
                      << " within the outlier band\n";
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SimulationAbort &e) {
        std::cerr << "simulation aborted: " << e.what() << '\n';
        return kExitSimulationAbort;
    } catch (const DegenerateInput &e) {
        std::cerr << "degenerate input: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

} // namespace throttlesim::cli
