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

#pragma once

#include "throttlesim/scanalysis.hpp"
#include "throttlesim/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace throttlesim::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitSimulationAbort = 3,
    kExitDegenerate = 4,
};

struct RunContext {
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
};

/// Applies a --seed override; the scenario digest then reflects the seed.
Scenario with_seed(Scenario scenario, std::optional<std::uint64_t> seed);

// ---------------------------------------------------------------------------
// demo-poc: the same fixed-data workload at two activity levels, with and
// without the reactive limit.

struct DemoCell {
    std::string regime; // "unthrottled" or "throttled"
    std::string data;   // "low" or "high"
    Block plaintext;
    double activity = 0.0;
    double mean_power = 0.0; // mean over runs of the time-weighted average
    std::vector<double> t_deltas;      // one per run, seconds
    std::vector<double> power_samples; // all polling samples of all runs
    bool throttled = false;
};

struct DemoReport {
    std::string scenario_digest;
    double limit = 0.0; // value of the first limit, 0 if none
    std::vector<DemoCell> cells;

    const DemoCell &cell(const std::string &regime, const std::string &data) const;
};

/// Writes demo_summary.csv, demo_power_hist.csv, demo_time_hist.csv and
/// demo.json under ctx.out_dir.
DemoReport cmd_demo_poc(const Scenario &scenario, const RunContext &ctx, unsigned runs = 20,
                        unsigned bins = 40);

// ---------------------------------------------------------------------------
// collect

/// Writes traces.csv and its sidecar traces.json under ctx.out_dir.
TraceSet cmd_collect(const Scenario &scenario, const RunContext &ctx);

// ---------------------------------------------------------------------------
// tvla

struct TvlaOptions {
    std::vector<PlaintextSchedule::Mode> modes = {PlaintextSchedule::Mode::all_zero,
                                                  PlaintextSchedule::Mode::all_one,
                                                  PlaintextSchedule::Mode::random};
    unsigned repeats = 2;
    std::optional<std::size_t> count; // defaults to scenario.schedule.count
    double outlier_band = 0.05;
};

/// Collects every (mode, repeat) set from the scenario and compares all
/// pairs. Set i of the run uses trace seeds derived from (base_seed, i).
std::vector<NamedTraceSet> collect_tvla_sets(const Scenario &scenario, const TvlaOptions &opts,
                                             unsigned threads);

/// Writes tvla.csv (t matrix), tvla_pairs.csv and tvla.json.
TvlaResult cmd_tvla(const Scenario &scenario, const RunContext &ctx,
                    const TvlaOptions &opts = {});
TvlaResult cmd_tvla_files(const std::vector<std::filesystem::path> &trace_files,
                          const RunContext &ctx, double outlier_band = 0.05);

// ---------------------------------------------------------------------------
// cpa

struct CpaOptions {
    LeakageModel model = LeakageModel::round0_hw;
    std::optional<Block> key; // falls back to the key in the trace sidecar
    std::vector<std::size_t> checkpoints; // empty: 11 evenly spaced points
    bool full_table = false;
    double outlier_band = 0.05;
};

struct CpaReport {
    CpaResult result;
    std::vector<std::pair<std::size_t, double>> ge_curve;
    std::size_t traces_used = 0;
    std::string scenario_digest;
};

/// Writes cpa.json, cpa_summary.csv and ge_curve.csv.
CpaReport cmd_cpa(const std::filesystem::path &trace_file, const RunContext &ctx,
                  const CpaOptions &opts);

/// Evenly spaced checkpoints 0, n/steps, ..., n.
std::vector<std::size_t> default_checkpoints(std::size_t n, std::size_t steps = 10);

// ---------------------------------------------------------------------------
// mitigate

struct MitigateOptions {
    LeakageModel model = LeakageModel::round0_hw;
    std::vector<std::size_t> checkpoints;
    std::size_t tvla_count = 10000; // per set, 0 disables TVLA
    double outlier_band = 0.05;
};

struct MitigateArm {
    std::string mitigation;
    std::vector<std::pair<std::size_t, double>> ge_curve;
    std::optional<std::size_t> traces_to_disclosure;
    std::optional<TvlaResult> tvla;
    std::string tvla_error; // set when the arm's sets admit no t-test
};

struct MitigateReport {
    std::string scenario_digest;
    MitigateArm baseline;
    MitigateArm mitigated;
};

/// Runs the same attack (same plaintexts, same seeds) with the mitigation
/// off and on. Writes mitigate.json, ge_curve_off.csv, ge_curve_on.csv and,
/// when TVLA is enabled, tvla_off.csv / tvla_on.csv.
MitigateReport cmd_mitigate(const Scenario &scenario, const MitigationConfig &mitigation,
                            const RunContext &ctx, const MitigateOptions &opts);

/// Default parameters of a mitigation mode for a scenario: fuzzing spans
/// +/-20% of the first limit every 10 ms, modelled power uses the mean
/// activity over random plaintexts, input noise is 1 W.
MitigationConfig default_mitigation(const std::string &mode, const Scenario &scenario);

// ---------------------------------------------------------------------------
// report

struct TraceSummary {
    std::size_t count = 0;
    std::size_t retained = 0; // after outlier filtering
    double mean = 0, median = 0, stddev = 0, min = 0, max = 0; // seconds
    std::string scenario_digest;
};

/// Writes report.json describing a trace file.
TraceSummary cmd_report(const std::filesystem::path &trace_file, const RunContext &ctx,
                        double outlier_band = 0.05);

// ---------------------------------------------------------------------------

/// Entry point used by main(): parses arguments and maps failures to exit
/// codes.
int run_cli(int argc, const char *const *argv);

} // namespace throttlesim::cli
