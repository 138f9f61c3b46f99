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

#include "throttlesim/aes.hpp"
#include "throttlesim/pm_sim.hpp"
#include "throttlesim/power_model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace throttlesim {

/// One observed victim execution.
struct TimingTrace {
    std::uint64_t trace_id = 0;
    Block plaintext;
    Block ciphertext;
    std::int64_t t_delta_ns = 0; // wall-clock, integer nanoseconds
    std::uint64_t seed = 0;

    double t_delta() const { return static_cast<double>(t_delta_ns) * 1e-9; }

    friend bool operator==(const TimingTrace &, const TimingTrace &) = default;
};

struct TraceSet {
    std::vector<TimingTrace> traces;
    std::string scenario_digest;

    std::size_t size() const { return traces.size(); }
    bool empty() const { return traces.empty(); }
    /// t_delta of every trace, in seconds.
    std::vector<double> t_deltas() const;

    friend bool operator==(const TraceSet &, const TraceSet &) = default;
};

struct PlaintextSchedule {
    enum class Mode { all_zero, all_one, fixed, random };

    Mode mode = Mode::random;
    Block fixed;            // used by Mode::fixed
    std::uint64_t seed = 0; // used by Mode::random
    std::size_t count = 1;

    /// The i-th plaintext. Random plaintexts are derived from (seed, i)
    /// so any index can be produced independently.
    Block plaintext_at(std::size_t i) const;
    void validate() const;
};

std::string_view schedule_mode_name(PlaintextSchedule::Mode mode);
PlaintextSchedule::Mode parse_schedule_mode(std::string_view name);

/// Attacker-side timer imperfection, added to every measured duration.
struct MeasurementSpec {
    double timer_jitter = 0.0; // seconds, std-dev of Gaussian jitter
};

/// Everything that determines how a single plaintext turns into a
/// measured duration.
struct Workload {
    VictimSpec victim;
    PowerParams power;
    ControllerConfig controller;
    std::optional<StressorSpec> stressor;
    MeasurementSpec measurement;

    void validate() const;
};

struct CollectOptions {
    std::uint64_t base_seed = 0;
    unsigned threads = 1;
    std::string scenario_digest;
};

/// Picks repetitions_n so the unthrottled duration is within 5% of
/// `target_t_delta`. Throws std::invalid_argument when the target is
/// shorter than a single encryption.
std::uint64_t calibrate(const VictimSpec &victim, const ControllerConfig &config,
                        double target_t_delta);

/// Simulates and measures one plaintext with trace seed `seed`.
TimingTrace measure_one(const Workload &workload, const KeySchedule &schedule,
                        const Block &plaintext, std::uint64_t trace_id, std::uint64_t seed);

/// One trace per scheduled plaintext; trace i uses seed base_seed + i, so
/// the result does not depend on the thread count.
TraceSet collect(const PlaintextSchedule &schedule, const Workload &workload,
                 const CollectOptions &options);

/// Keeps traces whose t_delta lies within [(1-band)*median, (1+band)*median],
/// preserving order. Throws DegenerateInput on empty input or when nothing
/// survives.
TraceSet filter_outliers(const TraceSet &ts, double band = 0.05);

double median(std::vector<double> values);

// Persistence: CSV with header
//   trace_id,plaintext_hex,ciphertext_hex,t_delta_ns,seed
// plus a JSON sidecar next to it holding the scenario and its digest.

std::filesystem::path sidecar_path(const std::filesystem::path &csv_path);

void write_trace_csv(const TraceSet &ts, std::ostream &out);
TraceSet read_trace_csv(std::istream &in);

/// Writes `csv_path` and its sidecar. `scenario_json` is embedded verbatim
/// (it must be a JSON document, or empty).
void save_traces(const TraceSet &ts, const std::filesystem::path &csv_path,
                 const std::string &scenario_json = {});

struct LoadedTraces {
    TraceSet traces;
    std::string scenario_json; // empty when the sidecar has none
};

LoadedTraces load_traces(const std::filesystem::path &csv_path);

} // namespace throttlesim
