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

#include "throttlesim/power_model.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace throttlesim {

enum class LimitKind { power_watts, current_amps };

/// A reactive limit: the running average of power (or current) over `tau`
/// seconds must stay at or below `limit_value`.
struct ReactiveLimit {
    LimitKind kind = LimitKind::power_watts;
    double limit_value = 0.0; // watts or amps
    double tau = 0.002;       // seconds
    std::string label;
};

// Mitigation modes. Each one changes a single aspect of the control loop.
namespace mitigation {

struct Off {};

/// Once any budget goes negative the frequency limit is pinned to the
/// lowest P-state for the rest of the run.
struct LowestFrequency {};

/// Every `reconfig_period` seconds each limit value is redrawn uniformly
/// from [range_low, range_high].
struct LimitFuzzing {
    double range_low = 0.0;
    double range_high = 0.0;
    double reconfig_period = 0.005;
};

/// The controller sees the power of a fixed activity instead of the real
/// one. Energy accounting still uses the real activity.
struct ModelledPower {
    double fixed_activity = 1.0;
};

/// Gaussian noise added to the controller's power input only.
struct PowerInputNoise {
    double sigma = 0.0;
};

} // namespace mitigation

using MitigationConfig =
    std::variant<mitigation::Off, mitigation::LowestFrequency, mitigation::LimitFuzzing,
                 mitigation::ModelledPower, mitigation::PowerInputNoise>;

std::string_view mitigation_name(const MitigationConfig &m);
void validate(const MitigationConfig &m);

struct ControllerConfig {
    double polling_interval = 0.001;  // seconds
    std::vector<double> pstate_ladder; // GHz, strictly descending, P0 first
    std::vector<ReactiveLimit> limits;
    MitigationConfig mitigation = mitigation::Off{};
    /// Hold region of the bang-bang controller, as a fraction of each
    /// limit's value.
    double hysteresis_fraction = 0.02;
    /// A run aborts once it exceeds this multiple of its unthrottled time.
    double ceiling_factor = 100.0;

    double f_default() const { return pstate_ladder.front(); }
    std::size_t lowest_index() const { return pstate_ladder.size() - 1; }

    void validate() const;
};

/// Evenly spaced descending ladder from `max_ghz` down to `min_ghz`.
std::vector<double> make_ladder(double max_ghz, double min_ghz, double step_ghz);

/// Number of polling intervals covered by a limit's window.
std::size_t window_length(const ReactiveLimit &limit, double polling_interval);

/// Headroom (positive) or deficit (negative) of a limit. For current
/// limits the average power is converted to amps with `voltage`.
double budget(double avg_power, const ReactiveLimit &limit, double voltage = 1.0);

/// One-step bang-bang rule with a hold band: a negative budget steps one
/// P-state down, a budget above `hysteresis_band` steps one P-state up,
/// anything in between holds. Index 0 is P0.
std::size_t pl_alg(double budget, std::size_t current_index, std::size_t ladder_size,
                   double hysteresis_band);

struct SimOptions {
    bool record_timeline = false;
    bool record_power = false;
    /// Overrides ControllerConfig::ceiling_factor when set (seconds).
    std::optional<double> ceiling;
};

struct SimResult {
    double t_delta = 0.0; // wall-clock seconds
    std::vector<std::pair<double, double>> freq_timeline; // (time s, f_max GHz)
    std::vector<double> power_samples;                    // per polling step, watts
    double avg_power = 0.0;                               // time-weighted, watts
    bool throttled = false;
    std::size_t polls = 0;
};

/// Wall-clock time of the victim at the unthrottled ceiling.
double unthrottled_duration(const VictimSpec &victim, const ControllerConfig &config);

/// Runs the victim to completion under the reactive-limit controller.
/// Throws SimulationAbort when the run exceeds its ceiling.
SimResult simulate_run(const VictimSpec &victim, const Block &plaintext,
                       const PowerParams &params, const ControllerConfig &config,
                       const std::optional<StressorSpec> &stressor, std::uint64_t seed,
                       const SimOptions &options = {});

/// Same loop with the activity supplied directly (the plaintext only
/// matters through its activity).
SimResult simulate_activity(double activity, const VictimSpec &victim,
                            const PowerParams &params, const ControllerConfig &config,
                            const std::optional<StressorSpec> &stressor, Rng &rng,
                            const SimOptions &options = {});

} // namespace throttlesim
