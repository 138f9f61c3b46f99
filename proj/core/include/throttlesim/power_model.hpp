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
#include "throttlesim/rng.hpp"

#include <cstdint>
#include <optional>

namespace throttlesim {

/// Affine voltage/frequency relation V(f) = v0 + slope * f, f in GHz.
struct VoltageCurve {
    double v0 = 0.6;    // volts
    double slope = 0.1; // volts per GHz

    double at(double ghz) const { return v0 + slope * ghz; }
};

/// Which round states drive the data-dependent part of the switching
/// activity, in Hamming units. Each term is summed over all 16 bytes.
struct LeakageWeights {
    double round0_hw = 1.0;  // HW of the initial AddRoundKey output
    double round10_hw = 0.0; // HW of the last-round input
    double round10_hd = 1.0; // HD between last-round input and ciphertext
};

/// Parameters of the dynamic power relation P = a * C * V^2 * f.
struct PowerParams {
    double alpha_base = 1.0;       // data-independent switching activity
    double cap_c = 1.0;            // effective capacitance, arbitrary units
    double leakage_per_bit = 0.01; // activity added per Hamming unit
    double static_power = 2.0;     // watts, package level
    double noise_sigma = 0.0;      // watts, per power sample
    VoltageCurve voltage;
    LeakageWeights leakage;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

/// The simulated victim: a constant-cycle AES workload.
struct VictimSpec {
    Block key;
    std::uint64_t cycles_per_encryption = 100;
    std::uint64_t repetitions_n = 1;
    unsigned parallel_instances = 1;

    std::uint64_t total_cycles() const { return cycles_per_encryption * repetitions_n; }
    void validate() const;
};

/// A co-running workload with data-independent, stationary power.
struct StressorSpec {
    double mean_power = 0.0;  // watts
    double power_sigma = 0.0; // watts

    void validate() const;
};

/// Random contributions to one power sample. Drawn once per polling step
/// so that the same draw can be applied to both the true and the modelled
/// power reading.
struct PowerDraw {
    double noise = 0.0;
    double stressor = 0.0;
};

PowerDraw draw_power(const PowerParams &params, const std::optional<StressorSpec> &stressor,
                     Rng &rng);

/// Raw Hamming-unit leakage of one encryption under the given weights.
double leakage_units(const RoundStates &states, const LeakageWeights &weights);

/// Switching activity of one encryption of `plaintext` under the victim's
/// key. Depends on the plaintext only through the AES round states.
double victim_activity(const Block &plaintext, const VictimSpec &victim,
                       const PowerParams &params);
double victim_activity(const Block &plaintext, const KeySchedule &schedule,
                       const PowerParams &params);

/// Mean activity over uniformly random plaintexts (each Hamming term
/// averages to 64 units).
double expected_activity(const PowerParams &params);

/// activity * C * V(f)^2 * f for one instance.
double dynamic_power(double activity, double freq_ghz, const PowerParams &params);

/// Package power sample: static + instances * dynamic + stressor + noise,
/// clamped at zero.
double instantaneous_power(double activity, double freq_ghz, const PowerParams &params,
                           const PowerDraw &draw, unsigned instances = 1);

/// Same as above, drawing the random terms from `rng`.
double instantaneous_power(double activity, double freq_ghz, const PowerParams &params,
                           const std::optional<StressorSpec> &stressor, Rng &rng,
                           unsigned instances = 1);

} // namespace throttlesim
