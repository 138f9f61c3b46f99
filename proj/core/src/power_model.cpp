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

#include "throttlesim/power_model.hpp"
#include "throttlesim/error.hpp"

#include <algorithm>
#include <cmath>

namespace throttlesim {

void PowerParams::validate() const {
    if (!(cap_c > 0))
        throw ConfigError("power.cap_c must be > 0");
    if (!(noise_sigma >= 0))
        throw ConfigError("power.noise_sigma_w must be >= 0");
    if (!(leakage_per_bit >= 0))
        throw ConfigError("power.leakage_per_bit must be >= 0");
    if (!(voltage.v0 > 0))
        throw ConfigError("power.voltage.v0 must be > 0");
    if (!(alpha_base >= 0))
        throw ConfigError("power.alpha_base must be >= 0");
    if (!(static_power >= 0))
        throw ConfigError("power.static_power_w must be >= 0");
    if (!(voltage.slope >= 0))
        throw ConfigError("power.voltage.slope must be >= 0");
    if (leakage.round0_hw < 0 || leakage.round10_hw < 0 || leakage.round10_hd < 0)
        throw ConfigError("power.leakage weights must be >= 0");
}

void VictimSpec::validate() const {
    if (cycles_per_encryption == 0)
        throw ConfigError("victim.cycles_per_encryption must be > 0");
    if (repetitions_n < 1)
        throw ConfigError("victim.repetitions_n must be >= 1");
    if (parallel_instances < 1)
        throw ConfigError("victim.parallel_instances must be >= 1");
}

void StressorSpec::validate() const {
    if (!(mean_power >= 0))
        throw ConfigError("stressor.mean_power_w must be >= 0");
    if (!(power_sigma >= 0))
        throw ConfigError("stressor.power_sigma_w must be >= 0");
}

PowerDraw draw_power(const PowerParams &params, const std::optional<StressorSpec> &stressor,
                     Rng &rng) {
    PowerDraw d;
    if (params.noise_sigma > 0)
        d.noise = std::normal_distribution<double>(0.0, params.noise_sigma)(rng);
    if (stressor) {
        d.stressor = stressor->mean_power;
        if (stressor->power_sigma > 0)
            d.stressor += std::normal_distribution<double>(0.0, stressor->power_sigma)(rng);
    }
    return d;
}

double leakage_units(const RoundStates &states, const LeakageWeights &weights) {
    double units = 0.0;
    if (weights.round0_hw != 0)
        units += weights.round0_hw * hamming_weight(states.initial_add_round_key());
    if (weights.round10_hw != 0)
        units += weights.round10_hw * hamming_weight(states.last_round_input());
    if (weights.round10_hd != 0)
        units += weights.round10_hd *
                 hamming_distance(states.last_round_input(), states.ciphertext());
    return units;
}

double victim_activity(const Block &plaintext, const KeySchedule &schedule,
                       const PowerParams &params) {
    const RoundStates states = aes::encrypt(plaintext, schedule);
    return params.alpha_base + params.leakage_per_bit * leakage_units(states, params.leakage);
}

double victim_activity(const Block &plaintext, const VictimSpec &victim,
                       const PowerParams &params) {
    return victim_activity(plaintext, aes::expand_key(victim.key), params);
}

double expected_activity(const PowerParams &params) {
    const auto &w = params.leakage;
    return params.alpha_base +
           params.leakage_per_bit * 64.0 * (w.round0_hw + w.round10_hw + w.round10_hd);
}

double dynamic_power(double activity, double freq_ghz, const PowerParams &params) {
    const double v = params.voltage.at(freq_ghz);
    return activity * params.cap_c * v * v * freq_ghz;
}

double instantaneous_power(double activity, double freq_ghz, const PowerParams &params,
                           const PowerDraw &draw, unsigned instances) {
    const double p = params.static_power +
                     instances * dynamic_power(activity, freq_ghz, params) + draw.stressor +
                     draw.noise;
    return std::max(p, 0.0);
}

double instantaneous_power(double activity, double freq_ghz, const PowerParams &params,
                           const std::optional<StressorSpec> &stressor, Rng &rng,
                           unsigned instances) {
    return instantaneous_power(activity, freq_ghz, params, draw_power(params, stressor, rng),
                               instances);
}

} // namespace throttlesim
