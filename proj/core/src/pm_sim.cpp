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

#include "throttlesim/pm_sim.hpp"
#include "throttlesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace throttlesim {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

// Running average over a fixed number of polling samples.
class SlidingWindow {
  public:
    SlidingWindow(std::size_t length, double seed) : samples_(length, seed), sum_(seed * length) {}

    void push(double v) {
        sum_ += v - samples_[head_];
        samples_[head_] = v;
        head_ = (head_ + 1) % samples_.size();
        // Resum periodically so the running sum does not drift.
        if (++pushes_ % 4096 == 0)
            sum_ = std::accumulate(samples_.begin(), samples_.end(), 0.0);
    }
    double average() const { return sum_ / static_cast<double>(samples_.size()); }

  private:
    std::vector<double> samples_;
    std::size_t head_ = 0;
    std::size_t pushes_ = 0;
    double sum_;
};

} // namespace

std::string_view mitigation_name(const MitigationConfig &m) {
    return std::visit(overloaded{
                          [](const mitigation::Off &) { return std::string_view("off"); },
                          [](const mitigation::LowestFrequency &) {
                              return std::string_view("lowest_frequency");
                          },
                          [](const mitigation::LimitFuzzing &) {
                              return std::string_view("limit_fuzzing");
                          },
                          [](const mitigation::ModelledPower &) {
                              return std::string_view("modelled_power");
                          },
                          [](const mitigation::PowerInputNoise &) {
                              return std::string_view("power_input_noise");
                          },
                      },
                      m);
}

void validate(const MitigationConfig &m) {
    if (const auto *f = std::get_if<mitigation::LimitFuzzing>(&m)) {
        if (!(f->range_low < f->range_high))
            throw ConfigError("mitigation.limit_fuzzing: range_low must be < range_high");
        if (!(f->range_low > 0))
            throw ConfigError("mitigation.limit_fuzzing: range_low must be > 0");
        if (!(f->reconfig_period > 0))
            throw ConfigError("mitigation.limit_fuzzing: reconfig_period_s must be > 0");
    } else if (const auto *n = std::get_if<mitigation::PowerInputNoise>(&m)) {
        if (!(n->sigma >= 0))
            throw ConfigError("mitigation.power_input_noise: sigma_w must be >= 0");
    } else if (const auto *p = std::get_if<mitigation::ModelledPower>(&m)) {
        if (!(p->fixed_activity >= 0))
            throw ConfigError("mitigation.modelled_power: fixed_activity must be >= 0");
    }
}

void ControllerConfig::validate() const {
    if (!(polling_interval > 0))
        throw ConfigError("controller.polling_interval_s must be > 0");
    if (pstate_ladder.size() < 2)
        throw ConfigError("controller.pstate_ladder needs at least two P-states");
    for (std::size_t i = 0; i < pstate_ladder.size(); ++i) {
        if (!(pstate_ladder[i] > 0))
            throw ConfigError("controller.pstate_ladder: frequencies must be > 0");
        if (i > 0 && !(pstate_ladder[i] < pstate_ladder[i - 1]))
            throw ConfigError("controller.pstate_ladder must be strictly descending");
    }
    for (std::size_t i = 0; i < limits.size(); ++i) {
        const auto &l = limits[i];
        const std::string where = "controller.limits[" + std::to_string(i) + "]";
        if (!(l.limit_value > 0))
            throw ConfigError(where + ".limit must be > 0");
        if (!(l.tau > 0))
            throw ConfigError(where + ".tau_s must be > 0");
        const double ratio = l.tau / polling_interval;
        if (std::round(ratio) < 1 || std::abs(ratio - std::round(ratio)) > 1e-6 * ratio)
            throw ConfigError(where + ".tau_s must be an integer multiple of the polling interval");
    }
    if (!(hysteresis_fraction >= 0))
        throw ConfigError("controller.hysteresis_fraction must be >= 0");
    if (!(ceiling_factor >= 1))
        throw ConfigError("controller.ceiling_factor must be >= 1");
    throttlesim::validate(mitigation);
}

std::vector<double> make_ladder(double max_ghz, double min_ghz, double step_ghz) {
    if (!(step_ghz > 0) || !(max_ghz > min_ghz) || !(min_ghz > 0))
        throw ConfigError("ladder: need max > min > 0 and step > 0");
    const auto steps = static_cast<std::size_t>(std::floor((max_ghz - min_ghz) / step_ghz + 1e-9));
    std::vector<double> ladder;
    ladder.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        // Round to 1e-9 GHz so 3.8 - 0.1*k prints as expected.
        ladder.push_back(std::round((max_ghz - step_ghz * static_cast<double>(i)) * 1e9) / 1e9);
    return ladder;
}

std::size_t window_length(const ReactiveLimit &limit, double polling_interval) {
    return static_cast<std::size_t>(std::max(1.0, std::round(limit.tau / polling_interval)));
}

double budget(double avg_power, const ReactiveLimit &limit, double voltage) {
    const double observed =
        limit.kind == LimitKind::current_amps ? avg_power / voltage : avg_power;
    return limit.limit_value - observed;
}

std::size_t pl_alg(double budget, std::size_t current_index, std::size_t ladder_size,
                   double hysteresis_band) {
    if (budget < 0)
        return std::min(current_index + 1, ladder_size - 1);
    if (budget > hysteresis_band && current_index > 0)
        return current_index - 1;
    return current_index;
}

double unthrottled_duration(const VictimSpec &victim, const ControllerConfig &config) {
    return static_cast<double>(victim.total_cycles()) / (config.f_default() * 1e9);
}

SimResult simulate_activity(double activity, const VictimSpec &victim,
                            const PowerParams &params, const ControllerConfig &config,
                            const std::optional<StressorSpec> &stressor, Rng &rng,
                            const SimOptions &options) {
    const double T = config.polling_interval;
    const auto &ladder = config.pstate_ladder;
    const std::size_t bottom = config.lowest_index();
    const unsigned instances = victim.parallel_instances;
    const double ceiling =
        options.ceiling.value_or(config.ceiling_factor * unthrottled_duration(victim, config));

    std::vector<ReactiveLimit> limits = config.limits;
    std::vector<SlidingWindow> windows;
    windows.reserve(limits.size());
    for (const auto &l : limits)
        windows.emplace_back(window_length(l, T), params.static_power);

    const auto *fuzz = std::get_if<mitigation::LimitFuzzing>(&config.mitigation);
    const auto *modelled = std::get_if<mitigation::ModelledPower>(&config.mitigation);
    const auto *input_noise = std::get_if<mitigation::PowerInputNoise>(&config.mitigation);
    const bool pin_on_violation =
        std::holds_alternative<mitigation::LowestFrequency>(config.mitigation);

    std::uniform_real_distribution<double> fuzz_draw(fuzz ? fuzz->range_low : 0.0,
                                                     fuzz ? fuzz->range_high : 1.0);
    double next_reconfig = 0.0;
    std::uint64_t reconfigs = 0;
    auto maybe_reconfigure = [&](double now) {
        if (!fuzz)
            return;
        while (now >= next_reconfig) {
            for (auto &l : limits)
                l.limit_value = fuzz_draw(rng);
            ++reconfigs;
            next_reconfig = static_cast<double>(reconfigs) * fuzz->reconfig_period;
        }
    };
    maybe_reconfigure(0.0);

    SimResult result;
    std::size_t index = 0;
    bool pinned = false;
    double remaining = static_cast<double>(victim.total_cycles());
    double energy = 0.0;

    for (std::size_t step = 0;; ++step) {
        const double now = static_cast<double>(step) * T;
        if (now > ceiling)
            throw SimulationAbort("run did not finish within " + std::to_string(ceiling) +
                                  " s (" + std::to_string(step) + " polling intervals)");

        const double f = ladder[index];
        if (index != 0)
            result.throttled = true;
        if (options.record_timeline)
            result.freq_timeline.emplace_back(now, f);

        const PowerDraw draw = draw_power(params, stressor, rng);
        const double p_true = instantaneous_power(activity, f, params, draw, instances);
        if (options.record_power)
            result.power_samples.push_back(p_true);

        const double cycles_per_step = f * 1e9 * T;
        if (remaining <= cycles_per_step) {
            const double dt = remaining / (f * 1e9);
            energy += p_true * dt;
            result.t_delta = now + dt;
            result.polls = step + 1;
            break;
        }
        remaining -= cycles_per_step;
        energy += p_true * T;
        const double end = static_cast<double>(step + 1) * T;

        double p_ctrl = modelled
                            ? instantaneous_power(modelled->fixed_activity, f, params, draw,
                                                  instances)
                            : p_true;
        if (input_noise && input_noise->sigma > 0)
            p_ctrl += std::normal_distribution<double>(0.0, input_noise->sigma)(rng);

        maybe_reconfigure(end);

        // Every limit proposes a new index; the lowest frequency wins.
        std::size_t next = 0;
        bool violated = false;
        const double v = params.voltage.at(f);
        for (std::size_t i = 0; i < limits.size(); ++i) {
            windows[i].push(p_ctrl);
            const double b = budget(windows[i].average(), limits[i], v);
            violated = violated || b < 0;
            const double band = config.hysteresis_fraction * limits[i].limit_value;
            next = std::max(next, pl_alg(b, index, ladder.size(), band));
        }
        if (limits.empty())
            next = index;
        if (pin_on_violation && violated)
            pinned = true;
        index = pinned ? bottom : next;
    }

    result.avg_power = result.t_delta > 0 ? energy / result.t_delta : 0.0;
    return result;
}

SimResult simulate_run(const VictimSpec &victim, const Block &plaintext,
                       const PowerParams &params, const ControllerConfig &config,
                       const std::optional<StressorSpec> &stressor, std::uint64_t seed,
                       const SimOptions &options) {
    Rng rng = make_rng(seed);
    return simulate_activity(victim_activity(plaintext, victim, params), victim, params, config,
                             stressor, rng, options);
}

} // namespace throttlesim
