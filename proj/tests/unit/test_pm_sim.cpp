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

#include "throttlesim/error.hpp"
#include "throttlesim/pm_sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace throttlesim;

namespace {

// Two P-states, V = 1 V flat, static 1 W, activity 4: the package draws
// 9 W at 2 GHz and 5 W at 1 GHz against a 7 W limit.
struct Golden {
    PowerParams params;
    ControllerConfig config;
    VictimSpec victim;

    Golden() {
        params.static_power = 1.0;
        params.voltage = {1.0, 0.0};
        config.pstate_ladder = {2.0, 1.0};
        config.limits = {{LimitKind::power_watts, 7.0, 0.002, "PL"}};
        victim.cycles_per_encryption = 1;
    }

    SimResult run(std::uint64_t cycles, const SimOptions &opts = {}) {
        victim.repetitions_n = cycles;
        Rng rng = make_rng(1);
        return simulate_activity(4.0, victim, params, config, std::nullopt, rng, opts);
    }
};

ControllerConfig desk_controller(double limit) {
    ControllerConfig c;
    c.pstate_ladder = make_ladder(3.8, 0.8, 0.1);
    c.limits = {{LimitKind::power_watts, limit, 0.002, "PL2"}};
    return c;
}

VictimSpec desk_victim(std::uint64_t n) {
    VictimSpec v;
    v.cycles_per_encryption = 100;
    v.parallel_instances = 4;
    v.repetitions_n = n;
    return v;
}

PowerParams quiet_params() {
    PowerParams p;
    p.leakage_per_bit = 0.002;
    return p;
}

} // namespace

// Reference values from an exact rational-arithmetic stepper written
// separately from the library.
TEST(PmSimGolden, ShortRunEndsOnPollBoundary) {
    Golden g;
    SimOptions opts;
    opts.record_timeline = true;
    const SimResult r = g.run(12'000'000, opts);
    EXPECT_NEAR(r.t_delta, 0.008, 1e-12);
    EXPECT_NEAR(r.avg_power, 7.0, 1e-9);
    EXPECT_EQ(r.polls, 8u);
    EXPECT_TRUE(r.throttled);
    const double expected[] = {2, 2, 1, 1, 2, 2, 1, 1};
    ASSERT_EQ(r.freq_timeline.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_DOUBLE_EQ(r.freq_timeline[i].first, i * 0.001);
        EXPECT_EQ(r.freq_timeline[i].second, expected[i]) << "poll " << i;
    }
}

TEST(PmSimGolden, PartialFinalInterval) {
    Golden g;
    const SimResult r = g.run(30'500'000);
    EXPECT_NEAR(r.t_delta, 81.0 / 4000.0, 1e-12);
    EXPECT_NEAR(r.avg_power, 569.0 / 81.0, 1e-9);
    EXPECT_EQ(r.polls, 21u);
}

TEST(PmSim, UnthrottledRunTakesCyclesOverFrequency) {
    ControllerConfig c = desk_controller(20.0);
    c.limits.clear();
    const VictimSpec v = desk_victim(1'710'000);
    Rng rng = make_rng(9);
    const SimResult r = simulate_activity(1.2, v, quiet_params(), c, std::nullopt, rng);
    EXPECT_NEAR(r.t_delta, 171e6 / 3.8e9, 1e-12);
    EXPECT_DOUBLE_EQ(unthrottled_duration(v, c), 171e6 / 3.8e9);
    EXPECT_FALSE(r.throttled);
}

TEST(PmSim, HigherActivityNeverRunsFaster) {
    const ControllerConfig c = desk_controller(20.0);
    const VictimSpec v = desk_victim(1'710'000);
    double prev = 0;
    for (double a = 1.0; a <= 1.6; a += 0.02) {
        Rng rng = make_rng(1);
        const double t = simulate_activity(a, v, quiet_params(), c, std::nullopt, rng).t_delta;
        EXPECT_GE(t, prev) << "activity " << a;
        prev = t;
    }
}

TEST(PmSim, FrequencyStaysOnLadderAndMovesOneStep) {
    ControllerConfig c = desk_controller(18.0);
    PowerParams p = quiet_params();
    p.noise_sigma = 3.0;
    SimOptions opts;
    opts.record_timeline = true;
    opts.record_power = true;
    Rng rng = make_rng(21);
    const SimResult r = simulate_activity(1.3, desk_victim(3'000'000), p, c, std::nullopt, rng, opts);
    ASSERT_EQ(r.freq_timeline.size(), r.polls);
    ASSERT_EQ(r.power_samples.size(), r.polls);
    for (std::size_t i = 0; i < r.freq_timeline.size(); ++i) {
        const double f = r.freq_timeline[i].second;
        const auto it = std::find(c.pstate_ladder.begin(), c.pstate_ladder.end(), f);
        ASSERT_NE(it, c.pstate_ladder.end());
        if (i > 0) {
            const auto prev = std::find(c.pstate_ladder.begin(), c.pstate_ladder.end(),
                                        r.freq_timeline[i - 1].second);
            EXPECT_LE(std::abs(std::distance(prev, it)), 1);
        }
    }
}

TEST(PmSim, SteadyStateAverageTracksLimit) {
    const ControllerConfig c = desk_controller(16.0);
    Rng rng = make_rng(2);
    const SimResult r =
        simulate_activity(1.2, desk_victim(20'000'000), quiet_params(), c, std::nullopt, rng);
    EXPECT_TRUE(r.throttled);
    EXPECT_NEAR(r.avg_power, 16.0, 0.02 * 16.0);
}

TEST(PmSim, SameSeedSameResult) {
    ControllerConfig c = desk_controller(18.0);
    c.mitigation = mitigation::LimitFuzzing{14.0, 22.0, 0.01};
    PowerParams p = quiet_params();
    p.noise_sigma = 3.0;
    const StressorSpec s{1.0, 0.5};
    Block pt = Block::filled(0x5a);
    const SimResult a = simulate_run(desk_victim(1'000'000), pt, p, c, s, 77);
    const SimResult b = simulate_run(desk_victim(1'000'000), pt, p, c, s, 77);
    const SimResult d = simulate_run(desk_victim(1'000'000), pt, p, c, s, 78);
    EXPECT_EQ(a.t_delta, b.t_delta);
    EXPECT_EQ(a.avg_power, b.avg_power);
    EXPECT_NE(a.t_delta, d.t_delta);
}

TEST(PmSimMitigation, ModelledPowerHidesActivity) {
    ControllerConfig c = desk_controller(18.0);
    c.mitigation = mitigation::ModelledPower{1.2};
    const VictimSpec v = desk_victim(1'710'000);
    Rng r1 = make_rng(5), r2 = make_rng(5);
    const SimResult lo = simulate_activity(1.0, v, quiet_params(), c, std::nullopt, r1);
    const SimResult hi = simulate_activity(1.5, v, quiet_params(), c, std::nullopt, r2);
    EXPECT_TRUE(lo.throttled);
    EXPECT_EQ(lo.t_delta, hi.t_delta);
    // Energy accounting still uses the real activity.
    EXPECT_LT(lo.avg_power, hi.avg_power);
}

TEST(PmSimMitigation, LowestFrequencyPinsAfterViolation) {
    ControllerConfig c = desk_controller(18.0);
    c.mitigation = mitigation::LowestFrequency{};
    SimOptions opts;
    opts.record_timeline = true;
    Rng rng = make_rng(1);
    const SimResult r =
        simulate_activity(1.3, desk_victim(1'000'000), quiet_params(), c, std::nullopt, rng, opts);
    const auto first_low = std::find_if(r.freq_timeline.begin(), r.freq_timeline.end(),
                                        [](const auto &e) { return e.second < 3.8; });
    ASSERT_NE(first_low, r.freq_timeline.end());
    for (auto it = first_low; it != r.freq_timeline.end(); ++it)
        EXPECT_EQ(it->second, 0.8);
}

TEST(PmSimMitigation, ZeroInputNoiseEqualsOff) {
    ControllerConfig off = desk_controller(18.0);
    ControllerConfig noise = off;
    noise.mitigation = mitigation::PowerInputNoise{0.0};
    PowerParams p = quiet_params();
    p.noise_sigma = 2.0;
    Rng r1 = make_rng(8), r2 = make_rng(8);
    EXPECT_EQ(simulate_activity(1.2, desk_victim(2'000'000), p, off, std::nullopt, r1).t_delta,
              simulate_activity(1.2, desk_victim(2'000'000), p, noise, std::nullopt, r2).t_delta);
}

TEST(PmSim, CeilingAborts) {
    ControllerConfig c = desk_controller(3.0); // below static + minimum dynamic power
    c.ceiling_factor = 2.0;
    Rng rng = make_rng(1);
    EXPECT_THROW(
        simulate_activity(1.2, desk_victim(1'710'000), quiet_params(), c, std::nullopt, rng),
        SimulationAbort);

    SimOptions opts;
    opts.ceiling = 0.0005;
    Rng rng2 = make_rng(1);
    c.limits.clear();
    EXPECT_THROW(simulate_activity(1.2, desk_victim(1'710'000), quiet_params(), c, std::nullopt,
                                   rng2, opts),
                 SimulationAbort);
}

TEST(PmSimControl, PlAlgBangBangWithHold) {
    EXPECT_EQ(pl_alg(-0.1, 0, 5, 0.5), 1u);
    EXPECT_EQ(pl_alg(-0.1, 4, 5, 0.5), 4u);
    EXPECT_EQ(pl_alg(0.0, 2, 5, 0.5), 2u);
    EXPECT_EQ(pl_alg(0.5, 2, 5, 0.5), 2u);
    EXPECT_EQ(pl_alg(0.6, 2, 5, 0.5), 1u);
    EXPECT_EQ(pl_alg(0.6, 0, 5, 0.5), 0u);
}

TEST(PmSimControl, BudgetAndWindow) {
    const ReactiveLimit pl{LimitKind::power_watts, 20.0, 0.002, "PL2"};
    EXPECT_DOUBLE_EQ(budget(18.5, pl), 1.5);
    EXPECT_DOUBLE_EQ(budget(21.0, pl), -1.0);
    const ReactiveLimit icc{LimitKind::current_amps, 10.0, 0.003, "ICC"};
    EXPECT_DOUBLE_EQ(budget(12.0, icc, 1.5), 2.0);
    EXPECT_EQ(window_length(pl, 0.001), 2u);
    EXPECT_EQ(window_length(icc, 0.001), 3u);
    EXPECT_EQ(window_length({LimitKind::power_watts, 1, 0.0001, ""}, 0.001), 1u);
}

TEST(PmSimControl, TighterLimitWins) {
    ControllerConfig one = desk_controller(18.0);
    ControllerConfig two = one;
    two.limits.push_back({LimitKind::power_watts, 40.0, 0.010, "PL1"});
    Rng r1 = make_rng(3), r2 = make_rng(3);
    EXPECT_EQ(simulate_activity(1.2, desk_victim(2'000'000), quiet_params(), one, std::nullopt, r1)
                  .t_delta,
              simulate_activity(1.2, desk_victim(2'000'000), quiet_params(), two, std::nullopt, r2)
                  .t_delta);
}

TEST(PmSimControl, LadderConstruction) {
    const auto ladder = make_ladder(3.8, 0.8, 0.1);
    ASSERT_EQ(ladder.size(), 31u);
    EXPECT_EQ(ladder.front(), 3.8);
    EXPECT_EQ(ladder[7], 3.1);
    EXPECT_EQ(ladder.back(), 0.8);
    EXPECT_THROW(make_ladder(1.0, 2.0, 0.1), ConfigError);
}

TEST(PmSimControl, Validation) {
    ControllerConfig c = desk_controller(20.0);
    EXPECT_NO_THROW(c.validate());
    c.pstate_ladder = {1.0, 2.0};
    EXPECT_THROW(c.validate(), ConfigError);
    c = desk_controller(20.0);
    c.limits[0].tau = 0.0015;
    EXPECT_THROW(c.validate(), ConfigError);
    c = desk_controller(20.0);
    c.mitigation = mitigation::LimitFuzzing{20.0, 10.0, 0.01};
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_EQ(mitigation_name(c.mitigation), "limit_fuzzing");
}
