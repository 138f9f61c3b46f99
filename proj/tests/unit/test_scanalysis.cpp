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

#include "oracles.hpp"
#include "throttlesim/error.hpp"
#include "throttlesim/scanalysis.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace throttlesim;
using throttlesim::oracle::brute_pearson;
using throttlesim::oracle::brute_welch;
using throttlesim::oracle::relative_error;

namespace {

const Block kKey = Block::from_hex("000102030405060708090a0b0c0d0e0f");

std::vector<double> gaussian(Rng &rng, std::size_t n, double mean, double sd) {
    std::normal_distribution<double> d(mean, sd);
    std::vector<double> v(n);
    for (auto &x : v)
        x = d(rng);
    return v;
}

Block random_block(Rng &rng) {
    Block b;
    for (auto &v : b.bytes)
        v = static_cast<std::uint8_t>(rng());
    return b;
}

// Synthetic timing traces whose duration is driven by the given model's
// leakage at the true key, plus Gaussian noise.
TraceSet synthetic(LeakageModel model, std::size_t n, double noise_ns, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, noise_ns);
    const KeySchedule ks = aes::expand_key(kKey);
    const Block target = target_round_key(model, kKey);
    TraceSet ts;
    for (std::size_t i = 0; i < n; ++i) {
        TimingTrace t;
        t.trace_id = i;
        t.plaintext = random_block(rng);
        t.ciphertext = aes::encrypt(t.plaintext, ks).ciphertext();
        double leak = 0;
        for (unsigned b = 0; b < 16; ++b)
            leak += hypothetical_time(model, t, b, target[b]);
        t.t_delta_ns = 45'000'000 + std::llround(100.0 * leak + noise(rng));
        ts.traces.push_back(t);
    }
    return ts;
}

} // namespace

TEST(Welch, MatchesBruteForceOnRandomVectors) {
    Rng rng = make_rng(1234);
    std::uniform_int_distribution<std::size_t> size(2, 400);
    std::uniform_real_distribution<double> scale(-6, 2);
    for (int i = 0; i < 1000; ++i) {
        const double sd = std::pow(10.0, scale(rng));
        const double base = (i % 3 == 0) ? 0.045 : 0.0;
        const auto a = gaussian(rng, size(rng), base, sd);
        const auto b = gaussian(rng, size(rng), base + sd * 0.3, sd * (0.5 + (i % 5) * 0.3));
        const double want = brute_welch(a, b);
        EXPECT_LE(relative_error(welch_t(a, b), want), 1e-9) << "vector pair " << i;
    }
}

TEST(Welch, KnownValue) {
    // means 2 and 5, unbiased variances 1 and 1, n = 3 each
    const std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
    EXPECT_NEAR(welch_t(a, b), -3.0 / std::sqrt(2.0 / 3.0), 1e-12);

    // Means 10 and 9, 100 samples each at +-1: s^2 = 100/99.
    std::vector<double> x, y;
    for (int i = 0; i < 100; ++i) {
        x.push_back(10 + (i % 2 ? 1 : -1));
        y.push_back(9 + (i % 2 ? 1 : -1));
    }
    EXPECT_NEAR(welch_t(x, y), 1.0 / std::sqrt(2 * (100.0 / 99.0) / 100), 1e-12);
    EXPECT_NEAR(welch_t(x, y), 7.071, 0.04);
    EXPECT_EQ(welch_t(x, x), 0.0);
}

TEST(Welch, AntisymmetricAndAffineInvariant) {
    Rng rng = make_rng(9);
    for (int i = 0; i < 50; ++i) {
        auto a = gaussian(rng, 100, 0, 1), b = gaussian(rng, 120, 0.2, 2);
        const double t = welch_t(a, b);
        EXPECT_NEAR(welch_t(b, a), -t, 1e-12 * std::abs(t) + 1e-15);
        for (auto &x : a)
            x = 3.5 * x + 10;
        for (auto &x : b)
            x = 3.5 * x + 10;
        EXPECT_NEAR(welch_t(a, b), t, 1e-9 * std::abs(t) + 1e-12);
    }
}

TEST(Welch, DegenerateInputs) {
    const std::vector<double> one = {1.0}, two = {1.0, 2.0}, flat = {3.0, 3.0};
    EXPECT_THROW(welch_t(one, two), DegenerateInput);
    EXPECT_THROW(welch_t(flat, flat), DegenerateInput);
    EXPECT_NO_THROW(welch_t(flat, two));
}

TEST(Pearson, MatchesBruteForceOnRandomVectors) {
    Rng rng = make_rng(4321);
    std::uniform_int_distribution<std::size_t> size(3, 500);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = size(rng);
        const auto x = gaussian(rng, n, 4.0, 2.0);
        auto y = gaussian(rng, n, 0.045, 1e-5);
        const double mix = (i % 7) / 7.0;
        for (std::size_t k = 0; k < n; ++k)
            y[k] += mix * 1e-5 * x[k];
        EXPECT_LE(relative_error(pearson(x, y), brute_pearson(x, y)), 1e-9) << "pair " << i;
    }
}

TEST(Pearson, BoundsAndInvariance) {
    Rng rng = make_rng(2);
    const auto x = gaussian(rng, 200, 0, 1);
    std::vector<double> y(x.size()), z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = 2 * x[i] + 1;
        z[i] = -0.5 * x[i];
    }
    EXPECT_NEAR(pearson(x, y), 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, z), -1.0, 1e-12);
    const std::vector<double> flat(x.size(), 7.0);
    EXPECT_EQ(pearson(x, flat), 0.0);
    EXPECT_THROW(pearson(x, std::span(y).first(10)), std::invalid_argument);
}

TEST(GuessingEntropy, Fixtures) {
    std::array<unsigned, 16> ranks;
    ranks.fill(1);
    EXPECT_EQ(guessing_entropy(ranks), 0.0);
    ranks.fill(128);
    EXPECT_EQ(guessing_entropy(ranks), 112.0);
    ranks.fill(1);
    ranks[3] = 6;
    EXPECT_EQ(guessing_entropy(ranks), std::log2(6.0));
    EXPECT_NEAR(guessing_entropy(ranks), 2.585, 5e-4);
    ranks[0] = 0;
    EXPECT_THROW(guessing_entropy(ranks), std::invalid_argument);
}

TEST(KeyRank, OrderingAndTies) {
    std::array<double, 256> c{};
    EXPECT_EQ(key_rank(c, 0x42), kUninformedRank);
    c[0x42] = 0.5;
    EXPECT_EQ(key_rank(c, 0x42), 1u);
    c[0x10] = 0.9;
    EXPECT_EQ(key_rank(c, 0x42), 2u);
    // A tie is resolved in favour of the smaller guess.
    c[0x50] = 0.5;
    c[0x20] = 0.5;
    EXPECT_EQ(key_rank(c, 0x42), 3u);
    EXPECT_EQ(key_rank(c, 0x50), 4u);
    EXPECT_EQ(key_rank(c, 0x00), 5u);
}

TEST(LeakageModels, NamesRoundTrip) {
    for (auto m : kAllLeakageModels)
        EXPECT_EQ(parse_leakage_model(model_name(m)), m);
    EXPECT_EQ(parse_leakage_model("round10_hw_hd"), LeakageModel::round10_hw_plus_hd);
    EXPECT_THROW(parse_leakage_model("round5"), std::invalid_argument);
    EXPECT_EQ(target_round_key(LeakageModel::round0_hw, kKey), kKey);
    EXPECT_EQ(target_round_key(LeakageModel::round10_hd, kKey).to_hex(),
              "13111d7fe3944a17f307a78b4d2b30c5");
}

TEST(LeakageModels, TrueKeyHypothesesMatchCipherStates) {
    Rng rng = make_rng(17);
    const KeySchedule ks = aes::expand_key(kKey);
    const Block k10 = ks.round_keys[10];
    for (int i = 0; i < 200; ++i) {
        TimingTrace t;
        t.plaintext = random_block(rng);
        const RoundStates st = aes::encrypt(t.plaintext, ks);
        t.ciphertext = st.ciphertext();
        unsigned r0 = 0, hw10 = 0, hd10 = 0, both = 0;
        for (unsigned b = 0; b < 16; ++b) {
            r0 += hypothetical_time(LeakageModel::round0_hw, t, b, kKey[b]);
            hw10 += hypothetical_time(LeakageModel::round10_hw, t, b, k10[b]);
            hd10 += hypothetical_time(LeakageModel::round10_hd, t, b, k10[b]);
            both += hypothetical_time(LeakageModel::round10_hw_plus_hd, t, b, k10[b]);
        }
        EXPECT_EQ(r0, hamming_weight(st.initial_add_round_key()));
        EXPECT_EQ(hw10, hamming_weight(st.last_round_input()));
        EXPECT_EQ(hd10, hamming_distance(st.last_round_input(), st.ciphertext()));
        EXPECT_EQ(both, hw10 + hd10);
    }
    EXPECT_THROW(hypothetical_time(LeakageModel::round0_hw, TimingTrace{}, 16, 0),
                 std::out_of_range);
}

TEST(Cpa, StreamingMatchesBatchAndBruteForce) {
    for (auto model : kAllLeakageModels) {
        const TraceSet ts = synthetic(model, 300, 400.0, 3);
        CpaAccumulator one_by_one(model), batched(model);
        for (const auto &t : ts.traces)
            one_by_one.add(t);
        batched.add(std::span(ts.traces).first(120), 4);
        batched.add(std::span(ts.traces).subspan(120), 3);
        const CpaResult a = one_by_one.result(kKey), b = batched.result(kKey);
        const std::vector<double> times = ts.t_deltas();
        for (unsigned byte : {0u, 5u, 15u})
            for (unsigned g : {0u, 1u, 77u, 255u}) {
                std::vector<double> h;
                for (const auto &t : ts.traces)
                    h.push_back(hypothetical_time(model, t, byte, static_cast<std::uint8_t>(g)));
                const double want = brute_pearson(h, times);
                EXPECT_NEAR(a.correlations[byte][g], want, 1e-9);
                EXPECT_NEAR(b.correlations[byte][g], want, 1e-9);
            }
        EXPECT_EQ(a.ranks, b.ranks);
        EXPECT_EQ(a.trace_count, 300u);
    }
}

TEST(Cpa, RecoversKeyUnderEveryModel) {
    for (auto model : kAllLeakageModels) {
        const TraceSet ts = synthetic(model, 3000, 200.0, 11);
        const CpaResult r = cpa(ts, model, kKey, 2);
        ASSERT_TRUE(r.ge.has_value());
        EXPECT_EQ(*r.ge, 0.0) << model_name(model);
        EXPECT_EQ(r.true_round_key, target_round_key(model, kKey));
        for (unsigned b = 0; b < 16; ++b)
            EXPECT_EQ(r.best_guess[b], (*r.true_round_key)[b]);
    }
}

TEST(Cpa, NoKeyMeansNoRanks) {
    const CpaResult r = cpa(synthetic(LeakageModel::round0_hw, 50, 100, 1), LeakageModel::round0_hw);
    EXPECT_FALSE(r.ge.has_value());
    EXPECT_FALSE(r.ranks.has_value());
    EXPECT_THROW(cpa(TraceSet{}, LeakageModel::round0_hw), DegenerateInput);
}

TEST(Cpa, ConstantObservationsAreUninformed) {
    TraceSet ts = synthetic(LeakageModel::round0_hw, 100, 0, 5);
    for (auto &t : ts.traces)
        t.t_delta_ns = 45'000'000;
    const CpaResult r = cpa(ts, LeakageModel::round0_hw, kKey);
    EXPECT_EQ(*r.ge, 112.0);
    EXPECT_EQ(r.degenerate_cells, 16u * 256u);
}

TEST(GeCurve, StartsUninformedAndReachesZero) {
    const TraceSet ts = synthetic(LeakageModel::round0_hw, 2000, 300.0, 8);
    const std::vector<std::size_t> cps = {0, 1, 500, 1000, 2000};
    const auto curve = ge_curve(ts, LeakageModel::round0_hw, kKey, cps);
    ASSERT_EQ(curve.size(), cps.size());
    EXPECT_EQ(curve[0].second, 112.0);
    EXPECT_EQ(curve[1].second, 112.0);
    EXPECT_EQ(curve.back().second, 0.0);
    EXPECT_EQ(curve.back().second, *cpa(ts, LeakageModel::round0_hw, kKey).ge);
    EXPECT_EQ(traces_to_disclosure(curve), curve[2].second == 0 ? 500u
                                           : curve[3].second == 0 ? 1000u
                                                                  : 2000u);

    const std::vector<std::size_t> too_many = {10, 2001};
    EXPECT_THROW(ge_curve(ts, LeakageModel::round0_hw, kKey, too_many), std::invalid_argument);
    const std::vector<std::size_t> descending = {10, 5};
    EXPECT_THROW(ge_curve(ts, LeakageModel::round0_hw, kKey, descending), std::invalid_argument);
    EXPECT_FALSE(traces_to_disclosure({{0, 112.0}, {10, 3.0}}).has_value());
}

TEST(Tvla, MatrixShapeAndDegenerateConstantPairs) {
    auto constant = [](std::int64_t ns, std::size_t n) {
        TraceSet ts;
        for (std::size_t i = 0; i < n; ++i) {
            TimingTrace t;
            t.t_delta_ns = ns;
            ts.traces.push_back(t);
        }
        return ts;
    };
    TraceSet varied = constant(1000, 50);
    for (std::size_t i = 0; i < 50; ++i)
        varied.traces[i].t_delta_ns += static_cast<std::int64_t>(i % 5);
    const TvlaResult r = tvla({{"a", constant(1000, 50)}, {"b", constant(1000, 60)}, {"c", varied}});
    ASSERT_EQ(r.names.size(), 3u);
    EXPECT_TRUE(r.degenerate[0][1]);
    EXPECT_EQ(r.t_scores[0][1], 0.0);
    EXPECT_FALSE(r.leaks(0, 1));
    EXPECT_FALSE(r.degenerate[0][2]);
    EXPECT_LT(r.t_scores[0][2], -kTvlaThreshold);
    EXPECT_EQ(r.t_scores[2][0], -r.t_scores[0][2]);
    EXPECT_TRUE(r.leaks(2, 0));
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(r.t_scores[i][i], 0.0);
    // Two different constants: zero variance, so no t can be formed.
    EXPECT_THROW(tvla({{"a", constant(1000, 5)}, {"b", constant(1001, 5)}}), DegenerateInput);
    EXPECT_THROW(tvla({{"a", constant(1000, 5)}, {"e", TraceSet{}}}), DegenerateInput);
}
