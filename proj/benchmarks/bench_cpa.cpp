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

#include "throttlesim/scanalysis.hpp"

#include <benchmark/benchmark.h>

using namespace throttlesim;

namespace {

TraceSet random_traces(std::size_t n) {
    const KeySchedule ks = aes::expand_key(Block::from_hex("000102030405060708090a0b0c0d0e0f"));
    Rng rng = make_rng(1);
    TraceSet ts;
    for (std::size_t i = 0; i < n; ++i) {
        TimingTrace t;
        for (auto &b : t.plaintext.bytes)
            b = static_cast<std::uint8_t>(rng());
        t.ciphertext = aes::encrypt(t.plaintext, ks).ciphertext();
        t.t_delta_ns = 45'000'000 + static_cast<std::int64_t>(rng() % 100'000);
        ts.traces.push_back(t);
    }
    return ts;
}

} // namespace

static void BM_CpaAccumulate(benchmark::State &state) {
    const auto model = static_cast<LeakageModel>(state.range(0));
    const TraceSet ts = random_traces(2000);
    for (auto _ : state) {
        CpaAccumulator acc(model);
        acc.add(ts.traces);
        benchmark::DoNotOptimize(acc.count());
    }
    state.SetItemsProcessed(state.iterations() * ts.size());
    state.SetLabel(std::string(model_name(model)));
}
BENCHMARK(BM_CpaAccumulate)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

static void BM_CpaResult(benchmark::State &state) {
    const TraceSet ts = random_traces(500);
    CpaAccumulator acc(LeakageModel::round0_hw);
    acc.add(ts.traces);
    const Block key = Block::from_hex("000102030405060708090a0b0c0d0e0f");
    for (auto _ : state)
        benchmark::DoNotOptimize(acc.result(key));
}
BENCHMARK(BM_CpaResult);

static void BM_WelchT(benchmark::State &state) {
    const TraceSet a = random_traces(static_cast<std::size_t>(state.range(0)));
    const TraceSet b = random_traces(static_cast<std::size_t>(state.range(0)));
    const auto ta = a.t_deltas(), tb = b.t_deltas();
    for (auto _ : state)
        benchmark::DoNotOptimize(welch_t(ta, tb));
}
BENCHMARK(BM_WelchT)->Arg(10'000);
