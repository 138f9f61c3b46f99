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
#include "throttlesim/trace_pipeline.hpp"

#include <benchmark/benchmark.h>

using namespace throttlesim;

namespace {

Workload desk_workload() {
    Workload w;
    w.victim.key = Block::from_hex("000102030405060708090a0b0c0d0e0f");
    w.victim.parallel_instances = 4;
    w.victim.repetitions_n = 1'710'000; // 45 ms at 3.8 GHz
    w.power.leakage_per_bit = 0.002;
    w.power.noise_sigma = 3.0;
    w.controller.pstate_ladder = make_ladder(3.8, 0.8, 0.1);
    w.controller.limits = {{LimitKind::power_watts, 20.0, 0.002, "PL2"}};
    w.measurement.timer_jitter = 20e-6;
    return w;
}

} // namespace

static void BM_SimulateRun(benchmark::State &state) {
    Workload w = desk_workload();
    w.victim.repetitions_n *= static_cast<std::uint64_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_run(w.victim, Block{}, w.power, w.controller,
                                              std::nullopt, ++seed));
}
BENCHMARK(BM_SimulateRun)->Arg(1)->Arg(10)->Arg(100);

static void BM_Collect(benchmark::State &state) {
    const Workload w = desk_workload();
    PlaintextSchedule s;
    s.count = static_cast<std::size_t>(state.range(0));
    s.seed = 7;
    CollectOptions opts;
    opts.threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state)
        benchmark::DoNotOptimize(collect(s, w, opts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Collect)->Args({1000, 1})->Args({1000, 4})->UseRealTime()->Unit(benchmark::kMillisecond);
