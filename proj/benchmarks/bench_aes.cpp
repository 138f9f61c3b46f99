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

#include "throttlesim/aes.hpp"
#include "throttlesim/power_model.hpp"

#include <benchmark/benchmark.h>

using namespace throttlesim;

static void BM_ExpandKey(benchmark::State &state) {
    Block key = Block::from_hex("000102030405060708090a0b0c0d0e0f");
    for (auto _ : state) {
        benchmark::DoNotOptimize(aes::expand_key(key));
        key[0]++;
    }
}
BENCHMARK(BM_ExpandKey);

static void BM_EncryptWithStates(benchmark::State &state) {
    const KeySchedule ks = aes::expand_key(Block::from_hex("000102030405060708090a0b0c0d0e0f"));
    Block pt;
    for (auto _ : state) {
        benchmark::DoNotOptimize(aes::encrypt(pt, ks));
        pt[0]++;
    }
}
BENCHMARK(BM_EncryptWithStates);

static void BM_VictimActivity(benchmark::State &state) {
    const KeySchedule ks = aes::expand_key(Block::from_hex("000102030405060708090a0b0c0d0e0f"));
    PowerParams p;
    p.leakage = {1, 1, 1};
    Block pt;
    for (auto _ : state) {
        benchmark::DoNotOptimize(victim_activity(pt, ks, p));
        pt[3]++;
    }
}
BENCHMARK(BM_VictimActivity);
