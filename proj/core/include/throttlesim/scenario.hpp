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

#include "throttlesim/trace_pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace throttlesim {

inline constexpr int kScenarioSchemaVersion = 1;

/// A complete, reproducible experiment description.
struct Scenario {
    std::string name;
    Workload workload;
    PlaintextSchedule schedule;
    std::uint64_t base_seed = 1;

    void validate() const;
};

/// Parses a scenario document. Errors carry the line/column for syntax
/// problems and the dotted field path for semantic ones (ConfigError).
Scenario parse_scenario(const std::string &text);
Scenario load_scenario(const std::filesystem::path &path);

/// Canonical JSON: every field spelled out, keys sorted, no whitespace.
/// Field order in the source file and omitted defaults do not matter.
std::string canonical_json(const Scenario &scenario);
/// Pretty-printed canonical form, suitable for writing back to disk.
std::string pretty_json(const Scenario &scenario);

/// "fnv1a64:<16 hex digits>" of canonical_json().
std::string scenario_digest(const Scenario &scenario);

} // namespace throttlesim
