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

#include <stdexcept>
#include <string>

namespace throttlesim {

/// Malformed or inconsistent configuration (scenario files, parameters).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A simulation run exceeded its wall-clock ceiling without finishing.
class SimulationAbort : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Statistical analysis was handed input it cannot produce a value for
/// (zero variance, empty sets, everything filtered out).
class DegenerateInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace throttlesim
