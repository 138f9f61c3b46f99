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
#include "throttlesim/trace_pipeline.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace throttlesim {

/// Hypothetical-leakage estimators used as CPA hypotheses.
enum class LeakageModel {
    round0_hw,         // HW(plaintext ^ k0), targets the cipher key
    round10_hw,        // HW(last-round input), targets k10
    round10_hd,        // HD(last-round input, ciphertext), targets k10
    round10_hw_plus_hd // sum of the two above
};

inline constexpr std::array<LeakageModel, 4> kAllLeakageModels = {
    LeakageModel::round0_hw, LeakageModel::round10_hw, LeakageModel::round10_hd,
    LeakageModel::round10_hw_plus_hd};

/// CLI spelling: round0-hw, round10-hw, round10-hd, round10-hw-hd.
std::string_view model_name(LeakageModel model);
/// Accepts the CLI spelling and the underscore spelling.
LeakageModel parse_leakage_model(std::string_view name);

/// The round key a model recovers: k0 (= cipher key) for round0_hw, k10
/// for the last-round models.
Block target_round_key(LeakageModel model, const Block &cipher_key);

// ---------------------------------------------------------------------------
// TVLA

inline constexpr double kTvlaThreshold = 4.5;

/// Welch's t statistic with unbiased variances. Throws DegenerateInput
/// when either set has fewer than two samples or both variances are zero.
double welch_t(std::span<const double> a, std::span<const double> b);

struct NamedTraceSet {
    std::string name;
    TraceSet traces;
};

struct TvlaResult {
    std::vector<std::string> names;
    /// t_scores[i][j] = welch_t(set i, set j); the diagonal is zero.
    std::vector<std::vector<double>> t_scores;
    /// Pairs where both sets are constant and equal; their t is 0.
    std::vector<std::vector<bool>> degenerate;
    double threshold = kTvlaThreshold;

    bool leaks(std::size_t i, std::size_t j) const {
        return std::abs(t_scores[i][j]) > threshold;
    }
};

/// Pairwise Welch t over the t_delta vectors of every pair of sets.
TvlaResult tvla(const std::vector<NamedTraceSet> &sets);

// ---------------------------------------------------------------------------
// CPA

/// Hypothetical leakage of key byte `byte_index` under `key_guess`. For the
/// last-round models the byte index is a position in the ciphertext (and
/// in k10).
unsigned hypothetical_time(LeakageModel model, const TimingTrace &trace, unsigned byte_index,
                           std::uint8_t key_guess);

/// Plain two-pass Pearson correlation. Returns 0 if either side has zero
/// variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Rank (1-based) of `true_guess` when guesses are sorted by descending
/// correlation, ties broken by ascending guess value. A column with no
/// information at all (every guess equal) ranks 128.
unsigned key_rank(const std::array<double, 256> &correlations, std::uint8_t true_guess);

/// Sum of log2(rank) over the ranks.
double guessing_entropy(std::span<const unsigned> ranks);

inline constexpr unsigned kUninformedRank = 128;

struct CpaResult {
    LeakageModel model = LeakageModel::round0_hw;
    std::size_t trace_count = 0;
    std::array<std::array<double, 256>, 16> correlations{};
    std::array<std::uint8_t, 16> best_guess{};
    /// Cells whose hypothesis (or the observations) had zero variance.
    std::size_t degenerate_cells = 0;
    // Filled when the true key is known.
    std::optional<Block> true_round_key;
    std::optional<std::array<unsigned, 16>> ranks;
    std::optional<double> ge;
};

/// Single-pass CPA accumulator over all 16 x 256 (byte, guess) cells.
/// Observations are shifted by the first t_delta and kept in integer
/// nanoseconds, so the running sums stay well conditioned at millions of
/// traces.
class CpaAccumulator {
  public:
    explicit CpaAccumulator(LeakageModel model) : model_(model) {}

    void add(const TimingTrace &trace);
    /// Adds a batch, splitting the 16 byte positions across `threads`.
    void add(std::span<const TimingTrace> traces, unsigned threads = 1);

    std::size_t count() const { return count_; }
    LeakageModel model() const { return model_; }

    /// `cipher_key` is the victim key; the model's target round key is
    /// derived from it.
    CpaResult result(const std::optional<Block> &cipher_key = std::nullopt) const;

  private:
    void add_bytes(std::span<const TimingTrace> traces, unsigned first, unsigned last);

    struct Cell {
        std::int64_t sum_h = 0;
        std::int64_t sum_hh = 0;
        double sum_th = 0.0;
    };

    LeakageModel model_;
    std::size_t count_ = 0;
    bool have_shift_ = false;
    std::int64_t shift_ns_ = 0;
    double sum_t_ = 0.0;
    double sum_tt_ = 0.0;
    std::array<std::array<Cell, 256>, 16> cells_{};
};

/// CPA on the whole set. Requires at least two traces.
CpaResult cpa(const TraceSet &ts, LeakageModel model,
              const std::optional<Block> &cipher_key = std::nullopt, unsigned threads = 1);

/// GE after the first `count` traces for each checkpoint (ascending, each
/// at most |ts|). Checkpoints below two traces carry no information and
/// report the uninformed value 16 * log2(128) = 112.
std::vector<std::pair<std::size_t, double>>
ge_curve(const TraceSet &ts, LeakageModel model, const Block &cipher_key,
         std::span<const std::size_t> checkpoints, unsigned threads = 1);

/// First checkpoint at which GE is exactly 0, if any.
std::optional<std::size_t>
traces_to_disclosure(const std::vector<std::pair<std::size_t, double>> &curve);

} // namespace throttlesim
