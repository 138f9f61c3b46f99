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
#include "throttlesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace throttlesim {

namespace {

std::array<std::uint8_t, 256> make_inv_sbox() {
    std::array<std::uint8_t, 256> inv{};
    for (unsigned x = 0; x < 256; ++x)
        inv[aes::sbox(static_cast<std::uint8_t>(x))] = static_cast<std::uint8_t>(x);
    return inv;
}

const std::array<std::uint8_t, 256> &inv_sbox() {
    static const auto table = make_inv_sbox();
    return table;
}

constexpr std::array<std::uint8_t, 256> make_hw_table() {
    std::array<std::uint8_t, 256> t{};
    for (unsigned x = 0; x < 256; ++x)
        t[x] = static_cast<std::uint8_t>(hamming_weight(static_cast<std::uint8_t>(x)));
    return t;
}

constexpr auto kHw = make_hw_table();

// Position in the last-round input that ShiftRows moves to ciphertext
// position b (row r = b % 4, column c = b / 4).
constexpr unsigned last_round_source(unsigned b) {
    const unsigned r = b % 4, c = b / 4;
    return r + 4 * ((c + r) % 4);
}

struct MeanVar {
    double mean;
    double var; // unbiased
};

// Statistics of v - shift. Subtracting a nearby reference first keeps the
// mean accurate when the spread is tiny compared to the values.
MeanVar mean_var(std::span<const double> v, double shift = 0.0) {
    // Exact for constant input; the summed mean would otherwise leave a
    // rounding residue that shows up as a tiny positive variance.
    if (!v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); }))
        return {v.front() - shift, 0.0};
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v)
        sum += x - shift;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : v)
        ss += (x - shift - mean) * (x - shift - mean);
    return {mean, v.size() > 1 ? ss / (n - 1) : 0.0};
}

} // namespace

std::string_view model_name(LeakageModel model) {
    switch (model) {
    case LeakageModel::round0_hw:
        return "round0-hw";
    case LeakageModel::round10_hw:
        return "round10-hw";
    case LeakageModel::round10_hd:
        return "round10-hd";
    case LeakageModel::round10_hw_plus_hd:
        return "round10-hw-hd";
    }
    return "round0-hw";
}

LeakageModel parse_leakage_model(std::string_view name) {
    std::string s(name);
    std::replace(s.begin(), s.end(), '_', '-');
    if (s == "round0-hw")
        return LeakageModel::round0_hw;
    if (s == "round10-hw")
        return LeakageModel::round10_hw;
    if (s == "round10-hd")
        return LeakageModel::round10_hd;
    if (s == "round10-hw-hd" || s == "round10-hw-plus-hd" || s == "round10-hw+hd")
        return LeakageModel::round10_hw_plus_hd;
    throw std::invalid_argument("unknown leakage model '" + std::string(name) +
                                "' (expected round0-hw, round10-hw, round10-hd, round10-hw-hd)");
}

Block target_round_key(LeakageModel model, const Block &cipher_key) {
    if (model == LeakageModel::round0_hw)
        return cipher_key;
    return aes::expand_key(cipher_key).round_keys[10];
}

double welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw DegenerateInput("welch_t: each set needs at least two samples");
    const double shift = a.front();
    const MeanVar ma = mean_var(a, shift);
    const MeanVar mb = mean_var(b, shift);
    const double se2 = ma.var / static_cast<double>(a.size()) + mb.var / static_cast<double>(b.size());
    if (!(se2 > 0))
        throw DegenerateInput("welch_t: both sets have zero variance");
    return (ma.mean - mb.mean) / std::sqrt(se2);
}

TvlaResult tvla(const std::vector<NamedTraceSet> &sets) {
    const std::size_t n = sets.size();
    TvlaResult r;
    r.t_scores.assign(n, std::vector<double>(n, 0.0));
    r.degenerate.assign(n, std::vector<bool>(n, false));
    std::vector<std::vector<double>> values;
    std::vector<MeanVar> stats;
    for (const auto &s : sets) {
        if (s.traces.empty())
            throw DegenerateInput("tvla: set '" + s.name + "' is empty");
        r.names.push_back(s.name);
        values.push_back(s.traces.t_deltas());
        stats.push_back(mean_var(values.back()));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            // Two identical constant sets cannot be told apart.
            if (stats[i].var == 0 && stats[j].var == 0 && stats[i].mean == stats[j].mean &&
                values[i].size() > 1 && values[j].size() > 1) {
                r.degenerate[i][j] = r.degenerate[j][i] = true;
                continue;
            }
            const double t = welch_t(values[i], values[j]);
            r.t_scores[i][j] = t;
            r.t_scores[j][i] = -t;
        }
    return r;
}

unsigned hypothetical_time(LeakageModel model, const TimingTrace &trace, unsigned byte_index,
                           std::uint8_t key_guess) {
    if (byte_index >= 16)
        throw std::out_of_range("hypothetical_time: byte index must be < 16");
    if (model == LeakageModel::round0_hw)
        return kHw[trace.plaintext[byte_index] ^ key_guess];
    const std::uint8_t x = inv_sbox()[trace.ciphertext[byte_index] ^ key_guess];
    const std::uint8_t overwritten = trace.ciphertext[last_round_source(byte_index)];
    switch (model) {
    case LeakageModel::round10_hw:
        return kHw[x];
    case LeakageModel::round10_hd:
        return kHw[x ^ overwritten];
    default:
        return kHw[x] + kHw[x ^ overwritten];
    }
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 2)
        return 0.0;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0)
        return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

unsigned key_rank(const std::array<double, 256> &correlations, std::uint8_t true_guess) {
    const double c = correlations[true_guess];
    if (std::all_of(correlations.begin(), correlations.end(), [c](double v) { return v == c; }))
        return kUninformedRank;
    unsigned ahead = 0;
    for (unsigned g = 0; g < 256; ++g)
        if (correlations[g] > c || (correlations[g] == c && g < true_guess))
            ++ahead;
    return ahead + 1;
}

double guessing_entropy(std::span<const unsigned> ranks) {
    double ge = 0.0;
    for (unsigned r : ranks) {
        if (r < 1)
            throw std::invalid_argument("guessing_entropy: ranks are 1-based");
        ge += std::log2(static_cast<double>(r));
    }
    return ge;
}

void CpaAccumulator::add(const TimingTrace &trace) { add(std::span(&trace, 1)); }

void CpaAccumulator::add(std::span<const TimingTrace> traces, unsigned threads) {
    if (traces.empty())
        return;
    if (!have_shift_) {
        shift_ns_ = traces.front().t_delta_ns;
        have_shift_ = true;
    }
    for (const auto &t : traces) {
        const double v = static_cast<double>(t.t_delta_ns - shift_ns_);
        sum_t_ += v;
        sum_tt_ += v * v;
    }
    count_ += traces.size();

    threads = std::clamp(threads, 1u, 16u);
    if (threads == 1) {
        add_bytes(traces, 0, 16);
        return;
    }
    std::vector<std::jthread> pool;
    const unsigned per = (16 + threads - 1) / threads;
    for (unsigned first = 0; first < 16; first += per)
        pool.emplace_back([this, traces, first, per] {
            add_bytes(traces, first, std::min(16u, first + per));
        });
}

void CpaAccumulator::add_bytes(std::span<const TimingTrace> traces, unsigned first,
                               unsigned last) {
    const auto &isb = inv_sbox();
    for (unsigned b = first; b < last; ++b) {
        auto &row = cells_[b];
        const unsigned src = last_round_source(b);
        for (const auto &t : traces) {
            const double v = static_cast<double>(t.t_delta_ns - shift_ns_);
            const std::uint8_t in = model_ == LeakageModel::round0_hw ? t.plaintext[b] : t.ciphertext[b];
            const std::uint8_t prev = t.ciphertext[src];
            for (unsigned g = 0; g < 256; ++g) {
                unsigned h;
                switch (model_) {
                case LeakageModel::round0_hw:
                    h = kHw[in ^ g];
                    break;
                case LeakageModel::round10_hw:
                    h = kHw[isb[in ^ g]];
                    break;
                case LeakageModel::round10_hd:
                    h = kHw[isb[in ^ g] ^ prev];
                    break;
                default: {
                    const std::uint8_t x = isb[in ^ g];
                    h = kHw[x] + kHw[x ^ prev];
                }
                }
                Cell &cell = row[g];
                cell.sum_h += h;
                cell.sum_hh += h * h;
                cell.sum_th += v * h;
            }
        }
    }
}

CpaResult CpaAccumulator::result(const std::optional<Block> &cipher_key) const {
    CpaResult r;
    r.model = model_;
    r.trace_count = count_;
    const double n = static_cast<double>(count_);
    const double var_t = n * sum_tt_ - sum_t_ * sum_t_;
    for (unsigned b = 0; b < 16; ++b) {
        for (unsigned g = 0; g < 256; ++g) {
            const Cell &c = cells_[b][g];
            const double var_h = static_cast<double>(static_cast<std::int64_t>(count_) * c.sum_hh -
                                                     c.sum_h * c.sum_h);
            double corr = 0.0;
            if (count_ < 2 || !(var_t > 0) || !(var_h > 0)) {
                ++r.degenerate_cells;
            } else {
                const double cov = n * c.sum_th - sum_t_ * static_cast<double>(c.sum_h);
                corr = std::clamp(cov / std::sqrt(var_t * var_h), -1.0, 1.0);
            }
            r.correlations[b][g] = corr;
        }
        const auto &col = r.correlations[b];
        r.best_guess[b] =
            static_cast<std::uint8_t>(std::max_element(col.begin(), col.end()) - col.begin());
    }
    if (cipher_key) {
        const Block target = target_round_key(model_, *cipher_key);
        std::array<unsigned, 16> ranks{};
        for (unsigned b = 0; b < 16; ++b)
            ranks[b] = key_rank(r.correlations[b], target[b]);
        r.true_round_key = target;
        r.ranks = ranks;
        r.ge = guessing_entropy(ranks);
    }
    return r;
}

CpaResult cpa(const TraceSet &ts, LeakageModel model, const std::optional<Block> &cipher_key,
              unsigned threads) {
    if (ts.size() < 2)
        throw DegenerateInput("cpa: need at least two traces");
    CpaAccumulator acc(model);
    acc.add(ts.traces, threads);
    return acc.result(cipher_key);
}

std::vector<std::pair<std::size_t, double>>
ge_curve(const TraceSet &ts, LeakageModel model, const Block &cipher_key,
         std::span<const std::size_t> checkpoints, unsigned threads) {
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] > ts.size())
            throw std::invalid_argument("ge_curve: checkpoint " + std::to_string(checkpoints[i]) +
                                        " exceeds trace count " + std::to_string(ts.size()));
        if (i > 0 && checkpoints[i] < checkpoints[i - 1])
            throw std::invalid_argument("ge_curve: checkpoints must be ascending");
    }
    std::vector<std::pair<std::size_t, double>> curve;
    CpaAccumulator acc(model);
    std::size_t done = 0;
    for (std::size_t cp : checkpoints) {
        acc.add(std::span(ts.traces).subspan(done, cp - done), threads);
        done = cp;
        curve.emplace_back(cp, *acc.result(cipher_key).ge);
    }
    return curve;
}

std::optional<std::size_t>
traces_to_disclosure(const std::vector<std::pair<std::size_t, double>> &curve) {
    for (const auto &[count, ge] : curve)
        if (ge == 0.0)
            return count;
    return std::nullopt;
}

} // namespace throttlesim
