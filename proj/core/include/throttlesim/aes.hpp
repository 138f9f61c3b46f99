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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace throttlesim {

/// One 128-bit AES block (plaintext, key, state or ciphertext). Bytes are
/// in FIPS-197 input order, i.e. byte i sits at row i % 4, column i / 4.
struct Block {
    std::array<std::uint8_t, 16> bytes{};

    constexpr std::uint8_t &operator[](std::size_t i) { return bytes[i]; }
    constexpr std::uint8_t operator[](std::size_t i) const { return bytes[i]; }

    friend constexpr bool operator==(const Block &, const Block &) = default;

    friend constexpr Block operator^(const Block &a, const Block &b) {
        Block r;
        for (std::size_t i = 0; i < 16; ++i)
            r.bytes[i] = a.bytes[i] ^ b.bytes[i];
        return r;
    }
    friend constexpr Block operator~(const Block &a) {
        Block r;
        for (std::size_t i = 0; i < 16; ++i)
            r.bytes[i] = static_cast<std::uint8_t>(~a.bytes[i]);
        return r;
    }

    static constexpr Block filled(std::uint8_t v) {
        Block r;
        r.bytes.fill(v);
        return r;
    }

    /// Parses exactly 32 hex digits (either case). Throws
    /// std::invalid_argument otherwise.
    static Block from_hex(std::string_view hex);
    /// 32 lowercase hex digits.
    std::string to_hex() const;
};

struct KeySchedule {
    std::array<Block, 11> round_keys{};
};

/// Every state the cipher passes through: [0] plaintext, [1] after the
/// initial AddRoundKey, [2..10] after rounds 1..9 (so [10] is the input
/// of the last round), [11] ciphertext.
struct RoundStates {
    std::array<Block, 12> states{};

    const Block &plaintext() const { return states[0]; }
    const Block &initial_add_round_key() const { return states[1]; }
    const Block &last_round_input() const { return states[10]; }
    const Block &ciphertext() const { return states[11]; }
};

namespace aes {

/// The forward S-box.
std::uint8_t sbox(std::uint8_t x);

/// FIPS-197 KeyExpansion for AES-128.
KeySchedule expand_key(const Block &key);

/// Reference AES-128 encryption returning all intermediate states.
RoundStates encrypt(const Block &plaintext, const KeySchedule &schedule);

/// Convenience: ciphertext only.
Block encrypt_block(const Block &plaintext, const Block &key);

} // namespace aes

constexpr unsigned hamming_weight(std::uint8_t v) {
    unsigned n = 0;
    for (; v != 0; v &= static_cast<std::uint8_t>(v - 1))
        ++n;
    return n;
}

constexpr unsigned hamming_weight(const Block &b) {
    unsigned n = 0;
    for (auto v : b.bytes)
        n += hamming_weight(v);
    return n;
}

constexpr unsigned hamming_distance(std::uint8_t a, std::uint8_t b) {
    return hamming_weight(static_cast<std::uint8_t>(a ^ b));
}

constexpr unsigned hamming_distance(const Block &a, const Block &b) {
    return hamming_weight(a ^ b);
}

/// Runtime-width variant: both spans must have the same length, otherwise
/// std::invalid_argument is thrown.
unsigned hamming_distance(std::span<const std::uint8_t> a,
                          std::span<const std::uint8_t> b);

} // namespace throttlesim
