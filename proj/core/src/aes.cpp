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

#include <stdexcept>

namespace throttlesim {

namespace {

constexpr std::uint8_t xtime(std::uint8_t a) {
    return static_cast<std::uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1b : 0x00));
}

constexpr std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
    std::uint8_t r = 0;
    while (b) {
        if (b & 1)
            r ^= a;
        a = xtime(a);
        b >>= 1;
    }
    return r;
}

// S-box built from the GF(2^8) inverse and the affine map.
constexpr std::array<std::uint8_t, 256> make_sbox() {
    std::array<std::uint8_t, 256> inverse{};
    for (unsigned a = 1; a < 256; ++a)
        for (unsigned b = 1; b < 256; ++b)
            if (gf_mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)) == 1) {
                inverse[a] = static_cast<std::uint8_t>(b);
                break;
            }
    std::array<std::uint8_t, 256> s{};
    for (unsigned a = 0; a < 256; ++a) {
        const unsigned b = inverse[a];
        unsigned v = b;
        for (unsigned i = 1; i <= 4; ++i)
            v ^= ((b << i) | (b >> (8 - i))) & 0xff;
        s[a] = static_cast<std::uint8_t>(v ^ 0x63);
    }
    return s;
}

constexpr auto kSbox = make_sbox();
static_assert(kSbox[0x00] == 0x63 && kSbox[0x01] == 0x7c && kSbox[0x53] == 0xed);

void sub_bytes(Block &s) {
    for (auto &b : s.bytes)
        b = kSbox[b];
}

// Row r rotates left by r positions.
void shift_rows(Block &s) {
    Block t = s;
    for (unsigned r = 1; r < 4; ++r)
        for (unsigned c = 0; c < 4; ++c)
            s[r + 4 * c] = t[r + 4 * ((c + r) % 4)];
}

void mix_columns(Block &s) {
    for (unsigned c = 0; c < 4; ++c) {
        std::uint8_t *col = &s.bytes[4 * c];
        const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        col[0] = xtime(a0) ^ (xtime(a1) ^ a1) ^ a2 ^ a3;
        col[1] = a0 ^ xtime(a1) ^ (xtime(a2) ^ a2) ^ a3;
        col[2] = a0 ^ a1 ^ xtime(a2) ^ (xtime(a3) ^ a3);
        col[3] = (xtime(a0) ^ a0) ^ a1 ^ a2 ^ xtime(a3);
    }
}

int hex_value(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

Block Block::from_hex(std::string_view hex) {
    if (hex.size() != 32)
        throw std::invalid_argument("block hex must be 32 digits, got " +
                                    std::to_string(hex.size()));
    Block b;
    for (std::size_t i = 0; i < 16; ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("invalid hex digit in block '" + std::string(hex) + "'");
        b.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return b;
}

std::string Block::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(32, '0');
    for (std::size_t i = 0; i < 16; ++i) {
        out[2 * i] = digits[bytes[i] >> 4];
        out[2 * i + 1] = digits[bytes[i] & 0xf];
    }
    return out;
}

namespace aes {

std::uint8_t sbox(std::uint8_t x) { return kSbox[x]; }

KeySchedule expand_key(const Block &key) {
    KeySchedule ks;
    ks.round_keys[0] = key;
    std::uint8_t rcon = 0x01;
    for (unsigned r = 1; r <= 10; ++r) {
        const Block &prev = ks.round_keys[r - 1];
        Block &next = ks.round_keys[r];
        // RotWord + SubWord + Rcon on the last word of the previous key.
        std::array<std::uint8_t, 4> t = {kSbox[prev[13]], kSbox[prev[14]], kSbox[prev[15]],
                                         kSbox[prev[12]]};
        t[0] ^= rcon;
        rcon = xtime(rcon);
        for (unsigned w = 0; w < 4; ++w) {
            for (unsigned i = 0; i < 4; ++i) {
                const std::uint8_t feed = w == 0 ? t[i] : next[4 * (w - 1) + i];
                next[4 * w + i] = prev[4 * w + i] ^ feed;
            }
        }
    }
    return ks;
}

RoundStates encrypt(const Block &plaintext, const KeySchedule &schedule) {
    RoundStates rs;
    rs.states[0] = plaintext;
    Block s = plaintext ^ schedule.round_keys[0];
    rs.states[1] = s;
    for (unsigned r = 1; r <= 9; ++r) {
        sub_bytes(s);
        shift_rows(s);
        mix_columns(s);
        s = s ^ schedule.round_keys[r];
        rs.states[r + 1] = s;
    }
    sub_bytes(s);
    shift_rows(s);
    rs.states[11] = s ^ schedule.round_keys[10];
    return rs;
}

Block encrypt_block(const Block &plaintext, const Block &key) {
    return encrypt(plaintext, expand_key(key)).ciphertext();
}

} // namespace aes

unsigned hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("hamming_distance: width mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    unsigned n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        n += hamming_weight(static_cast<std::uint8_t>(a[i] ^ b[i]));
    return n;
}

} // namespace throttlesim
