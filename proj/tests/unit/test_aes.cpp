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
#include "throttlesim/aes.hpp"
#include "throttlesim/rng.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace throttlesim;

namespace {

struct Kat {
    const char *key, *plaintext, *ciphertext;
};

// Known answers: FIPS-197 Appendix C.1 and B, the SP 800-38A ECB vector,
// and the all-zero block.
const Kat kKats[] = {
    {"000102030405060708090a0b0c0d0e0f", "00112233445566778899aabbccddeeff",
     "69c4e0d86a7b0430d8cdb78070b4c55a"},
    {"2b7e151628aed2a6abf7158809cf4f3c", "3243f6a8885a308d313198a2e0370734",
     "3925841d02dc09fbdc118597196a0b32"},
    {"2b7e151628aed2a6abf7158809cf4f3c", "6bc1bee22e409f96e93d7e117393172a",
     "3ad77bb40d7a3660a89ecaf32466ef97"},
    {"00000000000000000000000000000000", "00000000000000000000000000000000",
     "66e94bd4ef8a2c3b884cfa59ca342b2e"},
};

Block random_block(Rng &rng) {
    Block b;
    for (auto &v : b.bytes)
        v = static_cast<std::uint8_t>(rng());
    return b;
}

} // namespace

TEST(Aes, KnownAnswers) {
    for (const auto &kat : kKats) {
        const Block ct = aes::encrypt_block(Block::from_hex(kat.plaintext), Block::from_hex(kat.key));
        EXPECT_EQ(ct.to_hex(), kat.ciphertext) << kat.key;
    }
}

TEST(Aes, KeyExpansion) {
    const KeySchedule ks = aes::expand_key(Block::from_hex("000102030405060708090a0b0c0d0e0f"));
    const char *expected[11] = {
        "000102030405060708090a0b0c0d0e0f", "d6aa74fdd2af72fadaa678f1d6ab76fe",
        "b692cf0b643dbdf1be9bc5006830b3fe", "b6ff744ed2c2c9bf6c590cbf0469bf41",
        "47f7f7bc95353e03f96c32bcfd058dfd", "3caaa3e8a99f9deb50f3af57adf622aa",
        "5e390f7df7a69296a7553dc10aa31f6b", "14f9701ae35fe28c440adf4d4ea9c026",
        "47438735a41c65b9e016baf4aebf7ad2", "549932d1f08557681093ed9cbe2c974e",
        "13111d7fe3944a17f307a78b4d2b30c5"};
    for (int r = 0; r < 11; ++r)
        EXPECT_EQ(ks.round_keys[r].to_hex(), expected[r]) << "round " << r;

    const KeySchedule zero = aes::expand_key(Block{});
    EXPECT_EQ(zero.round_keys[1].to_hex(), "62636363626363636263636362636363");
    EXPECT_EQ(zero.round_keys[10].to_hex(), "b4ef5bcb3e92e21123e951cf6f8f188e");
    EXPECT_EQ(aes::expand_key(Block::from_hex("2b7e151628aed2a6abf7158809cf4f3c"))
                  .round_keys[10]
                  .to_hex(),
              "d014f9a8c9ee2589e13f0cc8b6630ca6");
}

TEST(Aes, SboxSpotValues) {
    EXPECT_EQ(aes::sbox(0x00), 0x63);
    EXPECT_EQ(aes::sbox(0x53), 0xed);
    EXPECT_EQ(aes::sbox(0xff), 0x16);
    std::vector<bool> seen(256, false);
    for (unsigned x = 0; x < 256; ++x)
        seen[aes::sbox(static_cast<std::uint8_t>(x))] = true;
    EXPECT_EQ(std::count(seen.begin(), seen.end(), true), 256);
}

TEST(Aes, RoundTripThousandBlocks) {
    Rng rng = make_rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const Block key = random_block(rng);
        const Block pt = random_block(rng);
        const KeySchedule ks = aes::expand_key(key);
        const Block ct = aes::encrypt(pt, ks).ciphertext();
        ASSERT_EQ(oracle::decrypt(ct, ks), pt) << "block " << i;
    }
}

TEST(Aes, RoundStatesAreConsistent) {
    const Block key = Block::from_hex("000102030405060708090a0b0c0d0e0f");
    const Block pt = Block::from_hex("00112233445566778899aabbccddeeff");
    const KeySchedule ks = aes::expand_key(key);
    const RoundStates st = aes::encrypt(pt, ks);
    EXPECT_EQ(st.plaintext(), pt);
    EXPECT_EQ(st.initial_add_round_key(), pt ^ key);
    EXPECT_EQ(st.ciphertext().to_hex(), "69c4e0d86a7b0430d8cdb78070b4c55a");
    // FIPS-197 C.1: start of round 10 is bd6e7c3df2b5779e0b61216e8b10b689.
    EXPECT_EQ(st.last_round_input().to_hex(), "bd6e7c3df2b5779e0b61216e8b10b689");
}

TEST(Aes, HexParsing) {
    EXPECT_EQ(Block::from_hex("000102030405060708090A0B0C0D0E0F").to_hex(),
              "000102030405060708090a0b0c0d0e0f");
    EXPECT_THROW(Block::from_hex("00"), std::invalid_argument);
    EXPECT_THROW(Block::from_hex("zz0102030405060708090a0b0c0d0e0f"), std::invalid_argument);
}

TEST(Hamming, WeightAndDistance) {
    static_assert(hamming_weight(std::uint8_t{0xff}) == 8);
    static_assert(hamming_weight(Block::filled(0xff)) == 128);
    static_assert(hamming_distance(std::uint8_t{0x0f}, std::uint8_t{0xf0}) == 8);
    EXPECT_EQ(hamming_weight(Block{}), 0u);
    EXPECT_EQ(hamming_distance(Block{}, Block::filled(0x01)), 16u);

    const std::uint8_t a[] = {0x00, 0xff, 0x0f};
    const std::uint8_t b[] = {0x01, 0xff, 0xf0};
    EXPECT_EQ(hamming_distance(std::span<const std::uint8_t>(a), std::span<const std::uint8_t>(b)),
              9u);
    EXPECT_THROW(hamming_distance(std::span<const std::uint8_t>(a, 2),
                                  std::span<const std::uint8_t>(b)),
                 std::invalid_argument);
}

TEST(Hamming, SymmetryAndTriangleInequality) {
    Rng rng = make_rng(5);
    for (int i = 0; i < 200; ++i) {
        const Block x = random_block(rng), y = random_block(rng), z = random_block(rng);
        EXPECT_EQ(hamming_distance(x, y), hamming_distance(y, x));
        EXPECT_EQ(hamming_distance(x, x), 0u);
        EXPECT_LE(hamming_distance(x, z), hamming_distance(x, y) + hamming_distance(y, z));
        EXPECT_EQ(hamming_weight(x) + hamming_weight(~x), 128u);
    }
}
