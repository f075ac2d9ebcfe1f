#include <gtest/gtest.h>

#include <random>

#include "secgate/core/error.hpp"
#include "secgate/core/rng.hpp"
#include "secgate/core/text.hpp"
#include "support.hpp"

using namespace secgate;

TEST(Base64, MatchesReferenceEncoder) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string bytes(rng() % 64, '\0');
    for (auto& c : bytes) c = static_cast<char>(rng() & 0xFF);
    const auto enc = text::base64_encode(bytes);
    EXPECT_EQ(enc, testsupport::oracle_base64(bytes));
    const auto dec = text::base64_decode(enc);
    ASSERT_TRUE(dec.has_value());
    EXPECT_EQ(*dec, bytes);
  }
}

TEST(Base64, KnownVectors) {
  EXPECT_EQ(text::base64_encode("abc"), "YWJj");
  EXPECT_EQ(text::base64_encode("ZX-9471-TOKEN"), "WlgtOTQ3MS1UT0tFTg==");
  EXPECT_EQ(text::base64_encode(""), "");
}

TEST(Base64, DecodeAcceptsMissingPaddingAndRejectsJunk) {
  EXPECT_EQ(text::base64_decode("WlgtOTQ3MS1UT0tFTg").value(), "ZX-9471-TOKEN");
  EXPECT_FALSE(text::base64_decode("WlgtO$Q3").has_value());
  EXPECT_FALSE(text::base64_decode("A").has_value());
}

TEST(Utf8, Validation) {
  EXPECT_TRUE(text::is_valid_utf8("h\xC3\xA9llo \xF0\x9F\x9B\xA1"));
  EXPECT_FALSE(text::is_valid_utf8("\xC3"));
  EXPECT_FALSE(text::is_valid_utf8("\xED\xA0\x80"));  // surrogate
  EXPECT_FALSE(text::is_valid_utf8("\xC0\xAF"));      // overlong
  const auto cps = text::utf8_codepoints("a\xC3\xA9\xE5\x85\x83");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[2], "\xE5\x85\x83");
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(text::sha256_hex("abc", 3),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.below(7);
    EXPECT_EQ(x, b.below(7));
    EXPECT_LT(x, 7u);
  }
  Rng c(3);
  const auto idx = c.sample_indices(10, 10);
  std::vector<bool> seen(10);
  for (auto i : idx) seen[i] = true;
  for (bool s : seen) EXPECT_TRUE(s);
}

TEST(Errors, CodesHaveStableNames) {
  EXPECT_STREQ(to_string(ErrorCode::MalformedReply), "malformed_reply");
  EXPECT_STREQ(to_string(ErrorCode::NotFound), "not_found");
  const CorruptError e(17, "bad");
  EXPECT_EQ(e.offset(), 17u);
  EXPECT_EQ(e.code(), ErrorCode::Corrupt);
}
