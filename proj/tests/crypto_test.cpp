#include <gtest/gtest.h>

#include <set>

#include "reviewchain/crypto.hpp"
#include "reviewchain/rational.hpp"
#include "reviewchain/text.hpp"
#include "support.hpp"

namespace reviewchain {
namespace {

using testing::error_of;
using testing::test_key;

TEST(Hex, RoundTripsAndRejectsNonCanonicalSpellings) {
  Bytes raw{0x00, 0x7f, 0xab, 0xff};
  EXPECT_EQ(to_hex(raw), "007fabff");
  EXPECT_EQ(from_hex("007fabff"), raw);
  EXPECT_EQ(error_of([] { from_hex("abc"); }), ErrorCode::ParseError);
  EXPECT_EQ(error_of([] { from_hex("AB"); }), ErrorCode::ParseError);
  EXPECT_EQ(error_of([] { from_hex("zz"); }), ErrorCode::ParseError);
}

TEST(Sha256, MatchesPublishedVectors) {
  EXPECT_EQ(sha256("abc").hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256("").hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  // Incremental hashing agrees with one-shot hashing.
  EXPECT_EQ(Hasher().update("ab").update("c").finish(), sha256("abc"));
}

TEST(KeyPair, SignatureVerifiesAndFlippedBitFails) {
  auto kp = test_key("alice");
  Bytes msg{'h', 'e', 'l', 'l', 'o'};
  auto sig = kp.sign(msg);
  EXPECT_TRUE(verify_signature(kp.public_key(), msg, sig));
  msg[0] ^= 0x01;
  EXPECT_FALSE(verify_signature(kp.public_key(), msg, sig));
}

TEST(KeyPair, SigningIsDeterministic) {
  auto a = test_key("k");
  auto b = test_key("k");
  Bytes msg{1, 2, 3};
  EXPECT_EQ(a.public_key(), b.public_key());
  EXPECT_EQ(a.sign(msg), b.sign(msg));
  EXPECT_EQ(a.address(), address_of(a.public_key()));
}

TEST(KeyPair, HundredRandomPairsRoundTrip) {
  ScenarioRng rng(99);
  std::set<Address> addresses;
  for (int i = 0; i < 100; ++i) {
    auto kp = KeyPair::from_seed(rng.next());
    auto m = rng.next();
    Bytes msg(m.bytes.begin(), m.bytes.begin() + static_cast<long>(rng.uniform(32) + 1));
    EXPECT_TRUE(verify_signature(kp.public_key(), msg, kp.sign(msg)));
    addresses.insert(kp.address());
  }
  EXPECT_EQ(addresses.size(), 100u);
}

TEST(ScenarioRng, IsACounterStreamOverTheSeed) {
  ScenarioRng a(5), b(5), c(6);
  auto first = a.next();
  EXPECT_EQ(first, b.next());
  EXPECT_NE(first, c.next());
  // Draw i is a pure function of (seed, i).
  auto expected = Hasher().update("scenario-rng").update_u64(5).update_u64(1).finish();
  EXPECT_EQ(a.next(), expected);
  EXPECT_EQ(a.counter(), 2u);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(a.uniform(7), 7u);
}

TEST(CanonicalRecord, FieldOrderIsIrrelevantAndLayoutIsFixed) {
  auto x = CanonicalRecord().put_u64("b", 2).put("a", "x").encode();
  auto y = CanonicalRecord().put("a", "x").put_u64("b", 2).encode();
  EXPECT_EQ(x, y);
  // u32 len("a") "a" u32 len("x") "x" u32 len("b") "b" u32 8 <u64 2>
  Bytes expected{0, 0, 0, 1, 'a', 0, 0, 0, 1, 'x', 0, 0, 0, 1, 'b', 0, 0, 0, 8,
                 0, 0, 0, 0, 0, 0, 0, 2};
  EXPECT_EQ(x, expected);
  EXPECT_EQ(error_of([] { CanonicalRecord().put("a", "1").put("a", "2").encode(); }),
            ErrorCode::MalformedComponent);
}

TEST(Rational, ParsesFractionsAndDecimals) {
  EXPECT_EQ(parse_rational("3/5"), Rational(3, 5));
  EXPECT_EQ(parse_rational("0.6"), Rational(3, 5));
  EXPECT_EQ(parse_rational("1"), Rational(1));
  EXPECT_EQ(format_rational(Rational(6, 10)), "3/5");
  EXPECT_EQ(format_rational(Rational(2)), "2");
  EXPECT_EQ(error_of([] { parse_rational("1/0"); }), ErrorCode::ParseError);
  EXPECT_EQ(error_of([] { parse_rational("x"); }), ErrorCode::ParseError);
}

TEST(Rational, FloorMulUsesWideIntermediates) {
  EXPECT_EQ(floor_mul(100, Rational(5, 8) * Rational(3, 5)), 37u);
  EXPECT_EQ(floor_mul(1'000'000'000'000ull, Rational(999'999'999, 1'000'000'000)),
            999'999'999'000ull);
  EXPECT_EQ(floor_mul(7, Rational(0)), 0u);
}

TEST(Text, TokenizerHandlesQuotesAndComments) {
  auto t = tokenize(R"(cmd name="Ada \"L\"" k=v # trailing)");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[1], "name=Ada \"L\"");
  EXPECT_EQ(error_of([] { tokenize("a \"open"); }), ErrorCode::ParseError);
  EXPECT_EQ(split_list("a,b,,c").size(), 4u);
  EXPECT_TRUE(split_list("").empty());
}

}  // namespace
}  // namespace reviewchain
