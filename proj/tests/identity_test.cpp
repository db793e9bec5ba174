#include <gtest/gtest.h>

#include "reviewchain/identity.hpp"
#include "support.hpp"

namespace reviewchain {
namespace {

using testing::error_of;
using testing::profile;
using testing::World;

struct Pool {
  KeyPair treasury = testing::test_key("treasury");
  Ledger ledger = Ledger::init(1'000'000'000, treasury);
  ScenarioRng rng{42};
  IdentityPool pool;

  const UserAccount& add(const Profile& p) { return pool.create_account(p, ledger, rng); }
};

TEST(IdentityPool, EmptyProfileGetsBaseGift) {
  Pool p;
  const auto& acct = p.add(Profile{});
  EXPECT_EQ(p.ledger.balance_of(acct.address), (Balance{100, 0}));
}

TEST(IdentityPool, NameKeywordsAndOrcidEarnThreeAttributeGrants) {
  Pool p;
  Profile full;
  full.display_name = "Ada";
  full.keywords = {"blockchain"};
  full.scholar_ids = {{"orcid", "0000-0002-1825-0097"}};
  const auto& acct = p.add(full);
  // Base 100 plus 10 per populated attribute.
  EXPECT_EQ(p.ledger.balance_of(acct.address).spendable, 100u + 3 * 10u);
}

TEST(IdentityPool, SameSeedAndOrderGiveSameAddresses) {
  Pool a, b;
  for (int i = 0; i < 5; ++i) {
    auto pr = profile("u" + std::to_string(i));
    EXPECT_EQ(a.add(pr).address, b.add(pr).address);
  }
  EXPECT_EQ(a.ledger.export_text(), b.ledger.export_text());
}

TEST(IdentityPool, MalformedScholarIdIsRejected) {
  Pool p;
  Profile bad;
  bad.scholar_ids = {{"orcid", "12-34"}};
  EXPECT_EQ(error_of([&] { p.add(bad); }), ErrorCode::InvalidProfile);
  EXPECT_TRUE(p.pool.accounts().empty());
}

TEST(IdentityPool, ProfileRecordRoundTrips) {
  auto parsed = Profile::parse_record(
      R"(name="Ada L" keywords=Blockchain,review ids=orcid:0000-0002-1825-0097 roles=author optin=yes)");
  EXPECT_EQ(parsed.display_name, "Ada L");
  EXPECT_EQ(Profile::parse_record(parsed.to_record()), parsed);
  auto norm = parsed.normalized();
  EXPECT_TRUE(norm.keywords.contains("blockchain"));
  EXPECT_TRUE(norm.roles.contains(Role::Reviewer));
  EXPECT_EQ(error_of([] { Profile::parse_record("colour=blue"); }), ErrorCode::ParseError);
}

TEST(IdentityPool, UpdatesNeedTheHolderSignatureAndGrantNothing) {
  Pool p;
  const auto addr = p.add(profile("ann")).address;
  const auto& acct = p.pool.account(addr);
  auto richer = profile("ann", {"blockchain"});
  richer.scholar_ids = {{"orcid", "0000-0002-1825-0097"}};
  const auto before = p.ledger.balance_of(addr);

  auto other = testing::test_key("mallory");
  EXPECT_EQ(error_of([&] {
              p.pool.update_profile(addr, richer,
                                    other.sign(p.pool.profile_update_payload(addr, richer)));
            }),
            ErrorCode::BadSignature);

  for (int i = 0; i < 2; ++i) {
    auto sig = acct.keypair.sign(p.pool.profile_update_payload(addr, richer));
    p.pool.update_profile(addr, richer, sig);
  }
  EXPECT_EQ(p.ledger.balance_of(addr), before);
  EXPECT_TRUE(p.pool.account(addr).profile.keywords.contains("blockchain"));
  // A replayed signature fails once the nonce has moved on.
  auto stale = acct.keypair.sign(p.pool.profile_update_payload(addr, richer));
  p.pool.update_profile(addr, richer, stale);
  EXPECT_EQ(error_of([&] { p.pool.update_profile(addr, richer, stale); }), ErrorCode::BadSignature);
}

/// Re-runs selection over a copy of the pool after the profile update, in
/// the same tick.
TEST(IdentityPool, KeywordAndOptOutUpdatesTakeEffectImmediately) {
  World w;
  auto author = w.user("author");
  auto r1 = w.user("r1");
  auto r2 = w.user("r2");
  auto m = w.submit({{author, Rational{1}}}, {0}, {"blockchain"});
  const auto& node = w.node(m);

  IdentityPool pool = w.eco.identities();
  auto update = [&](const Address& who, const Profile& pr) {
    pool.update_profile(who, pr, pool.account(who).keypair.sign(pool.profile_update_payload(who, pr)));
  };
  update(r2, profile("r2", {"blockchain"}));
  auto picked = select_reviewers(node, pool, w.eco.contracts(), w.eco.policy(), w.eco.seed());
  ASSERT_EQ(picked.size(), 2u);
  EXPECT_EQ(picked.front(), r2);

  update(r2, profile("r2", {"blockchain"}, false));
  picked = select_reviewers(node, pool, w.eco.contracts(), w.eco.policy(), w.eco.seed());
  EXPECT_EQ(picked, std::vector<Address>{r1});
  EXPECT_EQ(w.eco.ledger().tick(), 0u);
}

}  // namespace
}  // namespace reviewchain
