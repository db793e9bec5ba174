#include <gtest/gtest.h>

#include <map>

#include "reviewchain/contracts.hpp"
#include "support.hpp"

namespace reviewchain {
namespace {

using testing::error_of;
using testing::World;

constexpr ContractState kStates[] = {ContractState::Proposed, ContractState::Signed,
                                     ContractState::Active,   ContractState::Locked,
                                     ContractState::Settled,  ContractState::Cancelled};
constexpr ContractAction kActions[] = {ContractAction::SignPartial, ContractAction::SignFinal,
                                       ContractAction::Cancel, ContractAction::Lock,
                                       ContractAction::Settle};

TEST(ContractStateMachine, OnlyTheLifecycleEdgesExist) {
  using S = ContractState;
  // Allowed edges, written out by hand.
  const std::set<std::pair<S, S>> allowed{
      {S::Proposed, S::Signed}, {S::Proposed, S::Active}, {S::Proposed, S::Cancelled},
      {S::Signed, S::Signed},   {S::Signed, S::Active},   {S::Signed, S::Cancelled},
      {S::Active, S::Locked},   {S::Active, S::Cancelled}, {S::Locked, S::Settled}};
  int accepted = 0;
  for (auto s : kStates) {
    for (auto a : kActions) {
      auto next = next_state(s, a);
      if (!next) continue;
      ++accepted;
      EXPECT_TRUE(allowed.contains({s, *next}))
          << to_string(s) << " --" << to_string(a) << "--> " << to_string(*next);
    }
  }
  EXPECT_EQ(accepted, 9);
  for (auto a : kActions) {
    EXPECT_FALSE(next_state(S::Settled, a));
    EXPECT_FALSE(next_state(S::Cancelled, a));
  }
}

TEST(ContractBook, ProposeValidatesPartiesAndShares) {
  World w;
  auto a = w.user("a"), b = w.user("b");
  auto id = w.authorship({{a, Rational(3, 5)}, {b, Rational(2, 5)}}, 100, std::nullopt, false);
  EXPECT_EQ(w.eco.contracts().get(id).state, ContractState::Proposed);

  auto c = w.user("c");
  auto m = w.submit({{a, Rational{1}}});
  ProposeRequest two;
  two.kind = ContractKind::Review;
  two.parties = {b, c};
  two.shares = {{b, Rational(1, 2)}, {c, Rational(1, 2)}};
  two.stake_required = 10;
  two.manuscript = m;
  two.terms = ReviewTerms{};
  EXPECT_EQ(error_of([&] { w.eco.propose_contract(two); }), ErrorCode::InvalidShares);

  ProposeRequest stranger = two;
  stranger.parties = {testing::test_key("nobody").address()};
  stranger.shares = {{stranger.parties[0], Rational{1}}};
  EXPECT_EQ(error_of([&] { w.eco.propose_contract(stranger); }), ErrorCode::UnknownParty);
}

TEST(ContractBook, FundingTermsAreStored) {
  World w;
  auto a = w.user("a"), f = w.user("f");
  auto target = w.authorship({{a, Rational{1}}}, 100, std::nullopt, false);
  auto id = w.funding(f, 0, Rational(1, 5), target, Rational(1, 2), false);
  const auto& c = w.eco.contracts().get(id);
  EXPECT_EQ(c.state, ContractState::Proposed);
  const auto& t = std::get<FundingTerms>(c.terms);
  EXPECT_EQ(t.covered_fraction, Rational(1, 2));
  EXPECT_EQ(t.clawback_share, Rational(1, 5));
  EXPECT_EQ(t.target, target);
}

TEST(ContractBook, AuthorsActivateOnceAllSignedAndStaked) {
  World w;
  auto a = w.user("a"), b = w.user("b");
  auto id = w.authorship({{a, Rational(3, 5)}, {b, Rational(2, 5)}}, 100, std::nullopt, false);
  w.eco.sign_contract(id, a);
  EXPECT_EQ(w.eco.contracts().get(id).state, ContractState::Signed);
  w.eco.sign_contract(id, b);
  EXPECT_EQ(w.eco.contracts().get(id).state, ContractState::Active);
  EXPECT_EQ(w.balance(a).escrowed, 60u);
  EXPECT_EQ(w.balance(b).escrowed, 40u);
  EXPECT_EQ(error_of([&] { w.eco.sign_contract(id, a); }), ErrorCode::AlreadyActive);
}

TEST(ContractBook, UnderfundedReviewerStaysProposed) {
  World w;
  auto a = w.user("a"), r = w.user("r");
  auto m = w.submit({{a, Rational{1}}});
  w.funding(r, w.spendable(r) - 5);  // leaves spendable 5
  ASSERT_EQ(w.spendable(r), 5u);
  auto id = w.review_contract(m, r, false);
  const auto before = w.eco.ledger().export_text();
  EXPECT_EQ(error_of([&] { w.eco.sign_contract(id, r); }), ErrorCode::InsufficientFunds);
  EXPECT_EQ(w.eco.contracts().get(id).state, ContractState::Proposed);
  EXPECT_EQ(w.eco.ledger().export_text(), before);
}

TEST(ContractBook, CoveringFundingSplitsTheAuthorStake) {
  World w;
  auto a = w.user("a"), f = w.user("f");
  const auto supply = w.circulating();
  auto target = w.authorship({{a, Rational{1}}}, 100, std::nullopt, false);
  w.funding(f, 0, Rational{0}, target, Rational(1, 2));
  w.eco.sign_contract(target, a);
  EXPECT_EQ(w.balance(f).escrowed, 50u);
  EXPECT_EQ(w.balance(a).escrowed, 50u);
  EXPECT_EQ(w.circulating(), supply);
  auto m = w.submit_with({{a, Rational{1}}}, target);
  EXPECT_EQ(w.node(m).authorship.author_stake, 100u);
}

TEST(ContractBook, CancelExamples) {
  World w;
  auto a = w.user("a"), r = w.user("r");
  auto m = w.submit({{a, Rational{1}}});

  const auto ledger_before = w.eco.ledger().transactions().size();
  auto proposed = w.review_contract(m, r, false);
  w.eco.cancel_contract(proposed, {r});
  EXPECT_EQ(w.eco.contracts().get(proposed).state, ContractState::Cancelled);
  EXPECT_EQ(w.eco.ledger().transactions().size(), ledger_before);

  const auto spend = w.spendable(r);
  auto active = w.review_contract(m, r);
  EXPECT_EQ(w.spendable(r), spend - 10);
  w.eco.cancel_contract(active, {r});
  EXPECT_EQ(w.balance(r), (Balance{spend, 0}));
  const auto& c = w.eco.contracts().get(active);
  EXPECT_EQ(c.state, ContractState::Cancelled);
  EXPECT_EQ(w.eco.ledger().escrow(c.stakes.at(0).escrow).state, EscrowState::Refunded);
}

TEST(ContractBook, LockedAuthorshipCannotBeCancelled) {
  World w;
  auto a = w.user("a"), r1 = w.user("r1"), r2 = w.user("r2");
  auto m = w.submit({{a, Rational{1}}});
  w.review_contract(m, r1);
  w.review_contract(m, r2);
  w.review(m, r1);
  w.review(m, r2);
  const auto id = w.node(m).authorship.contract;
  EXPECT_NE(w.eco.contracts().get(id).state, ContractState::Active);
  EXPECT_EQ(error_of([&] { w.eco.cancel_contract(id, {a}); }), ErrorCode::AlreadyLocked);
}

/// Manuscript with author stake 100, one engaged review (10) and one remark (50),
/// citing genesis and a confirmed manuscript.
struct Pending {
  World w;
  Address a, b, r, f, x;
  ManuscriptKey m1 = 0, m2 = 0;

  Pending() {
    a = w.user("a");
    b = w.user("b");
    r = w.user("r");
    f = w.user("f");
    x = w.user("x");
    m1 = w.submit({{x, Rational{1}}});
    w.review_contract(m1, r);
    w.review_contract(m1, a);
    w.review(m1, r);
    w.review(m1, a);
    m2 = w.submit({{a, Rational(3, 5)}, {b, Rational(2, 5)}}, {0, m1});
    w.review_contract(m2, r);
    w.review(m2, r, Verdict::Revise);
    w.eco.attach_remark(m2, f, w.funding(f, 50), RemarkKind::Funding);
  }
  std::vector<Contract> bound() const { return w.eco.contracts().bound_to(m2); }
};

std::map<Address, TokenAmount> credited(const std::vector<LedgerInstruction>& ins) {
  std::map<Address, TokenAmount> out;
  for (const auto& i : ins) {
    for (const auto& p : std::get<ReleaseInstruction>(i).payout) out[p.to] += p.amount;
  }
  return out;
}

TEST(ExecuteTrigger, ConfirmationSplitsThePoolAcrossCitations) {
  Pending p;
  const auto treasury = p.w.eco.ledger().treasury();
  ManuscriptConfirmed ev{p.m2, {p.w.node(0).account(), p.w.node(p.m1).account()}, treasury};
  auto contracts = p.bound();
  auto ins = execute_trigger(ev, contracts);
  auto got = credited(ins);
  EXPECT_EQ(got[p.w.node(0).account()], 80u);
  EXPECT_EQ(got[p.w.node(p.m1).account()], 80u);
  EXPECT_EQ(got.count(treasury), 0u);
  // Pure: same input, same output.
  EXPECT_EQ(execute_trigger(ev, contracts), ins);
}

TEST(ExecuteTrigger, WithdrawalRefundsAuthorsByShareAndStakesInFull) {
  Pending p;
  const auto treasury = p.w.eco.ledger().treasury();
  auto ins = execute_trigger(Withdrawn{p.m2, Rational(1, 2), treasury}, p.bound());
  auto got = credited(ins);
  EXPECT_EQ(got[p.a], 30u);
  EXPECT_EQ(got[p.b], 20u);
  EXPECT_EQ(got[treasury], 50u);
  EXPECT_EQ(got[p.r], 10u);
  EXPECT_EQ(got[p.f], 50u);
  TokenAmount total = 0;
  for (const auto& [_, v] : got) total += v;
  EXPECT_EQ(total, 160u);
}

TEST(ExecuteTrigger, WrongManuscriptIsAStateMismatch) {
  Pending p;
  const auto treasury = p.w.eco.ledger().treasury();
  EXPECT_EQ(error_of([&] {
              execute_trigger(Withdrawn{p.m1, Rational(1, 2), treasury}, p.bound());
            }),
            ErrorCode::StateMismatch);
}

TEST(ExecuteTrigger, CitationTransfersSkipTheCitedAccount) {
  Pending p;
  const auto acct = p.w.node(p.m1).account();
  CitationReceived ev{p.m1, acct, p.m2, 10, {{p.r, 6}, {acct, 4}}};
  auto ins = execute_trigger(ev, p.w.eco.contracts().bound_to(p.m1));
  ASSERT_EQ(ins.size(), 1u);
  EXPECT_EQ(std::get<TransferInstruction>(ins[0]).amount, 6u);
  ev.distribution[0].amount = 5;
  EXPECT_EQ(error_of([&] { execute_trigger(ev, p.w.eco.contracts().bound_to(p.m1)); }),
            ErrorCode::PayoutMismatch);
}

}  // namespace
}  // namespace reviewchain
