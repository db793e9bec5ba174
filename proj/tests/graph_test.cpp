#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "reviewchain/graph.hpp"
#include "support.hpp"

namespace reviewchain {
namespace {

using testing::error_of;
using testing::World;

ManuscriptId mid(int n) { return ManuscriptId::from_bytes(sha256("m" + std::to_string(n)).bytes); }

Hash32 leaf(const ManuscriptId& id) {
  return Hasher().update(Bytes{0x00}).update(id).finish();
}

TEST(Merkle, EmptyAndSingletonRoots) {
  EXPECT_EQ(merkle_root({}), sha256(""));
  EXPECT_EQ(merkle_root({mid(1)}), leaf(mid(1)));
}

TEST(Merkle, TwoAndThreeLeafShapes) {
  std::vector<Hash32> l{leaf(mid(1)), leaf(mid(2)), leaf(mid(3))};
  std::sort(l.begin(), l.end());
  auto inner = [](const Hash32& a, const Hash32& b) {
    return Hasher().update(Bytes{0x01}).update(a).update(b).finish();
  };
  EXPECT_EQ(merkle_root({mid(1), mid(2)}), (leaf(mid(1)) < leaf(mid(2))
                                                ? inner(leaf(mid(1)), leaf(mid(2)))
                                                : inner(leaf(mid(2)), leaf(mid(1)))));
  // Odd level duplicates its last node.
  EXPECT_EQ(merkle_root({mid(3), mid(1), mid(2)}), inner(inner(l[0], l[1]), inner(l[2], l[2])));
}

TEST(Merkle, AllOrderingsOfFiveCitationsAgree) {
  std::vector<ManuscriptId> ids{mid(1), mid(2), mid(3), mid(4), mid(5)};
  std::sort(ids.begin(), ids.end());
  const auto root = merkle_root(ids);
  int perms = 0;
  do {
    ASSERT_EQ(merkle_root(ids), root);
    ++perms;
  } while (std::next_permutation(ids.begin(), ids.end()));
  EXPECT_EQ(perms, 120);
}

TEST(PublicationGraph, GenesisOnlyOnce) {
  PublicationGraph g;
  const auto& genesis = g.init_genesis(sha256("g"), 0);
  EXPECT_TRUE(genesis.genesis);
  EXPECT_EQ(genesis.state, NodeState::Confirmed);
  EXPECT_EQ(error_of([&] { g.init_genesis(sha256("g"), 0); }), ErrorCode::GenesisExists);
}

TEST(PublicationGraph, TwoAuthorSubmission) {
  World w;
  auto a = w.user("a"), b = w.user("b");
  auto m = w.submit({{a, Rational(3, 5)}, {b, Rational(2, 5)}});
  const auto& n = w.node(m);
  EXPECT_EQ(n.state, NodeState::UnderReview);
  EXPECT_EQ(n.meta.version, 1u);
  EXPECT_EQ(n.citations, std::vector<ManuscriptId>{w.node(0).id});
  EXPECT_EQ(n.authorship.author_stake, 100u);
  EXPECT_EQ(n.id, canonical_hash(n));
}

TEST(PublicationGraph, SubmissionChecks) {
  World w;
  auto a = w.user("a"), b = w.user("b");
  auto m1 = w.submit({{a, Rational{1}}});
  EXPECT_EQ(error_of([&] { w.submit({{b, Rational{1}}}, {m1}); }), ErrorCode::UnconfirmedCitation);
  a = w.user("c");
  b = w.user("d");
  auto c = w.authorship({{a, Rational(3, 5)}, {b, Rational(2, 5)}});
  EXPECT_EQ(error_of([&] { w.submit_with({{a, Rational(1, 2)}, {b, Rational(2, 5)}}, c); }),
            ErrorCode::SharesDontSumToOne);
  EXPECT_EQ(error_of([&] { w.submit_with({{a, Rational(3, 5)}, {b, Rational(2, 5)}}, c, {}); }),
            ErrorCode::NoCitations);
  // The failed attempts left no trace, so the contract is still usable.
  EXPECT_NO_THROW(w.submit_with({{a, Rational(3, 5)}, {b, Rational(2, 5)}}, c));
}

TEST(PublicationGraph, IdenticalComponentsHashIdenticallyAndOneCharacterChangesIt) {
  World w;
  auto a = w.user("a"), r = w.user("r");
  auto m = w.submit({{a, Rational{1}}});
  w.review_contract(m, r);
  w.review(m, r, Verdict::Revise);
  auto copy = w.node(m);
  EXPECT_EQ(canonical_hash(copy), w.node(m).id);
  copy.confirmations[0].report[0] ^= 0x01;
  EXPECT_NE(canonical_hash(copy), w.node(m).id);
}

TEST(PublicationGraph, RevisionResetsTheTally) {
  World w;
  auto a = w.user("a"), r1 = w.user("r1"), r2 = w.user("r2");
  auto m = w.submit({{a, Rational{1}}});
  w.review_contract(m, r1);
  w.review_contract(m, r2);
  w.review(m, r1);
  ASSERT_EQ(tally_confirmations(w.node(m)), 1u);
  const auto old_id = w.node(m).id;
  w.eco.revise(m, ReviseArgs{sha256("v2"), {}, {}, {}, {}});
  EXPECT_EQ(w.node(m).meta.version, 2u);
  EXPECT_NE(w.node(m).id, old_id);
  EXPECT_EQ(tally_confirmations(w.node(m)), 0u);
  // Independent count: records whose verdict is Confirm for the live version.
  auto live = std::count_if(w.node(m).confirmations.begin(), w.node(m).confirmations.end(),
                            [&](const ReviewRecord& r) {
                              return r.verdict == Verdict::Confirm &&
                                     r.version_signed == w.node(m).meta.version;
                            });
  EXPECT_EQ(live, 0);
}

TEST(PublicationGraph, ConfirmedNodesAreLocked) {
  World w;
  auto a = w.user("a"), r1 = w.user("r1"), r2 = w.user("r2"), f = w.user("f");
  auto m = w.submit({{a, Rational{1}}});
  w.review_contract(m, r1);
  w.review_contract(m, r2);
  w.review(m, r1);
  w.review(m, r2);
  ASSERT_EQ(w.node(m).state, NodeState::Confirmed);
  EXPECT_EQ(error_of([&] { w.eco.revise(m, ReviseArgs{sha256("v2"), {}, {}, {}, {}}); }),
            ErrorCode::LockedManuscript);
  auto fund = w.funding(f, 10);
  EXPECT_EQ(error_of([&] { w.eco.attach_remark(m, f, fund, RemarkKind::Funding); }),
            ErrorCode::LockedManuscript);
  EXPECT_EQ(error_of([&] { w.review(m, r1); }), ErrorCode::NotUnderReview);
}

TEST(PublicationGraph, AuthorsCannotReview) {
  World w;
  auto a = w.user("a"), b = w.user("b");
  auto m = w.submit({{a, Rational(1, 2)}, {b, Rational(1, 2)}});
  EXPECT_EQ(error_of([&] { w.review_contract(m, b); }), ErrorCode::ReviewerIsAuthor);
}

TEST(PublicationGraph, ReviseThenConfirmCountsOnce) {
  World w;
  auto a = w.user("a"), r = w.user("r");
  auto m = w.submit({{a, Rational{1}}});
  w.review_contract(m, r);
  w.review(m, r, Verdict::Revise);
  w.review(m, r, Verdict::Confirm);
  EXPECT_EQ(w.node(m).confirmations.size(), 2u);
  EXPECT_EQ(tally_confirmations(w.node(m)), 1u);
  EXPECT_EQ(w.node(m).state, NodeState::UnderReview);
}

TEST(PublicationGraph, RemarkStakesAdd) {
  World w;
  auto a = w.user("a"), f1 = w.user("f1"), f2 = w.user("f2");
  auto m = w.submit({{a, Rational{1}}});
  w.eco.attach_remark(m, f1, w.funding(f1, 50), RemarkKind::Funding);
  EXPECT_EQ(w.node(m).remarks.size(), 1u);
  w.eco.attach_remark(m, f2, w.funding(f2, 30), RemarkKind::Proofreading);
  EXPECT_EQ(w.node(m).remark_pool(), 80u);
}

TEST(PublicationGraph, VerifyNodeFlagsTamperedReport) {
  World w;
  auto a = w.user("a"), r = w.user("r");
  auto m = w.submit({{a, Rational{1}}});
  w.review_contract(m, r);
  w.review(m, r, Verdict::Revise);
  PublicationGraph g = w.eco.graph();
  const auto& keys = w.eco.ledger().registry();
  EXPECT_TRUE(verify_node(g.node(m), g, keys).ok());
  g.mutable_nodes_for_testing()[m].confirmations[0].report += ".";
  auto report = verify_node(g.node(m), g, keys);
  ASSERT_FALSE(report.ok());
  EXPECT_NE(report.violations.front().find("id"), std::string::npos);
}

TEST(PublicationGraph, NodeLinkRoundTripsExactly) {
  auto run = testing::run_bundled("two-papers.scn");
  const auto text = run.eco.graph().export_nodelink();
  auto parsed = PublicationGraph::parse_nodelink(text);
  EXPECT_EQ(parsed.export_nodelink(), text);
  EXPECT_EQ(parsed.nodes(), run.eco.graph().nodes());
  auto broken = text;
  broken.insert(broken.find('{') + 1, " ");
  EXPECT_EQ(error_of([&] { PublicationGraph::parse_nodelink(broken); }), ErrorCode::ParseError);
}

/// Depth-first cycle detection over the exported edge list.
bool has_cycle(const std::vector<std::pair<ManuscriptId, ManuscriptId>>& edges) {
  std::map<ManuscriptId, std::vector<ManuscriptId>> out;
  for (const auto& [from, to] : edges) out[from].push_back(to);
  std::map<ManuscriptId, int> color;
  std::function<bool(const ManuscriptId&)> visit = [&](const ManuscriptId& v) {
    color[v] = 1;
    for (const auto& n : out[v]) {
      if (color[n] == 1) return true;
      if (color[n] == 0 && visit(n)) return true;
    }
    color[v] = 2;
    return false;
  };
  for (const auto& [v, _] : out) {
    if (color[v] == 0 && visit(v)) return true;
  }
  return false;
}

TEST(PublicationGraph, RandomFiftyNodeGraphVerifiesAndIsAcyclic) {
  PolicyConfig policy;
  policy.K = 1;
  policy.author_stake = 2;
  policy.reviewer_stake = 1;
  World w(policy, 77);
  std::vector<Address> users;
  for (int i = 0; i < 8; ++i) users.push_back(w.user("u" + std::to_string(i)));
  ScenarioRng rng(5);
  std::vector<ManuscriptKey> confirmed{0};
  while (w.eco.graph().nodes().size() < 50) {
    auto author = users[rng.uniform(users.size())];
    std::set<ManuscriptKey> cites;
    for (auto n = 1 + rng.uniform(3); n > 0; --n) cites.insert(confirmed[rng.uniform(confirmed.size())]);
    auto m = w.submit({{author, Rational{1}}}, {cites.begin(), cites.end()});
    if (rng.uniform(4) == 0) continue;  // leave some under review
    auto reviewer = users[rng.uniform(users.size())];
    if (reviewer == author) continue;
    w.review_contract(m, reviewer);
    w.review(m, reviewer);
    confirmed.push_back(m);
  }
  auto report = w.eco.verify();
  EXPECT_TRUE(report.ok()) << report.violations.front();
  EXPECT_FALSE(has_cycle(w.eco.graph().edges()));
  EXPECT_EQ(w.circulating(), policy.total_supply);
}

TEST(PublicationGraph, VerifyGraphReportsCycles) {
  World w;
  auto a = w.user("a"), r = w.user("r");
  auto m = w.submit({{a, Rational{1}}});
  w.review_contract(m, r);
  w.review(m, r);
  PublicationGraph g = w.eco.graph();
  // Make genesis cite m: a two-node cycle.
  auto& nodes = g.mutable_nodes_for_testing();
  nodes[0].citations = {nodes[m].id};
  EXPECT_FALSE(verify_graph(g, w.eco.ledger().registry()).ok());
}

}  // namespace
}  // namespace reviewchain
