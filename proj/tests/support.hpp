#pragma once

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "reviewchain/ecosystem.hpp"
#include "reviewchain/scenario.hpp"

namespace reviewchain::testing {

inline KeyPair test_key(std::string_view label) { return KeyPair::from_seed(sha256(label)); }

/// Runs `fn` and returns the category it threw; fails the test if it did not throw.
template <typename Fn>
ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::IoError;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string scenario_path(const std::string& name) {
  return std::string(REVIEWCHAIN_SCENARIO_DIR) + "/" + name;
}

inline ScenarioRun run_bundled(const std::string& name, ScenarioOptions options = {}) {
  return run_scenario(ScenarioScript::parse(read_text(scenario_path(name))), options);
}

inline Profile profile(const std::string& name, std::set<std::string> keywords = {},
                       bool reviewer = true) {
  Profile p;
  p.display_name = name;
  p.keywords = std::move(keywords);
  p.reviewer_opt_in = reviewer;
  return p;
}

/// An ecosystem plus shortcuts for the common multi-step flows.
struct World {
  Ecosystem eco;

  explicit World(PolicyConfig policy = {}, std::uint64_t seed = 1) : eco(std::move(policy), seed) {}

  Address user(const std::string& name, std::set<std::string> keywords = {}, bool reviewer = true) {
    return eco.create_user(profile(name, std::move(keywords), reviewer)).address;
  }

  ContractId authorship(const std::vector<AuthorShare>& authors, TokenAmount stake = 0,
                        std::optional<ContractId> venue = std::nullopt, bool sign = true) {
    ProposeRequest req;
    req.kind = ContractKind::Authorship;
    for (const auto& a : authors) {
      req.parties.push_back(a.author);
      req.shares.push_back({a.author, a.share});
    }
    req.stake_required = stake ? stake : eco.policy().author_stake;
    req.terms = AuthorshipTerms{venue};
    auto id = eco.propose_contract(req).id;
    if (sign) {
      for (const auto& a : authors) eco.sign_contract(id, a.author);
    }
    return id;
  }

  ManuscriptKey submit(const std::vector<AuthorShare>& authors,
                       const std::vector<ManuscriptKey>& cites = {0},
                       std::set<std::string> keywords = {}, TokenAmount stake = 0) {
    auto contract = authorship(authors, stake);
    return submit_with(authors, contract, cites, std::move(keywords));
  }

  ManuscriptKey submit_with(const std::vector<AuthorShare>& authors, const ContractId& contract,
                            const std::vector<ManuscriptKey>& cites = {0},
                            std::set<std::string> keywords = {}) {
    SubmitArgs args;
    args.authors = authors;
    args.authorship_contract = contract;
    args.content_digest = sha256("body " + std::to_string(eco.graph().next_key()));
    args.citations = cites;
    args.keywords = std::move(keywords);
    return eco.submit(args).key;
  }

  ContractId review_contract(ManuscriptKey key, const Address& reviewer, bool sign = true,
                             TokenAmount stake = 0) {
    ProposeRequest req;
    req.kind = ContractKind::Review;
    req.parties = {reviewer};
    req.shares = {{reviewer, Rational{1}}};
    req.stake_required = stake ? stake : eco.policy().reviewer_stake;
    req.manuscript = key;
    req.terms = ReviewTerms{};
    auto id = eco.propose_contract(req).id;
    if (sign) eco.sign_contract(id, reviewer);
    return id;
  }

  ContractId funding(const Address& funder, TokenAmount stake, Rational clawback = Rational{0},
                     std::optional<ContractId> target = std::nullopt,
                     Rational covered = Rational{0}, bool sign = true) {
    ProposeRequest req;
    req.kind = ContractKind::Funding;
    req.parties = {funder};
    req.shares = {{funder, Rational{1}}};
    req.stake_required = stake;
    req.terms = FundingTerms{covered, clawback, target};
    auto id = eco.propose_contract(req).id;
    if (sign) eco.sign_contract(id, funder);
    return id;
  }

  ContractId indexing(const Address& venue, TokenAmount stake, std::optional<std::uint32_t> k,
                      std::vector<Address> whitelist = {}, Rational clawback = Rational{0}) {
    ProposeRequest req;
    req.kind = ContractKind::Indexing;
    req.parties = {venue};
    req.shares = {{venue, Rational{1}}};
    req.stake_required = stake;
    req.terms = IndexingTerms{"venue", k, std::move(whitelist), clawback};
    auto id = eco.propose_contract(req).id;
    eco.sign_contract(id, venue);
    return id;
  }

  /// Verdict on the current version; the reviewer needs an active review contract.
  void review(ManuscriptKey key, const Address& reviewer, Verdict v = Verdict::Confirm) {
    eco.review(key, reviewer, v, "report");
  }

  const ManuscriptNode& node(ManuscriptKey key) const { return eco.graph().node(key); }
  Balance balance(const Address& a) const { return eco.ledger().balance_of(a); }
  TokenAmount spendable(const Address& a) const { return balance(a).spendable; }

  /// Sum of spendable + escrowed over every ledger account.
  TokenAmount circulating() const {
    TokenAmount sum = 0;
    for (const auto& [_, b] : eco.ledger().balances()) sum += b.spendable + b.escrowed;
    return sum;
  }
};

}  // namespace reviewchain::testing
