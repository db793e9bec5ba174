#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reviewchain/contracts.hpp"
#include "reviewchain/graph.hpp"
#include "reviewchain/identity.hpp"
#include "reviewchain/rational.hpp"

namespace reviewchain {

enum class SelfCitationRule : std::uint8_t { Allow, RedirectAuthorsToTreasury };
std::string_view to_string(SelfCitationRule rule);
SelfCitationRule parse_self_citation_rule(std::string_view text);

struct PolicyConfig {
  std::uint32_t K = 2;
  TokenAmount author_stake = 100;
  TokenAmount reviewer_stake = 10;
  Rational alpha{1, 2};   // authors
  Rational beta{3, 10};   // reviewers
  Rational gamma{1, 5};   // remarks
  Rational refund{1, 2};  // share of author stakes returned on withdrawal
  SelfCitationRule self_citation = SelfCitationRule::Allow;
  std::uint32_t candidate_count = 5;
  TokenAmount total_supply = 1'000'000'000;

  /// Throws InvalidPolicy.
  void validate() const;
  /// Flat key=value text, '#' comments. Unknown keys are rejected; missing
  /// keys keep their defaults.
  static PolicyConfig parse(std::string_view text);
  /// Canonical key=value form, one per line in a fixed order.
  std::string to_text() const;
  bool operator==(const PolicyConfig&) const = default;
};

struct ReviewerScore {
  Address candidate;
  std::uint32_t keyword_overlap = 0;
  std::uint64_t history = 0;
  std::uint64_t score = 0;
  Hash32 tie_break;
};

/// Terms of the indexing contract governing a manuscript: the venue named
/// by its authorship contract, else the first indexing remark attached.
std::optional<IndexingTerms> venue_terms(const ManuscriptNode& node, const ContractBook& book);

/// Eligible candidates, best first.
std::vector<ReviewerScore> score_candidates(const ManuscriptNode& node, const IdentityPool& pool,
                                            const ContractBook& book, std::uint64_t seed);
/// Throws EmptyPool when nobody is eligible, NotUnderReview for a closed node.
std::vector<Address> select_reviewers(const ManuscriptNode& node, const IdentityPool& pool,
                                      const ContractBook& book, const PolicyConfig& policy,
                                      std::uint64_t seed);

/// Distinct reviewers whose latest record confirms the current version.
std::uint32_t tally_confirmations(const ManuscriptNode& node);
std::uint32_t required_confirmations(const ManuscriptNode& node, const ContractBook& book,
                                     const PolicyConfig& policy);

enum class BeneficiaryClass : std::uint8_t { Author, Reviewer, Remark, Treasury };
std::string_view to_string(BeneficiaryClass c);
BeneficiaryClass parse_beneficiary_class(std::string_view text);

struct Beneficiary {
  Address to;
  TokenAmount amount = 0;
  BeneficiaryClass cls = BeneficiaryClass::Treasury;
  bool operator==(const Beneficiary&) const = default;
};

/// Fraction of the author class each funder or venue claws back, keyed by
/// recipient. Scaled down proportionally if the total would exceed 1.
std::map<Address, Rational> clawbacks_for(const ManuscriptNode& node, const ContractBook& book);

/// How `amount` arriving at `cited` is split. Lines are merged per
/// (address, class) and sorted by address; the sum equals `amount`.
/// A genesis node keeps everything on its own account.
std::vector<Beneficiary> distribution_for_citation(const ManuscriptNode& cited, TokenAmount amount,
                                                   const ManuscriptNode& citing,
                                                   const ContractBook& book,
                                                   const PolicyConfig& policy,
                                                   const Address& treasury);

/// True if any author of `citing` is also an author of `cited`.
bool shares_author(const ManuscriptNode& cited, const ManuscriptNode& citing);

enum class SettlementKind : std::uint8_t { Confirmation, Withdrawal };

struct SettlementLine {
  /// Manuscript whose inflow produced the line; for pool remainders and
  /// withdrawals this is the settled manuscript itself.
  ManuscriptKey source = 0;
  Beneficiary beneficiary;
  bool operator==(const SettlementLine&) const = default;
};

struct CitationShare {
  ManuscriptKey cited = 0;
  ManuscriptId id;
  TokenAmount amount = 0;
};

struct SettlementReport {
  SettlementKind kind = SettlementKind::Confirmation;
  ManuscriptKey manuscript = 0;
  ManuscriptId id;
  TokenAmount pool = 0;
  std::vector<CitationShare> per_citation;
  std::vector<SettlementLine> per_beneficiary;

  TokenAmount total() const;
  /// Sorts lines by (address, source, class).
  void normalize();
  /// One line per beneficiary; see docs/formats.md.
  std::vector<std::string> audit_lines(std::uint64_t seq) const;
};

/// Refund lines for a withdrawal; pure, mirrors the Withdrawn trigger.
std::vector<SettlementLine> withdrawal_lines(const ManuscriptNode& node,
                                             std::span<const Contract> contracts,
                                             const PolicyConfig& policy,
                                             const Address& treasury);

}  // namespace reviewchain
