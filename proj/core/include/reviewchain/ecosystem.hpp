#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reviewchain/contracts.hpp"
#include "reviewchain/graph.hpp"
#include "reviewchain/identity.hpp"
#include "reviewchain/ledger.hpp"
#include "reviewchain/por.hpp"

namespace reviewchain {

struct SubmitArgs {
  std::vector<AuthorShare> authors;
  ContractId authorship_contract;
  Hash32 content_digest;
  std::vector<ManuscriptKey> citations;
  std::set<std::string> keywords;
};

struct ReviseArgs {
  Hash32 content_digest;
  std::optional<std::vector<ManuscriptKey>> citations;
  std::optional<std::set<std::string>> keywords;
  std::optional<ContractId> authorship_contract;
  std::optional<std::vector<AuthorShare>> authors;
};

/// Every module wired together on one command sequence. Mutating calls are
/// all-or-nothing: on error the state is left exactly as before the call.
/// The object is a plain value, so copies are independent snapshots.
class Ecosystem {
 public:
  Ecosystem(PolicyConfig policy, std::uint64_t seed);

  const UserAccount& create_user(const Profile& profile);

  const Contract& propose_contract(ProposeRequest req);
  const Contract& sign_contract(const ContractId& id, const Address& signer);
  const Contract& cancel_contract(const ContractId& id, const std::vector<Address>& quorum);

  /// Authors sign the version digest with their own keys.
  const ManuscriptNode& submit(const SubmitArgs& args);
  const ManuscriptNode& revise(ManuscriptKey key, const ReviseArgs& args);
  /// Records the review and runs try_confirm in the same step.
  const ManuscriptNode& review(ManuscriptKey key, const Address& reviewer, Verdict verdict,
                               const std::string& report);
  const ManuscriptNode& attach_remark(ManuscriptKey key, const Address& agent,
                                      const ContractId& contract, RemarkKind kind);
  /// `signers` must include every current author.
  const SettlementReport& withdraw(ManuscriptKey key, const std::vector<Address>& signers);

  /// Confirms and settles if the tally reaches the threshold; otherwise a
  /// no-op returning false.
  bool try_confirm(ManuscriptKey key);

  std::vector<Address> select_reviewers(ManuscriptKey key) const;
  void advance_tick(Tick n) { ledger_.advance_tick(n); }

  const Ledger& ledger() const { return ledger_; }
  const IdentityPool& identities() const { return identities_; }
  const ContractBook& contracts() const { return contracts_; }
  const PublicationGraph& graph() const { return graph_; }
  const PolicyConfig& policy() const { return policy_; }
  const std::vector<SettlementReport>& reports() const { return reports_; }
  std::uint64_t seed() const { return seed_; }

  /// Sorted audit lines of every settlement so far, newline-terminated.
  std::string audit_log() const;
  /// Hash over ledger export, accounts, graph export and contract states.
  Hash32 state_digest() const;
  /// verify_ledger plus verify_graph.
  Report verify() const;

 private:
  template <typename Fn>
  decltype(auto) transact(Fn&& fn);

  const KeyPair& key_of(const Address& who) const;
  void confirm_and_settle(ManuscriptKey key);
  /// The review contract `reviewer` holds for `key`, if any.
  const Contract* review_contract(ManuscriptKey key, const Address& reviewer) const;

  PolicyConfig policy_;
  std::uint64_t seed_;
  ScenarioRng rng_;
  KeyPair treasury_;
  Ledger ledger_;
  IdentityPool identities_;
  ContractBook contracts_;
  PublicationGraph graph_;
  std::vector<SettlementReport> reports_;
};

}  // namespace reviewchain
