#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "reviewchain/crypto.hpp"
#include "reviewchain/ledger.hpp"
#include "reviewchain/rational.hpp"

namespace reviewchain {

enum class ContractKind : std::uint8_t { Authorship, Review, Funding, Indexing };
enum class ContractState : std::uint8_t { Proposed, Signed, Active, Locked, Settled, Cancelled };

/// Actions that move a contract through its lifecycle. SignFinal is the
/// signature that completes the party set (and escrows the last stake).
enum class ContractAction : std::uint8_t { SignPartial, SignFinal, Cancel, Lock, Settle };

std::string_view to_string(ContractKind kind);
std::string_view to_string(ContractState state);
std::string_view to_string(ContractAction action);
ContractKind parse_contract_kind(std::string_view text);

/// The complete transition table. nullopt means the action is rejected.
std::optional<ContractState> next_state(ContractState from, ContractAction action);

struct ShareEntry {
  Address party;
  Rational weight;

  bool operator==(const ShareEntry&) const = default;
};
using ShareTable = std::vector<ShareEntry>;

bool shares_sum_to_one(const ShareTable& shares);

struct AuthorshipTerms {
  std::optional<ContractId> venue;  // an Indexing contract
  bool operator==(const AuthorshipTerms&) const = default;
};
struct ReviewTerms {
  bool operator==(const ReviewTerms&) const = default;
};
/// A funding contract either covers part of an authorship stake (target
/// set, no stake of its own) or invests a remark stake (no target).
struct FundingTerms {
  Rational covered_fraction{0};
  Rational clawback_share{0};
  std::optional<ContractId> target;
  bool operator==(const FundingTerms&) const = default;
};
struct IndexingTerms {
  std::string venue_id;
  std::optional<std::uint32_t> k_override;
  std::vector<Address> reviewer_whitelist;
  Rational clawback_share{0};
  bool operator==(const IndexingTerms&) const = default;
};
using ContractTerms = std::variant<AuthorshipTerms, ReviewTerms, FundingTerms, IndexingTerms>;

enum class StakeRole : std::uint8_t { Author, Covered, Reviewer, Remark };
std::string_view to_string(StakeRole role);

struct StakeRef {
  EscrowId escrow;
  Address owner;
  TokenAmount amount = 0;
  StakeRole role = StakeRole::Author;
  bool settled = false;
};

struct Contract {
  ContractId id;
  ContractKind kind = ContractKind::Authorship;
  std::vector<Address> parties;
  ShareTable shares;
  TokenAmount stake_required = 0;
  std::optional<ManuscriptKey> manuscript;
  ContractTerms terms;
  ContractState state = ContractState::Proposed;
  std::map<Address, Signature> signatures;
  std::vector<StakeRef> stakes;
  std::uint64_t nonce = 0;
  /// Set once a party has acted under the contract (e.g. a review was
  /// recorded); such contracts can no longer be cancelled.
  bool engaged = false;

  bool all_signed() const { return signatures.size() == parties.size(); }
  bool is_party(const Address& a) const;
  TokenAmount held_stake() const;
  /// Ratio of the authors' citation income redirected to this contract's
  /// party (funding or indexing clawback); zero for other kinds.
  Rational clawback() const;
};

ContractId derive_contract_id(ContractKind kind, const std::vector<Address>& parties,
                              const ShareTable& shares, TokenAmount stake,
                              const ContractTerms& terms, std::uint64_t nonce);
/// What a party signs: the contract id.
Bytes contract_signing_payload(const ContractId& id);

// --- contract -> ledger boundary -------------------------------------------

struct TransferInstruction {
  Address from;
  Address to;
  TokenAmount amount = 0;
  ContractId trigger;
  bool operator==(const TransferInstruction&) const = default;
};
struct LockInstruction {
  Address owner;
  TokenAmount amount = 0;
  ContractId contract;
  bool operator==(const LockInstruction&) const = default;
};
struct ReleaseInstruction {
  EscrowId escrow;
  std::vector<Payout> payout;
  bool operator==(const ReleaseInstruction&) const = default;
};
using LedgerInstruction = std::variant<TransferInstruction, LockInstruction, ReleaseInstruction>;

/// Pool of the confirmed manuscript is split equally across the accounts of
/// the manuscripts it cites; the floor remainder goes to the treasury.
struct ManuscriptConfirmed {
  ManuscriptKey manuscript = 0;
  std::vector<Address> citation_accounts;
  Address treasury;
};
/// Inflow to a cited manuscript account, distributed to its stakeholders.
/// Lines addressed to the cited account itself are retained there.
struct CitationReceived {
  ManuscriptKey cited = 0;
  Address cited_account;
  ManuscriptKey citing = 0;
  TokenAmount amount = 0;
  std::vector<Payout> distribution;
};
struct Withdrawn {
  ManuscriptKey manuscript = 0;
  Rational refund_fraction{0};
  Address treasury;
};
using TriggerEvent = std::variant<ManuscriptConfirmed, CitationReceived, Withdrawn>;

/// Pure: converts an event plus the contracts it concerns into ledger
/// instructions. Every returned list debits exactly what it credits.
std::vector<LedgerInstruction> execute_trigger(const TriggerEvent& event,
                                               std::span<const Contract> contracts);

struct ProposeRequest {
  ContractKind kind = ContractKind::Authorship;
  std::vector<Address> parties;
  ShareTable shares;
  TokenAmount stake_required = 0;
  std::optional<ManuscriptKey> manuscript;
  ContractTerms terms;
};

/// Owns every contract instance. Mutations run on the single command
/// sequence together with the ledger.
class ContractBook {
 public:
  /// `known` decides which parties exist (the user pool).
  template <typename KnownFn>
  const Contract& propose(ProposeRequest req, KnownFn&& known) {
    for (const auto& p : req.parties) {
      if (!known(p)) throw Error(ErrorCode::UnknownParty, "unknown party " + p.hex());
    }
    return propose_checked(std::move(req));
  }

  /// Records the party's signature and escrows that party's stake from
  /// its wallet. Becomes Active once every party signed.
  const Contract& sign(const ContractId& id, const KeyPair& party, Ledger& ledger);

  /// Stake the given party owes when it signs.
  std::vector<LockInstruction> required_locks(const Contract& c, const Address& party) const;

  /// Refunds all held stakes. Proposed/Signed contracts need any party in
  /// the quorum, Active ones need every party.
  const Contract& cancel(const ContractId& id, const std::vector<Address>& quorum,
                         Ledger& ledger);

  void bind(const ContractId& id, ManuscriptKey manuscript);
  void mark_engaged(const ContractId& id);
  /// Moves every Active contract bound to the manuscript to Locked and
  /// cancels the ones that never activated (refunding their stakes).
  void lock_manuscript(ManuscriptKey manuscript, Ledger& ledger);
  void settle_manuscript(ManuscriptKey manuscript);

  /// Applies instructions produced by execute_trigger and marks the
  /// released stakes.
  void apply(std::span<const LedgerInstruction> instructions, Ledger& ledger);

  const Contract& get(const ContractId& id) const;
  bool contains(const ContractId& id) const { return contracts_.contains(id); }
  std::vector<Contract> bound_to(ManuscriptKey manuscript) const;
  const std::map<ContractId, Contract>& all() const { return contracts_; }

 private:
  const Contract& propose_checked(ProposeRequest req);
  Contract& at(const ContractId& id);
  void transition(Contract& c, ContractAction action);
  void refund_all(Contract& c, Ledger& ledger);

  std::map<ContractId, Contract> contracts_;
  std::uint64_t nonce_ = 0;
};

}  // namespace reviewchain
