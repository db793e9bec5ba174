#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reviewchain/crypto.hpp"
#include "reviewchain/types.hpp"

namespace reviewchain {

enum class TxKind : std::uint8_t { Mint, Transfer, Lock, Release, Refund };
enum class EscrowState : std::uint8_t { Held, Released, Refunded };

/// How parents of a new transaction are chosen.
///  - Lattice: the latest transaction touching each involved address (a DAG).
///  - Chain: the previous transaction (degenerate linear chain).
enum class GraphShape : std::uint8_t { Lattice, Chain };

std::string_view to_string(TxKind kind);
std::string_view to_string(EscrowState state);

/// A zero ContractId as trigger means "System" (genesis mint, gift grants).
struct TokenTransaction {
  TxId id;
  TxKind kind = TxKind::Transfer;
  Address from;
  Address to;
  TokenAmount amount = 0;
  ContractId trigger;
  EscrowId escrow;
  std::vector<TxId> parents;
  Tick timestamp = 0;
  Signature signature{};

  /// Canonical encoding of everything except id and signature; this is
  /// what gets signed.
  Bytes body() const;
  /// Hash over body and signature.
  TxId compute_id() const;

  bool operator==(const TokenTransaction&) const = default;
};

struct EscrowEntry {
  EscrowId id;
  Address owner;
  TokenAmount amount = 0;
  ContractId contract;
  EscrowState state = EscrowState::Held;
};

struct Balance {
  TokenAmount spendable = 0;
  TokenAmount escrowed = 0;

  bool operator==(const Balance&) const = default;
};

struct Payout {
  Address to;
  TokenAmount amount = 0;

  bool operator==(const Payout&) const = default;
};

/// Address -> public key. System accounts (manuscript accounts) have no key
/// of their own; their transactions are signed by the treasury key.
struct AccountRegistry {
  std::map<Address, std::optional<PublicKey>> accounts;

  bool knows(const Address& a) const { return accounts.contains(a); }
  std::string export_text() const;
  static AccountRegistry parse(std::string_view text);
};

/// Append-only token transaction graph with a pre-mined supply.
///
/// All mutations are serialized through this object; copies are immutable
/// snapshots that may be read from any thread.
class Ledger {
 public:
  static Ledger init(TokenAmount total_supply, const KeyPair& treasury,
                     GraphShape shape = GraphShape::Lattice);

  Address register_account(const PublicKey& key);
  void register_system_account(const Address& address);
  bool knows(const Address& address) const { return registry_.knows(address); }
  const AccountRegistry& registry() const { return registry_; }

  /// Unsigned transfer with parents and timestamp filled in from the
  /// current state. Sign body() with the sender's key and pass to submit().
  TokenTransaction draft_transfer(const Address& from, const Address& to,
                                  TokenAmount amount,
                                  const ContractId& trigger) const;
  TxId submit(TokenTransaction draft, const Signature& sig);

  TxId transfer(const Address& from, const Address& to, TokenAmount amount,
                const ContractId& trigger, const KeyPair& signer);
  /// Transfer out of the treasury or a system account, signed by the
  /// treasury key. Only contract-triggered unless from == treasury.
  TxId system_transfer(const Address& from, const Address& to,
                       TokenAmount amount, const ContractId& trigger);

  EscrowId escrow_lock(const Address& owner, TokenAmount amount,
                       const ContractId& contract, const KeyPair& owner_key);
  /// Payout must sum to the escrowed amount. Zero lines are dropped.
  std::vector<TxId> escrow_release(const EscrowId& id,
                                   std::span<const Payout> payout);

  Balance balance_of(const Address& address) const;
  const EscrowEntry& escrow(const EscrowId& id) const;
  const std::map<EscrowId, EscrowEntry>& escrows() const { return escrows_; }
  const std::map<Address, Balance>& balances() const { return balances_; }

  TokenAmount circulating_total() const;
  TokenAmount total_supply() const { return total_supply_; }
  const Address& treasury() const { return treasury_; }
  GraphShape shape() const { return shape_; }

  Tick tick() const { return tick_; }
  void advance_tick(Tick n = 1) { tick_ += n; }

  const std::vector<TokenTransaction>& transactions() const { return txs_; }

  /// One line per transaction; see docs/formats.md.
  std::string export_text() const;

  /// Test hook: direct access to stored transactions, bypassing all checks.
  std::vector<TokenTransaction>& mutable_transactions_for_testing() { return txs_; }

 private:
  Ledger(const KeyPair& treasury, GraphShape shape);

  std::vector<TxId> frontier_parents(const Address& from, const Address& to) const;
  TxId append(TokenTransaction tx);
  void require_known(const Address& a) const;
  Balance& slot(const Address& a) { return balances_[a]; }

  KeyPair operator_key_;
  GraphShape shape_;
  Address treasury_;
  TokenAmount total_supply_ = 0;
  Tick tick_ = 0;
  AccountRegistry registry_;
  std::vector<TokenTransaction> txs_;
  std::map<Address, Balance> balances_;
  std::map<EscrowId, EscrowEntry> escrows_;
  std::map<Address, TxId> heads_;
};

EscrowId derive_escrow_id(const Address& owner, const ContractId& contract,
                          TokenAmount amount, std::uint64_t seq);

/// One export line for a transaction at position seq.
std::string export_line(std::uint64_t seq, const TokenTransaction& tx);

/// Strict parser: every line must re-serialize to exactly itself.
std::vector<TokenTransaction> parse_ledger_export(std::string_view text);

struct ReplayResult {
  Report report;
  std::map<Address, Balance> balances;
  std::map<EscrowId, EscrowEntry> escrows;
  TokenAmount minted = 0;
};

/// Checks id hashing, parent existence and order, signatures, replayed
/// non-negativity, escrow linearity and conservation.
ReplayResult replay_transactions(std::span<const TokenTransaction> txs,
                                 const AccountRegistry& registry);

/// replay_transactions plus a comparison of replayed and live state.
Report verify_ledger(const Ledger& ledger);

}  // namespace reviewchain
