#include "reviewchain/ledger.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace reviewchain {

std::string_view to_string(TxKind kind) {
  switch (kind) {
    case TxKind::Mint: return "mint";
    case TxKind::Transfer: return "transfer";
    case TxKind::Lock: return "lock";
    case TxKind::Release: return "release";
    case TxKind::Refund: return "refund";
  }
  return "?";
}

std::string_view to_string(EscrowState state) {
  switch (state) {
    case EscrowState::Held: return "held";
    case EscrowState::Released: return "released";
    case EscrowState::Refunded: return "refunded";
  }
  return "?";
}

namespace {

TxKind parse_kind(std::string_view s) {
  for (auto k : {TxKind::Mint, TxKind::Transfer, TxKind::Lock, TxKind::Release,
                 TxKind::Refund}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown transaction kind: " + std::string(s));
}

std::uint64_t parse_u64(std::string_view s) {
  if (s.empty() || s.size() > 20 || (s.size() > 1 && s.front() == '0')) {
    throw Error(ErrorCode::ParseError, "invalid integer: " + std::string(s));
  }
  std::uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::ParseError, "invalid integer: " + std::string(s));
    }
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Bytes TokenTransaction::body() const {
  std::vector<CanonicalRecord> parent_items;
  for (const auto& p : parents) parent_items.push_back(CanonicalRecord().put("id", p));
  return CanonicalRecord()
      .put_u64("amount", amount)
      .put("escrow", escrow)
      .put("from", from)
      .put_u64("kind", static_cast<std::uint64_t>(kind))
      .put_list("parents", parent_items)
      .put_u64("timestamp", timestamp)
      .put("to", to)
      .put("trigger", trigger)
      .encode();
}

TxId TokenTransaction::compute_id() const {
  auto h = Hasher().update("tx").update(body()).update(signature).finish();
  return TxId::from_bytes(h.bytes);
}

EscrowId derive_escrow_id(const Address& owner, const ContractId& contract,
                          TokenAmount amount, std::uint64_t seq) {
  auto h = Hasher()
               .update("escrow")
               .update(owner)
               .update(contract)
               .update_u64(amount)
               .update_u64(seq)
               .finish();
  return EscrowId::from_bytes(h.bytes);
}

// --- AccountRegistry -------------------------------------------------------

std::string AccountRegistry::export_text() const {
  std::ostringstream out;
  for (const auto& [addr, key] : accounts) {
    if (key) {
      out << "account " << addr.hex() << ' ' << to_hex(*key) << '\n';
    } else {
      out << "system " << addr.hex() << '\n';
    }
  }
  return out.str();
}

AccountRegistry AccountRegistry::parse(std::string_view text) {
  AccountRegistry reg;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split(line, ' ');
    try {
      if (f.size() == 3 && f[0] == "account") {
        auto addr = Address::from_hex(f[1]);
        auto raw = from_hex(f[2]);
        if (raw.size() != 32) throw Error(ErrorCode::ParseError, "bad key length");
        PublicKey pk{};
        std::copy(raw.begin(), raw.end(), pk.begin());
        if (address_of(pk) != addr) {
          throw Error(ErrorCode::ParseError, "address does not match key");
        }
        reg.accounts[addr] = pk;
      } else if (f.size() == 2 && f[0] == "system") {
        reg.accounts[Address::from_hex(f[1])] = std::nullopt;
      } else {
        throw Error(ErrorCode::ParseError, "unrecognised record");
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError,
                  "accounts line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (reg.export_text() != text) {
    throw Error(ErrorCode::ParseError, "accounts file is not in canonical form");
  }
  return reg;
}

// --- Ledger ----------------------------------------------------------------

Ledger::Ledger(const KeyPair& treasury, GraphShape shape)
    : operator_key_(treasury), shape_(shape), treasury_(treasury.address()) {}

Ledger Ledger::init(TokenAmount total_supply, const KeyPair& treasury,
                    GraphShape shape) {
  if (total_supply == 0) {
    throw Error(ErrorCode::ZeroSupply, "total supply must be positive");
  }
  Ledger ledger(treasury, shape);
  ledger.total_supply_ = total_supply;
  ledger.registry_.accounts[ledger.treasury_] = treasury.public_key();

  TokenTransaction mint;
  mint.kind = TxKind::Mint;
  mint.to = ledger.treasury_;
  mint.amount = total_supply;
  mint.timestamp = ledger.tick_;
  mint.signature = treasury.sign(mint.body());
  ledger.slot(ledger.treasury_).spendable = total_supply;
  ledger.append(std::move(mint));
  return ledger;
}

Address Ledger::register_account(const PublicKey& key) {
  auto addr = address_of(key);
  registry_.accounts.emplace(addr, key);
  return addr;
}

void Ledger::register_system_account(const Address& address) {
  registry_.accounts.emplace(address, std::nullopt);
}

void Ledger::require_known(const Address& a) const {
  if (!registry_.knows(a)) {
    throw Error(ErrorCode::UnknownAddress, "unknown address " + a.hex());
  }
}

std::vector<TxId> Ledger::frontier_parents(const Address& from,
                                           const Address& to) const {
  const TxId& genesis = txs_.front().id;
  if (shape_ == GraphShape::Chain) return {txs_.back().id};
  std::set<TxId> parents;
  for (const auto* a : {&from, &to}) {
    auto it = heads_.find(*a);
    parents.insert(it == heads_.end() ? genesis : it->second);
  }
  return {parents.begin(), parents.end()};
}

TxId Ledger::append(TokenTransaction tx) {
  tx.id = tx.compute_id();
  if (tx.kind != TxKind::Mint) heads_[tx.from] = tx.id;
  heads_[tx.to] = tx.id;
  txs_.push_back(std::move(tx));
  return txs_.back().id;
}

TokenTransaction Ledger::draft_transfer(const Address& from, const Address& to,
                                        TokenAmount amount,
                                        const ContractId& trigger) const {
  TokenTransaction tx;
  tx.kind = TxKind::Transfer;
  tx.from = from;
  tx.to = to;
  tx.amount = amount;
  tx.trigger = trigger;
  tx.parents = frontier_parents(from, to);
  tx.timestamp = tick_;
  return tx;
}

TxId Ledger::submit(TokenTransaction draft, const Signature& sig) {
  if (draft.kind != TxKind::Transfer) {
    throw Error(ErrorCode::StateMismatch, "only transfers may be submitted");
  }
  if (draft.amount == 0) throw Error(ErrorCode::ZeroAmount, "zero-amount transfer");
  require_known(draft.from);
  require_known(draft.to);
  if (draft.parents != frontier_parents(draft.from, draft.to) ||
      draft.timestamp != tick_) {
    throw Error(ErrorCode::StateMismatch, "stale transfer draft");
  }
  if (draft.trigger.is_zero() && draft.from != treasury_) {
    throw Error(ErrorCode::StateMismatch,
                "system-triggered transfers originate only from the treasury");
  }
  const auto& key = registry_.accounts.at(draft.from);
  const PublicKey& pk = key ? *key : operator_key_.public_key();
  if (!verify_signature(pk, draft.body(), sig)) {
    throw Error(ErrorCode::BadSignature, "transfer signature does not verify");
  }
  auto& src = slot(draft.from);
  if (src.spendable < draft.amount) {
    throw Error(ErrorCode::InsufficientFunds,
                "spendable " + std::to_string(src.spendable) + " < " +
                    std::to_string(draft.amount));
  }
  src.spendable -= draft.amount;
  slot(draft.to).spendable += draft.amount;
  draft.signature = sig;
  return append(std::move(draft));
}

TxId Ledger::transfer(const Address& from, const Address& to, TokenAmount amount,
                      const ContractId& trigger, const KeyPair& signer) {
  auto draft = draft_transfer(from, to, amount, trigger);
  auto sig = signer.sign(draft.body());
  return submit(std::move(draft), sig);
}

TxId Ledger::system_transfer(const Address& from, const Address& to,
                             TokenAmount amount, const ContractId& trigger) {
  require_known(from);
  if (from != treasury_ && registry_.accounts.at(from).has_value()) {
    throw Error(ErrorCode::BadSignature,
                "treasury key cannot sign for a user account");
  }
  auto draft = draft_transfer(from, to, amount, trigger);
  auto sig = operator_key_.sign(draft.body());
  return submit(std::move(draft), sig);
}

EscrowId Ledger::escrow_lock(const Address& owner, TokenAmount amount,
                             const ContractId& contract, const KeyPair& owner_key) {
  if (amount == 0) throw Error(ErrorCode::ZeroStake, "zero stake");
  require_known(owner);
  if (owner_key.address() != owner) {
    throw Error(ErrorCode::BadSignature, "lock must be signed by the owner");
  }
  auto& bal = slot(owner);
  if (bal.spendable < amount) {
    throw Error(ErrorCode::InsufficientFunds,
                "spendable " + std::to_string(bal.spendable) + " < stake " +
                    std::to_string(amount));
  }
  auto id = derive_escrow_id(owner, contract, amount, txs_.size());

  TokenTransaction tx;
  tx.kind = TxKind::Lock;
  tx.from = owner;
  tx.to = owner;
  tx.amount = amount;
  tx.trigger = contract;
  tx.escrow = id;
  tx.parents = frontier_parents(owner, owner);
  tx.timestamp = tick_;
  tx.signature = owner_key.sign(tx.body());

  bal.spendable -= amount;
  bal.escrowed += amount;
  escrows_.emplace(id, EscrowEntry{id, owner, amount, contract, EscrowState::Held});
  append(std::move(tx));
  return id;
}

std::vector<TxId> Ledger::escrow_release(const EscrowId& id,
                                         std::span<const Payout> payout) {
  auto it = escrows_.find(id);
  if (it == escrows_.end()) {
    throw Error(ErrorCode::UnknownEscrow, "unknown escrow " + id.hex());
  }
  auto& entry = it->second;
  if (entry.state != EscrowState::Held) {
    throw Error(ErrorCode::AlreadyTerminal, "escrow already " +
                                                std::string(to_string(entry.state)));
  }
  TokenAmount sum = 0;
  for (const auto& p : payout) {
    require_known(p.to);
    sum += p.amount;
  }
  if (sum != entry.amount) {
    throw Error(ErrorCode::PayoutMismatch,
                "payout " + std::to_string(sum) + " != escrow " +
                    std::to_string(entry.amount));
  }
  const bool refund = payout.size() == 1 && payout[0].to == entry.owner;
  std::vector<TxId> out;
  for (const auto& p : payout) {
    if (p.amount == 0) continue;
    TokenTransaction tx;
    tx.kind = refund ? TxKind::Refund : TxKind::Release;
    tx.from = entry.owner;
    tx.to = p.to;
    tx.amount = p.amount;
    tx.trigger = entry.contract;
    tx.escrow = id;
    tx.parents = frontier_parents(entry.owner, p.to);
    tx.timestamp = tick_;
    tx.signature = operator_key_.sign(tx.body());
    slot(entry.owner).escrowed -= p.amount;
    slot(p.to).spendable += p.amount;
    out.push_back(append(std::move(tx)));
  }
  entry.state = refund ? EscrowState::Refunded : EscrowState::Released;
  return out;
}

Balance Ledger::balance_of(const Address& address) const {
  require_known(address);
  auto it = balances_.find(address);
  return it == balances_.end() ? Balance{} : it->second;
}

const EscrowEntry& Ledger::escrow(const EscrowId& id) const {
  auto it = escrows_.find(id);
  if (it == escrows_.end()) {
    throw Error(ErrorCode::UnknownEscrow, "unknown escrow " + id.hex());
  }
  return it->second;
}

TokenAmount Ledger::circulating_total() const {
  TokenAmount sum = 0;
  for (const auto& [_, b] : balances_) sum += b.spendable + b.escrowed;
  return sum;
}

// --- export / import -------------------------------------------------------

std::string export_line(std::uint64_t seq, const TokenTransaction& tx) {
  std::string parents;
  for (const auto& p : tx.parents) {
    if (!parents.empty()) parents.push_back(',');
    parents += p.hex();
  }
  if (parents.empty()) parents = "-";
  std::ostringstream out;
  out << seq << ' ' << tx.id.hex() << ' ' << to_string(tx.kind) << ' '
      << tx.from.hex() << ' ' << tx.to.hex() << ' ' << tx.amount << ' '
      << tx.trigger.hex() << ' ' << tx.escrow.hex() << ' ' << tx.timestamp << ' '
      << parents << ' ' << to_hex(tx.signature);
  return out.str();
}

std::string Ledger::export_text() const {
  std::string out;
  for (std::size_t i = 0; i < txs_.size(); ++i) {
    out += export_line(i, txs_[i]);
    out.push_back('\n');
  }
  return out;
}

std::vector<TokenTransaction> parse_ledger_export(std::string_view text) {
  std::vector<TokenTransaction> txs;
  if (!text.empty() && text.back() != '\n') {
    throw Error(ErrorCode::ParseError, "ledger export must end with a newline");
  }
  auto lines = split(text, '\n');
  lines.pop_back();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto where = "ledger line " + std::to_string(i + 1) + ": ";
    try {
      auto f = split(lines[i], ' ');
      if (f.size() != 11) throw Error(ErrorCode::ParseError, "expected 11 fields");
      if (parse_u64(f[0]) != i) throw Error(ErrorCode::ParseError, "sequence gap");
      TokenTransaction tx;
      tx.id = TxId::from_hex(f[1]);
      tx.kind = parse_kind(f[2]);
      tx.from = Address::from_hex(f[3]);
      tx.to = Address::from_hex(f[4]);
      tx.amount = parse_u64(f[5]);
      tx.trigger = ContractId::from_hex(f[6]);
      tx.escrow = EscrowId::from_hex(f[7]);
      tx.timestamp = parse_u64(f[8]);
      if (f[9] != "-") {
        for (auto p : split(f[9], ',')) tx.parents.push_back(TxId::from_hex(p));
      }
      auto sig = from_hex(f[10]);
      if (sig.size() != tx.signature.size()) {
        throw Error(ErrorCode::ParseError, "bad signature length");
      }
      std::copy(sig.begin(), sig.end(), tx.signature.begin());
      if (export_line(i, tx) != lines[i]) {
        throw Error(ErrorCode::ParseError, "line is not in canonical form");
      }
      txs.push_back(std::move(tx));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + e.what());
    }
  }
  return txs;
}

// --- verification ----------------------------------------------------------

ReplayResult replay_transactions(std::span<const TokenTransaction> txs,
                                 const AccountRegistry& registry) {
  ReplayResult r;
  std::set<TxId> seen;
  std::map<EscrowId, TokenAmount> remaining;
  std::optional<PublicKey> operator_key;
  Tick last_tick = 0;

  if (txs.empty()) {
    r.report.add("ledger has no genesis transaction");
    return r;
  }

  for (std::size_t i = 0; i < txs.size(); ++i) {
    const auto& tx = txs[i];
    const auto at = "tx " + std::to_string(i) + ": ";

    if (tx.compute_id() != tx.id) r.report.add(at + "id does not match contents");
    if (seen.contains(tx.id)) r.report.add(at + "duplicate id");
    for (const auto& p : tx.parents) {
      if (!seen.contains(p)) r.report.add(at + "parent " + p.hex() + " not found earlier");
    }
    if (tx.timestamp < last_tick) r.report.add(at + "timestamp goes backwards");
    last_tick = tx.timestamp;
    seen.insert(tx.id);

    if (tx.amount == 0) r.report.add(at + "zero amount");

    if (i == 0) {
      if (tx.kind != TxKind::Mint || !tx.from.is_zero() || !tx.parents.empty()) {
        r.report.add(at + "first transaction must be the genesis mint");
        continue;
      }
      auto it = registry.accounts.find(tx.to);
      if (it == registry.accounts.end() || !it->second) {
        r.report.add(at + "treasury has no registered key");
        continue;
      }
      operator_key = *it->second;
      if (!verify_signature(*operator_key, tx.body(), tx.signature)) {
        r.report.add(at + "bad genesis signature");
      }
      r.minted = tx.amount;
      r.balances[tx.to].spendable += tx.amount;
      continue;
    }
    if (tx.kind == TxKind::Mint) {
      r.report.add(at + "mint after genesis");
      continue;
    }
    if (tx.parents.empty()) r.report.add(at + "missing parents");

    if (!registry.knows(tx.from) || !registry.knows(tx.to)) {
      r.report.add(at + "unknown address");
      continue;
    }

    // Transfers and locks are signed by the sender unless it is a system
    // account; releases and refunds are executed by the treasury key.
    std::optional<PublicKey> signer = operator_key;
    if (tx.kind == TxKind::Transfer || tx.kind == TxKind::Lock) {
      const auto& k = registry.accounts.at(tx.from);
      if (k) signer = *k;
    }
    if (!signer || !verify_signature(*signer, tx.body(), tx.signature)) {
      r.report.add(at + "bad signature");
    }
    if (tx.kind == TxKind::Transfer && tx.trigger.is_zero() &&
        tx.from != txs[0].to) {
      r.report.add(at + "system-triggered transfer not from treasury");
    }

    auto& from = r.balances[tx.from];
    auto& to = r.balances[tx.to];
    switch (tx.kind) {
      case TxKind::Transfer:
        if (from.spendable < tx.amount) {
          r.report.add(at + "negative spendable balance");
          break;
        }
        from.spendable -= tx.amount;
        to.spendable += tx.amount;
        break;
      case TxKind::Lock: {
        if (tx.from != tx.to) r.report.add(at + "lock must be self-addressed");
        if (tx.escrow != derive_escrow_id(tx.from, tx.trigger, tx.amount, i)) {
          r.report.add(at + "escrow id mismatch");
        }
        if (from.spendable < tx.amount) {
          r.report.add(at + "negative spendable balance");
          break;
        }
        from.spendable -= tx.amount;
        from.escrowed += tx.amount;
        r.escrows[tx.escrow] =
            EscrowEntry{tx.escrow, tx.from, tx.amount, tx.trigger, EscrowState::Held};
        remaining[tx.escrow] = tx.amount;
        break;
      }
      case TxKind::Release:
      case TxKind::Refund: {
        auto it = r.escrows.find(tx.escrow);
        if (it == r.escrows.end()) {
          r.report.add(at + "release of unknown escrow");
          break;
        }
        auto& entry = it->second;
        if (entry.owner != tx.from || entry.contract != tx.trigger) {
          r.report.add(at + "release does not match escrow owner/contract");
        }
        if (entry.state != EscrowState::Held && remaining[tx.escrow] == 0) {
          r.report.add(at + "escrow released twice");
          break;
        }
        if (tx.kind == TxKind::Refund && tx.to != entry.owner) {
          r.report.add(at + "refund not returned to owner");
        }
        if (remaining[tx.escrow] < tx.amount || from.escrowed < tx.amount) {
          r.report.add(at + "release exceeds escrowed amount");
          break;
        }
        remaining[tx.escrow] -= tx.amount;
        from.escrowed -= tx.amount;
        to.spendable += tx.amount;
        entry.state = tx.kind == TxKind::Refund ? EscrowState::Refunded
                                                : EscrowState::Released;
        break;
      }
      case TxKind::Mint:
        break;
    }
  }

  for (auto& [id, entry] : r.escrows) {
    auto left = remaining[id];
    if (left != 0 && left != entry.amount) {
      r.report.add("escrow " + id.hex() + " partially released");
    }
    if (left == entry.amount) entry.state = EscrowState::Held;
  }

  TokenAmount total = 0;
  for (const auto& [_, b] : r.balances) total += b.spendable + b.escrowed;
  if (total != r.minted) {
    r.report.add("conservation violated: " + std::to_string(total) +
                 " != " + std::to_string(r.minted));
  }
  return r;
}

Report verify_ledger(const Ledger& ledger) {
  auto r = replay_transactions(ledger.transactions(), ledger.registry());
  if (r.minted != ledger.total_supply()) {
    r.report.add("minted amount differs from total supply");
  }
  for (const auto& [addr, live] : ledger.balances()) {
    auto it = r.balances.find(addr);
    Balance replayed = it == r.balances.end() ? Balance{} : it->second;
    if (replayed != live) {
      r.report.add("replayed balance of " + addr.hex() + " differs from live state");
    }
  }
  for (const auto& [addr, b] : r.balances) {
    if (!ledger.balances().contains(addr) && (b.spendable || b.escrowed)) {
      r.report.add("replay produced balance for unknown account " + addr.hex());
    }
  }
  for (const auto& [id, live] : ledger.escrows()) {
    auto it = r.escrows.find(id);
    if (it == r.escrows.end() || it->second.state != live.state ||
        it->second.amount != live.amount) {
      r.report.add("escrow " + id.hex() + " differs from replay");
    }
  }
  return r.report;
}

}  // namespace reviewchain
