#include "reviewchain/contracts.hpp"

#include <algorithm>
#include <set>

namespace reviewchain {

std::string_view to_string(ContractKind kind) {
  switch (kind) {
    case ContractKind::Authorship: return "authorship";
    case ContractKind::Review: return "review";
    case ContractKind::Funding: return "funding";
    case ContractKind::Indexing: return "indexing";
  }
  return "?";
}

std::string_view to_string(ContractState state) {
  switch (state) {
    case ContractState::Proposed: return "proposed";
    case ContractState::Signed: return "signed";
    case ContractState::Active: return "active";
    case ContractState::Locked: return "locked";
    case ContractState::Settled: return "settled";
    case ContractState::Cancelled: return "cancelled";
  }
  return "?";
}

std::string_view to_string(ContractAction action) {
  switch (action) {
    case ContractAction::SignPartial: return "sign-partial";
    case ContractAction::SignFinal: return "sign-final";
    case ContractAction::Cancel: return "cancel";
    case ContractAction::Lock: return "lock";
    case ContractAction::Settle: return "settle";
  }
  return "?";
}

std::string_view to_string(StakeRole role) {
  switch (role) {
    case StakeRole::Author: return "author";
    case StakeRole::Covered: return "covered";
    case StakeRole::Reviewer: return "reviewer";
    case StakeRole::Remark: return "remark";
  }
  return "?";
}

ContractKind parse_contract_kind(std::string_view text) {
  for (auto k : {ContractKind::Authorship, ContractKind::Review, ContractKind::Funding,
                 ContractKind::Indexing}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown contract kind: " + std::string(text));
}

std::optional<ContractState> next_state(ContractState from, ContractAction action) {
  using S = ContractState;
  using A = ContractAction;
  switch (from) {
    case S::Proposed:
    case S::Signed:
      if (action == A::SignPartial) return S::Signed;
      // A single remaining signature passes through Signed to Active atomically.
      if (action == A::SignFinal) return S::Active;
      if (action == A::Cancel) return S::Cancelled;
      return std::nullopt;
    case S::Active:
      if (action == A::Lock) return S::Locked;
      if (action == A::Cancel) return S::Cancelled;
      return std::nullopt;
    case S::Locked:
      if (action == A::Settle) return S::Settled;
      return std::nullopt;
    case S::Settled:
    case S::Cancelled:
      return std::nullopt;
  }
  return std::nullopt;
}

bool shares_sum_to_one(const ShareTable& shares) {
  Rational sum{0};
  for (const auto& s : shares) sum += s.weight;
  return sum == Rational{1};
}

bool Contract::is_party(const Address& a) const {
  return std::find(parties.begin(), parties.end(), a) != parties.end();
}

TokenAmount Contract::held_stake() const {
  TokenAmount sum = 0;
  for (const auto& s : stakes) {
    if (!s.settled) sum += s.amount;
  }
  return sum;
}

Rational Contract::clawback() const {
  if (const auto* f = std::get_if<FundingTerms>(&terms)) return f->clawback_share;
  if (const auto* i = std::get_if<IndexingTerms>(&terms)) return i->clawback_share;
  return Rational{0};
}

namespace {

CanonicalRecord encode_terms(const ContractTerms& terms) {
  CanonicalRecord r;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, AuthorshipTerms>) {
          r.put("type", "authorship");
          r.put("venue", t.venue ? *t.venue : ContractId{});
        } else if constexpr (std::is_same_v<T, ReviewTerms>) {
          r.put("type", "review");
        } else if constexpr (std::is_same_v<T, FundingTerms>) {
          r.put("type", "funding");
          r.put("covered", format_rational(t.covered_fraction));
          r.put("clawback", format_rational(t.clawback_share));
          r.put("target", t.target ? *t.target : ContractId{});
        } else {
          r.put("type", "indexing");
          r.put("venue_id", t.venue_id);
          r.put_u64("k_override", t.k_override.value_or(0));
          std::vector<CanonicalRecord> wl;
          for (const auto& a : t.reviewer_whitelist) wl.push_back(CanonicalRecord().put("a", a));
          r.put_list("whitelist", wl);
          r.put("clawback", format_rational(t.clawback_share));
        }
      },
      terms);
  return r;
}

bool in_unit_interval(const Rational& r) { return r >= Rational{0} && r <= Rational{1}; }

}  // namespace

ContractId derive_contract_id(ContractKind kind, const std::vector<Address>& parties,
                              const ShareTable& shares, TokenAmount stake,
                              const ContractTerms& terms, std::uint64_t nonce) {
  std::vector<CanonicalRecord> ps, ss;
  for (const auto& p : parties) ps.push_back(CanonicalRecord().put("a", p));
  for (const auto& s : shares) {
    ss.push_back(CanonicalRecord().put("a", s.party).put("w", format_rational(s.weight)));
  }
  auto enc = CanonicalRecord()
                 .put_u64("kind", static_cast<std::uint64_t>(kind))
                 .put_list("parties", ps)
                 .put_list("shares", ss)
                 .put_u64("stake", stake)
                 .put("terms", encode_terms(terms))
                 .put_u64("nonce", nonce)
                 .encode();
  return ContractId::from_bytes(Hasher().update("contract").update(enc).finish().bytes);
}

Bytes contract_signing_payload(const ContractId& id) {
  Bytes out;
  auto tag = as_bytes("sign-contract");
  out.insert(out.end(), tag.begin(), tag.end());
  out.insert(out.end(), id.bytes.begin(), id.bytes.end());
  return out;
}

// --- execute_trigger -------------------------------------------------------

namespace {

void require_bound(std::span<const Contract> contracts, ManuscriptKey key) {
  for (const auto& c : contracts) {
    if (c.manuscript != key) {
      throw Error(ErrorCode::StateMismatch,
                  "contract " + c.id.hex() + " is not bound to manuscript " +
                      std::to_string(key));
    }
  }
}

void add_line(std::vector<Payout>& payout, const Address& to, TokenAmount amount) {
  if (!payout.empty() && payout.back().to == to) {
    payout.back().amount += amount;
  } else {
    payout.push_back({to, amount});
  }
}

std::vector<LedgerInstruction> on_confirmed(const ManuscriptConfirmed& ev,
                                            std::span<const Contract> contracts) {
  require_bound(contracts, ev.manuscript);
  if (ev.citation_accounts.empty()) {
    throw Error(ErrorCode::NoCitations, "confirmed manuscript cites nothing");
  }
  std::set<Address> distinct(ev.citation_accounts.begin(), ev.citation_accounts.end());
  if (distinct.size() != ev.citation_accounts.size()) {
    throw Error(ErrorCode::StateMismatch, "duplicate citation accounts");
  }
  TokenAmount pool = 0;
  for (const auto& c : contracts) {
    if (c.state != ContractState::Active && c.state != ContractState::Locked) {
      throw Error(ErrorCode::StateMismatch,
                  "contract " + c.id.hex() + " is " + std::string(to_string(c.state)));
    }
    pool += c.held_stake();
  }
  const TokenAmount per = pool / ev.citation_accounts.size();
  std::vector<Payout> lines;
  for (const auto& a : ev.citation_accounts) {
    if (per > 0) lines.push_back({a, per});
  }
  if (auto rem = pool - per * ev.citation_accounts.size(); rem > 0) {
    lines.push_back({ev.treasury, rem});
  }

  std::vector<LedgerInstruction> out;
  std::size_t line = 0;
  TokenAmount left = lines.empty() ? 0 : lines[0].amount;
  for (const auto& c : contracts) {
    for (const auto& s : c.stakes) {
      if (s.settled) continue;
      ReleaseInstruction rel{s.escrow, {}};
      TokenAmount need = s.amount;
      while (need > 0) {
        auto take = std::min(need, left);
        add_line(rel.payout, lines[line].to, take);
        need -= take;
        left -= take;
        if (left == 0 && ++line < lines.size()) left = lines[line].amount;
      }
      out.emplace_back(std::move(rel));
    }
  }
  return out;
}

std::vector<LedgerInstruction> on_citation(const CitationReceived& ev,
                                           std::span<const Contract> contracts) {
  require_bound(contracts, ev.cited);
  TokenAmount sum = 0;
  for (const auto& p : ev.distribution) sum += p.amount;
  if (sum != ev.amount) {
    throw Error(ErrorCode::PayoutMismatch, "distribution " + std::to_string(sum) +
                                               " != inflow " + std::to_string(ev.amount));
  }
  ContractId trigger;
  for (const auto& c : contracts) {
    if (c.state == ContractState::Cancelled) continue;
    if (c.state != ContractState::Locked && c.state != ContractState::Settled) {
      throw Error(ErrorCode::StateMismatch, "cited manuscript contracts must be locked");
    }
    if (c.kind == ContractKind::Authorship && trigger.is_zero()) trigger = c.id;
  }
  std::vector<LedgerInstruction> out;
  for (const auto& p : ev.distribution) {
    if (p.to == ev.cited_account || p.amount == 0) continue;
    if (trigger.is_zero()) {
      throw Error(ErrorCode::StateMismatch,
                  "manuscript without an authorship contract cannot distribute");
    }
    out.emplace_back(TransferInstruction{ev.cited_account, p.to, p.amount, trigger});
  }
  return out;
}

std::vector<LedgerInstruction> on_withdrawn(const Withdrawn& ev,
                                            std::span<const Contract> contracts) {
  require_bound(contracts, ev.manuscript);
  if (!in_unit_interval(ev.refund_fraction)) {
    throw Error(ErrorCode::InvalidPolicy, "refund fraction outside [0,1]");
  }
  std::vector<LedgerInstruction> out;
  for (const auto& c : contracts) {
    if (c.state == ContractState::Locked || c.state == ContractState::Settled) {
      throw Error(ErrorCode::StateMismatch, "contract already locked");
    }
    for (const auto& s : c.stakes) {
      if (s.settled) continue;
      ReleaseInstruction rel{s.escrow, {}};
      if (s.role == StakeRole::Author || s.role == StakeRole::Covered) {
        auto back = floor_mul(s.amount, ev.refund_fraction);
        if (back > 0) rel.payout.push_back({s.owner, back});
        if (s.amount - back > 0) rel.payout.push_back({ev.treasury, s.amount - back});
      } else {
        rel.payout.push_back({s.owner, s.amount});
      }
      out.emplace_back(std::move(rel));
    }
  }
  return out;
}

}  // namespace

std::vector<LedgerInstruction> execute_trigger(const TriggerEvent& event,
                                               std::span<const Contract> contracts) {
  return std::visit(
      [&](const auto& ev) -> std::vector<LedgerInstruction> {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, ManuscriptConfirmed>) {
          return on_confirmed(ev, contracts);
        } else if constexpr (std::is_same_v<T, CitationReceived>) {
          return on_citation(ev, contracts);
        } else {
          return on_withdrawn(ev, contracts);
        }
      },
      event);
}

// --- ContractBook ----------------------------------------------------------

const Contract& ContractBook::propose_checked(ProposeRequest req) {
  if (req.parties.empty()) throw Error(ErrorCode::InvalidShares, "no parties");
  std::set<Address> distinct(req.parties.begin(), req.parties.end());
  if (distinct.size() != req.parties.size()) {
    throw Error(ErrorCode::InvalidShares, "duplicate party");
  }
  if (req.shares.size() != req.parties.size()) {
    throw Error(ErrorCode::InvalidShares, "one share per party required");
  }
  for (std::size_t i = 0; i < req.shares.size(); ++i) {
    if (req.shares[i].party != req.parties[i] || req.shares[i].weight <= Rational{0}) {
      throw Error(ErrorCode::InvalidShares, "shares must be positive and follow party order");
    }
  }
  if (!shares_sum_to_one(req.shares)) {
    throw Error(ErrorCode::InvalidShares, "shares must sum to exactly 1");
  }

  auto terms_are = [&](auto tag) {
    using T = decltype(tag);
    if (!std::holds_alternative<T>(req.terms)) {
      throw Error(ErrorCode::InvalidTerms, "terms do not match contract kind");
    }
    return std::get<T>(req.terms);
  };
  auto single_party = [&] {
    if (req.parties.size() != 1) {
      throw Error(ErrorCode::InvalidShares,
                  std::string(to_string(req.kind)) + " contracts have exactly one party");
    }
  };

  switch (req.kind) {
    case ContractKind::Authorship:
      terms_are(AuthorshipTerms{});
      if (req.stake_required == 0) throw Error(ErrorCode::ZeroStake, "zero author stake");
      if (auto venue = std::get<AuthorshipTerms>(req.terms).venue) {
        auto it = contracts_.find(*venue);
        if (it == contracts_.end() || it->second.kind != ContractKind::Indexing) {
          throw Error(ErrorCode::InvalidTerms, "venue must be an indexing contract");
        }
      }
      break;
    case ContractKind::Review:
      terms_are(ReviewTerms{});
      single_party();
      if (req.stake_required == 0) throw Error(ErrorCode::ZeroStake, "zero review stake");
      if (!req.manuscript) throw Error(ErrorCode::InvalidTerms, "review needs a manuscript");
      break;
    case ContractKind::Funding: {
      auto t = terms_are(FundingTerms{});
      single_party();
      if (!in_unit_interval(t.covered_fraction) || !in_unit_interval(t.clawback_share)) {
        throw Error(ErrorCode::InvalidTerms, "fractions must lie in [0,1]");
      }
      if (t.target) {
        auto it = contracts_.find(*t.target);
        if (it == contracts_.end() || it->second.kind != ContractKind::Authorship) {
          throw Error(ErrorCode::InvalidTerms, "funding target must be an authorship contract");
        }
        if (!it->second.signatures.empty() || it->second.state != ContractState::Proposed) {
          throw Error(ErrorCode::StateMismatch, "target authorship already being signed");
        }
        if (req.stake_required != 0 || t.covered_fraction == Rational{0}) {
          throw Error(ErrorCode::InvalidTerms,
                      "covering funding has a covered fraction and no own stake");
        }
      } else {
        if (t.covered_fraction != Rational{0}) {
          throw Error(ErrorCode::InvalidTerms, "covered fraction needs a target");
        }
        if (req.stake_required == 0) throw Error(ErrorCode::ZeroStake, "zero funding stake");
      }
      break;
    }
    case ContractKind::Indexing: {
      auto t = terms_are(IndexingTerms{});
      single_party();
      if (!in_unit_interval(t.clawback_share)) {
        throw Error(ErrorCode::InvalidTerms, "clawback must lie in [0,1]");
      }
      if (t.k_override && *t.k_override == 0) {
        throw Error(ErrorCode::InvalidTerms, "K override must be at least 1");
      }
      break;
    }
  }

  Contract c;
  c.kind = req.kind;
  c.parties = std::move(req.parties);
  c.shares = std::move(req.shares);
  c.stake_required = req.stake_required;
  c.manuscript = req.manuscript;
  c.terms = std::move(req.terms);
  c.nonce = nonce_++;
  c.id = derive_contract_id(c.kind, c.parties, c.shares, c.stake_required, c.terms, c.nonce);
  auto id = c.id;
  return contracts_.emplace(id, std::move(c)).first->second;
}

Contract& ContractBook::at(const ContractId& id) {
  auto it = contracts_.find(id);
  if (it == contracts_.end()) throw Error(ErrorCode::UnknownContract, "unknown contract " + id.hex());
  return it->second;
}

const Contract& ContractBook::get(const ContractId& id) const {
  auto it = contracts_.find(id);
  if (it == contracts_.end()) throw Error(ErrorCode::UnknownContract, "unknown contract " + id.hex());
  return it->second;
}

void ContractBook::transition(Contract& c, ContractAction action) {
  auto next = next_state(c.state, action);
  if (!next) {
    throw Error(ErrorCode::StateMismatch, "contract cannot " + std::string(to_string(action)) +
                                              " from " + std::string(to_string(c.state)));
  }
  c.state = *next;
}

std::vector<LockInstruction> ContractBook::required_locks(const Contract& c,
                                                          const Address& party) const {
  std::vector<LockInstruction> out;
  auto push = [&](TokenAmount amount) {
    if (amount > 0) out.push_back({party, amount, c.id});
  };
  switch (c.kind) {
    case ContractKind::Authorship: {
      TokenAmount covered = 0;
      for (const auto& [_, f] : contracts_) {
        if (f.kind != ContractKind::Funding || f.state != ContractState::Active) continue;
        const auto& t = std::get<FundingTerms>(f.terms);
        if (t.target == c.id) covered += floor_mul(c.stake_required, t.covered_fraction);
      }
      covered = std::min(covered, c.stake_required);
      const TokenAmount rest = c.stake_required - covered;
      TokenAmount assigned = 0;
      TokenAmount mine = 0;
      for (const auto& s : c.shares) {
        auto due = floor_mul(rest, s.weight);
        assigned += due;
        if (s.party == party) mine = due;
      }
      // Rounding residue is owed by the first listed author.
      if (party == c.parties.front()) mine += rest - assigned;
      push(mine);
      break;
    }
    case ContractKind::Review:
    case ContractKind::Indexing:
      push(c.stake_required);
      break;
    case ContractKind::Funding: {
      const auto& t = std::get<FundingTerms>(c.terms);
      if (t.target) {
        push(floor_mul(get(*t.target).stake_required, t.covered_fraction));
      } else {
        push(c.stake_required);
      }
      break;
    }
  }
  return out;
}

const Contract& ContractBook::sign(const ContractId& id, const KeyPair& party, Ledger& ledger) {
  auto& c = at(id);
  const auto addr = party.address();
  if (!c.is_party(addr)) throw Error(ErrorCode::NotAParty, "signer is not a party");
  switch (c.state) {
    case ContractState::Active:
      throw Error(ErrorCode::AlreadyActive, "contract already active");
    case ContractState::Locked:
    case ContractState::Settled:
      throw Error(ErrorCode::AlreadyLocked, "contract is locked");
    case ContractState::Cancelled:
      throw Error(ErrorCode::StateMismatch, "contract was cancelled");
    default:
      break;
  }
  if (c.signatures.contains(addr)) {
    throw Error(ErrorCode::StateMismatch, "party already signed");
  }
  if (c.kind == ContractKind::Funding) {
    if (auto target = std::get<FundingTerms>(c.terms).target) {
      const auto& t = get(*target);
      if (!t.signatures.empty() || t.state != ContractState::Proposed) {
        throw Error(ErrorCode::StateMismatch, "target authorship already being signed");
      }
    }
  }
  auto sig = party.sign(contract_signing_payload(c.id));
  if (!verify_signature(party.public_key(), contract_signing_payload(c.id), sig)) {
    throw Error(ErrorCode::BadSignature, "contract signature does not verify");
  }

  auto locks = required_locks(c, addr);
  TokenAmount due = 0;
  for (const auto& l : locks) due += l.amount;
  if (ledger.balance_of(addr).spendable < due) {
    throw Error(ErrorCode::InsufficientFunds,
                "stake of " + std::to_string(due) + " exceeds spendable balance");
  }
  StakeRole role = StakeRole::Remark;
  if (c.kind == ContractKind::Authorship) role = StakeRole::Author;
  if (c.kind == ContractKind::Review) role = StakeRole::Reviewer;
  if (c.kind == ContractKind::Funding && std::get<FundingTerms>(c.terms).target) {
    role = StakeRole::Covered;
  }
  for (const auto& l : locks) {
    auto escrow = ledger.escrow_lock(l.owner, l.amount, l.contract, party);
    c.stakes.push_back({escrow, l.owner, l.amount, role, false});
  }
  c.signatures[addr] = sig;
  transition(c, c.all_signed() ? ContractAction::SignFinal : ContractAction::SignPartial);
  return c;
}

void ContractBook::refund_all(Contract& c, Ledger& ledger) {
  for (auto& s : c.stakes) {
    if (s.settled) continue;
    Payout back{s.owner, s.amount};
    ledger.escrow_release(s.escrow, std::span(&back, 1));
    s.settled = true;
  }
}

const Contract& ContractBook::cancel(const ContractId& id, const std::vector<Address>& quorum,
                                     Ledger& ledger) {
  auto& c = at(id);
  if (c.state == ContractState::Locked || c.state == ContractState::Settled) {
    throw Error(ErrorCode::AlreadyLocked, "contract is locked");
  }
  if (c.state == ContractState::Cancelled) {
    throw Error(ErrorCode::StateMismatch, "contract already cancelled");
  }
  if (quorum.empty()) throw Error(ErrorCode::NotAParty, "empty cancellation quorum");
  std::set<Address> q(quorum.begin(), quorum.end());
  for (const auto& a : q) {
    if (!c.is_party(a)) throw Error(ErrorCode::NotAParty, "quorum member is not a party");
  }
  if (c.state == ContractState::Active && q.size() != c.parties.size()) {
    throw Error(ErrorCode::StateMismatch, "active contracts need every party to cancel");
  }
  if (c.engaged) throw Error(ErrorCode::StateMismatch, "contract already acted upon");
  if (c.manuscript && c.kind != ContractKind::Review) {
    throw Error(ErrorCode::StateMismatch,
                "contract is bound to a manuscript; withdraw the manuscript instead");
  }
  if (c.kind == ContractKind::Funding) {
    if (auto target = std::get<FundingTerms>(c.terms).target) {
      if (!get(*target).signatures.empty()) {
        throw Error(ErrorCode::StateMismatch, "covered authorship already signed");
      }
    }
  }
  if (c.kind == ContractKind::Authorship) {
    // Covering funding contracts fall with the authorship they cover.
    for (auto& [_, f] : contracts_) {
      if (f.kind != ContractKind::Funding || f.state == ContractState::Cancelled) continue;
      if (std::get<FundingTerms>(f.terms).target == c.id) {
        refund_all(f, ledger);
        transition(f, ContractAction::Cancel);
      }
    }
  }
  refund_all(c, ledger);
  transition(c, ContractAction::Cancel);
  return c;
}

void ContractBook::bind(const ContractId& id, ManuscriptKey manuscript) {
  auto& c = at(id);
  if (c.manuscript && *c.manuscript != manuscript) {
    throw Error(ErrorCode::StateMismatch, "contract already bound to another manuscript");
  }
  c.manuscript = manuscript;
  if (c.kind == ContractKind::Authorship) {
    for (auto& [_, f] : contracts_) {
      if (f.kind == ContractKind::Funding && f.state == ContractState::Active &&
          std::get<FundingTerms>(f.terms).target == id) {
        f.manuscript = manuscript;
      }
    }
  }
}

void ContractBook::mark_engaged(const ContractId& id) { at(id).engaged = true; }

void ContractBook::lock_manuscript(ManuscriptKey manuscript, Ledger& ledger) {
  for (auto& [_, c] : contracts_) {
    if (c.manuscript != manuscript) continue;
    if (c.state == ContractState::Active) {
      transition(c, ContractAction::Lock);
    } else if (c.state == ContractState::Proposed || c.state == ContractState::Signed) {
      refund_all(c, ledger);
      transition(c, ContractAction::Cancel);
    }
  }
}

void ContractBook::settle_manuscript(ManuscriptKey manuscript) {
  for (auto& [_, c] : contracts_) {
    if (c.manuscript == manuscript && c.state == ContractState::Locked) {
      transition(c, ContractAction::Settle);
    }
  }
}

void ContractBook::apply(std::span<const LedgerInstruction> instructions, Ledger& ledger) {
  for (const auto& ins : instructions) {
    if (const auto* rel = std::get_if<ReleaseInstruction>(&ins)) {
      ledger.escrow_release(rel->escrow, rel->payout);
      for (auto& [_, c] : contracts_) {
        for (auto& s : c.stakes) {
          if (s.escrow == rel->escrow) s.settled = true;
        }
      }
    } else if (const auto* tr = std::get_if<TransferInstruction>(&ins)) {
      ledger.system_transfer(tr->from, tr->to, tr->amount, tr->trigger);
    } else {
      throw Error(ErrorCode::StateMismatch, "locks are executed by the signing party");
    }
  }
}

std::vector<Contract> ContractBook::bound_to(ManuscriptKey manuscript) const {
  std::vector<Contract> out;
  for (const auto& [_, c] : contracts_) {
    if (c.manuscript == manuscript) out.push_back(c);
  }
  return out;
}

}  // namespace reviewchain
