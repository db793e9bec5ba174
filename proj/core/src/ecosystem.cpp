#include "reviewchain/ecosystem.hpp"

#include <algorithm>
#include <sstream>

namespace reviewchain {

Ecosystem::Ecosystem(PolicyConfig policy, std::uint64_t seed)
    : policy_((policy.validate(), std::move(policy))),
      seed_(seed),
      rng_(seed),
      treasury_(KeyPair::from_seed(rng_.next())),
      ledger_(Ledger::init(policy_.total_supply, treasury_)) {
  const auto& g = graph_.init_genesis(sha256("genesis manuscript"), ledger_.tick());
  ledger_.register_system_account(g.account());
}

template <typename Fn>
decltype(auto) Ecosystem::transact(Fn&& fn) {
  Ecosystem before = *this;
  try {
    return fn();
  } catch (...) {
    *this = std::move(before);
    throw;
  }
}

const KeyPair& Ecosystem::key_of(const Address& who) const {
  if (!identities_.contains(who)) throw Error(ErrorCode::UnknownParty, "unknown user " + who.hex());
  return identities_.account(who).keypair;
}

const UserAccount& Ecosystem::create_user(const Profile& profile) {
  return transact([&]() -> const UserAccount& {
    return identities_.create_account(profile, ledger_, rng_);
  });
}

const Contract& Ecosystem::propose_contract(ProposeRequest req) {
  return transact([&]() -> const Contract& {
    if (req.manuscript && !graph_.contains(*req.manuscript)) {
      throw Error(ErrorCode::UnknownManuscript, "unknown manuscript");
    }
    if (req.kind == ContractKind::Review && req.manuscript) {
      const auto& node = graph_.node(*req.manuscript);
      if (node.state != NodeState::UnderReview) {
        throw Error(ErrorCode::NotUnderReview, "manuscript is not under review");
      }
      if (node.authorship.has_author(req.parties.front())) {
        throw Error(ErrorCode::ReviewerIsAuthor, "authors cannot review their own manuscript");
      }
      if (auto venue = venue_terms(node, contracts_); venue && !venue->reviewer_whitelist.empty()) {
        const auto& wl = venue->reviewer_whitelist;
        if (std::find(wl.begin(), wl.end(), req.parties.front()) == wl.end()) {
          throw Error(ErrorCode::InvalidTerms, "reviewer is not on the venue whitelist");
        }
      }
    }
    return contracts_.propose(std::move(req),
                              [&](const Address& a) { return identities_.contains(a); });
  });
}

const Contract& Ecosystem::sign_contract(const ContractId& id, const Address& signer) {
  return transact([&]() -> const Contract& {
    if (!contracts_.contains(id)) throw Error(ErrorCode::UnknownContract, "unknown contract");
    return contracts_.sign(id, key_of(signer), ledger_);
  });
}

const Contract& Ecosystem::cancel_contract(const ContractId& id,
                                           const std::vector<Address>& quorum) {
  return transact([&]() -> const Contract& {
    if (!contracts_.contains(id)) throw Error(ErrorCode::UnknownContract, "unknown contract");
    return contracts_.cancel(id, quorum, ledger_);
  });
}

namespace {

std::vector<ManuscriptId> ids_of(const PublicationGraph& graph,
                                 const std::vector<ManuscriptKey>& keys) {
  std::vector<ManuscriptId> out;
  for (auto k : keys) out.push_back(graph.node(k).id);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

const ManuscriptNode& Ecosystem::submit(const SubmitArgs& args) {
  return transact([&]() -> const ManuscriptNode& {
    SubmitRequest req;
    req.authors = args.authors;
    req.content_digest = args.content_digest;
    req.citations = ids_of(graph_, args.citations);
    req.keywords = args.keywords;
    req.authorship_contract = args.authorship_contract;
    if (!contracts_.contains(args.authorship_contract)) {
      throw Error(ErrorCode::UnknownContract, "unknown authorship contract");
    }
    const auto key = graph_.next_key();
    const auto digest = version_digest(
        key, req.authors, PublicationGraph::authorship_stake(contracts_, req.authorship_contract),
        req.authorship_contract, 1, req.content_digest, req.citations, req.keywords);
    for (const auto& a : req.authors) req.signatures[a.author] = key_of(a.author).sign(digest.bytes);
    const auto& node = graph_.submit(req, contracts_, ledger_.registry(), ledger_.tick());
    ledger_.register_system_account(node.account());
    return node;
  });
}

const ManuscriptNode& Ecosystem::revise(ManuscriptKey key, const ReviseArgs& args) {
  return transact([&]() -> const ManuscriptNode& {
    const auto& node = graph_.node(key);
    ReviseRequest req;
    req.content_digest = args.content_digest;
    if (args.citations) req.citations = ids_of(graph_, *args.citations);
    req.keywords = args.keywords;
    req.authorship_contract = args.authorship_contract;
    req.authors = args.authors;
    const auto& authors = args.authors ? *args.authors : node.authorship.authors;
    const auto contract = args.authorship_contract.value_or(node.authorship.contract);
    if (!contracts_.contains(contract)) {
      throw Error(ErrorCode::UnknownContract, "unknown authorship contract");
    }
    const auto digest = version_digest(
        key, authors, PublicationGraph::authorship_stake(contracts_, contract), contract,
        node.meta.version + 1, req.content_digest, req.citations.value_or(node.citations),
        req.keywords.value_or(node.meta.keywords));
    for (const auto& a : authors) req.signatures[a.author] = key_of(a.author).sign(digest.bytes);
    return graph_.revise(key, req, contracts_, ledger_.registry(), ledger_.tick());
  });
}

const Contract* Ecosystem::review_contract(ManuscriptKey key, const Address& reviewer) const {
  for (const auto& [_, c] : contracts_.all()) {
    if (c.kind == ContractKind::Review && c.manuscript == key && c.is_party(reviewer) &&
        c.state == ContractState::Active) {
      return &c;
    }
  }
  return nullptr;
}

const ManuscriptNode& Ecosystem::review(ManuscriptKey key, const Address& reviewer,
                                        Verdict verdict, const std::string& report) {
  return transact([&]() -> const ManuscriptNode& {
    const auto& node = graph_.node(key);
    const auto& keypair = key_of(reviewer);
    const auto* contract = review_contract(key, reviewer);
    if (contract == nullptr) {
      if (node.state != NodeState::UnderReview) {
        throw Error(ErrorCode::NotUnderReview, "manuscript is not under review");
      }
      throw Error(ErrorCode::NoReviewContract, "reviewer holds no active review contract");
    }
    ReviewRecord rec;
    rec.reviewer = reviewer;
    rec.review_contract = contract->id;
    rec.stake = contract->held_stake();
    rec.report = report;
    rec.verdict = verdict;
    rec.version_signed = node.meta.version;
    rec.subject = version_digest(node);
    rec.signature = keypair.sign(rec.signing_payload());
    graph_.record_review(key, rec, contracts_, ledger_.registry());
    identities_.record_review_completed(reviewer);
    if (tally_confirmations(graph_.node(key)) >=
        required_confirmations(graph_.node(key), contracts_, policy_)) {
      confirm_and_settle(key);
    }
    return graph_.node(key);
  });
}

const ManuscriptNode& Ecosystem::attach_remark(ManuscriptKey key, const Address& agent,
                                               const ContractId& contract, RemarkKind kind) {
  return transact([&]() -> const ManuscriptNode& {
    graph_.node(key);
    if (!contracts_.contains(contract)) throw Error(ErrorCode::UnknownContract, "unknown contract");
    const auto& c = contracts_.get(contract);
    RemarkEntry rem;
    rem.agent = agent;
    rem.kind = kind;
    rem.contract = contract;
    rem.stake = c.held_stake();
    rem.terms_digest = Hasher().update("remark-terms").update(contract).finish();
    rem.signature = key_of(agent).sign(rem.signing_payload(key));
    return graph_.attach_remark(key, rem, contracts_, ledger_.registry());
  });
}

bool Ecosystem::try_confirm(ManuscriptKey key) {
  return transact([&] {
    const auto& node = graph_.node(key);
    if (node.state != NodeState::UnderReview) return false;
    if (tally_confirmations(node) < required_confirmations(node, contracts_, policy_)) return false;
    confirm_and_settle(key);
    return true;
  });
}

namespace {

std::vector<Contract> live_bound(const ContractBook& book, ManuscriptKey key) {
  auto all = book.bound_to(key);
  std::erase_if(all, [](const Contract& c) { return c.state == ContractState::Cancelled; });
  return all;
}

}  // namespace

void Ecosystem::confirm_and_settle(ManuscriptKey key) {
  // Review contracts nobody acted on are returned before the pool forms.
  for (const auto& c : contracts_.bound_to(key)) {
    if (c.kind == ContractKind::Review && !c.engaged &&
        (c.state == ContractState::Active || c.state == ContractState::Proposed)) {
      contracts_.cancel(c.id, c.parties, ledger_);
    }
  }
  graph_.mark_confirmed(key);
  contracts_.lock_manuscript(key, ledger_);

  const auto citing = graph_.node(key);
  std::vector<Address> accounts;
  for (const auto& id : citing.citations) accounts.push_back(graph_.find(id)->account());

  const auto locked = live_bound(contracts_, key);
  TokenAmount pool = 0;
  for (const auto& c : locked) pool += c.held_stake();

  SettlementReport report;
  report.kind = SettlementKind::Confirmation;
  report.manuscript = key;
  report.id = citing.id;
  report.pool = pool;

  auto release = execute_trigger(ManuscriptConfirmed{key, accounts, ledger_.treasury()}, locked);
  contracts_.apply(release, ledger_);

  const TokenAmount per = pool / citing.citations.size();
  if (auto rem = pool - per * citing.citations.size(); rem > 0) {
    report.per_beneficiary.push_back({key, {ledger_.treasury(), rem, BeneficiaryClass::Treasury}});
  }
  for (const auto& id : citing.citations) {
    const auto& cited = *graph_.find(id);
    report.per_citation.push_back({cited.key, cited.id, per});
    if (per == 0) continue;
    auto dist = distribution_for_citation(cited, per, citing, contracts_, policy_,
                                          ledger_.treasury());
    std::vector<Payout> payout;
    for (const auto& b : dist) {
      payout.push_back({b.to, b.amount});
      report.per_beneficiary.push_back({cited.key, b});
    }
    auto transfers = execute_trigger(
        CitationReceived{cited.key, cited.account(), key, per, std::move(payout)},
        live_bound(contracts_, cited.key));
    contracts_.apply(transfers, ledger_);
  }
  contracts_.settle_manuscript(key);

  if (report.total() != pool) {
    throw Error(ErrorCode::PayoutMismatch, "settlement does not add up to the pool");
  }
  report.normalize();
  reports_.push_back(std::move(report));
}

const SettlementReport& Ecosystem::withdraw(ManuscriptKey key,
                                            const std::vector<Address>& signers) {
  return transact([&]() -> const SettlementReport& {
    const auto node = graph_.node(key);
    if (node.state != NodeState::UnderReview) {
      throw Error(ErrorCode::LockedManuscript, "manuscript is " + std::string(to_string(node.state)));
    }
    const auto payload = withdrawal_payload(node);
    std::set<Address> signed_by;
    for (const auto& s : signers) {
      const auto& kp = key_of(s);
      if (!verify_signature(kp.public_key(), payload, kp.sign(payload))) {
        throw Error(ErrorCode::BadSignature, "withdrawal signature does not verify");
      }
      signed_by.insert(s);
    }
    for (const auto& a : node.authorship.authors) {
      if (!signed_by.contains(a.author)) {
        throw Error(ErrorCode::MissingSignature, "author " + a.author.hex() + " has not signed");
      }
    }

    auto live = live_bound(contracts_, key);
    std::erase_if(live, [](const Contract& c) { return c.state != ContractState::Active; });

    SettlementReport report;
    report.kind = SettlementKind::Withdrawal;
    report.manuscript = key;
    for (const auto& c : live) report.pool += c.held_stake();
    report.per_beneficiary = withdrawal_lines(node, live, policy_, ledger_.treasury());

    auto refunds = execute_trigger(Withdrawn{key, policy_.refund, ledger_.treasury()}, live);
    contracts_.apply(refunds, ledger_);
    contracts_.lock_manuscript(key, ledger_);
    contracts_.settle_manuscript(key);
    report.id = graph_.mark_withdrawn(key).id;

    if (report.total() != report.pool) {
      throw Error(ErrorCode::PayoutMismatch, "withdrawal does not add up to the stakes");
    }
    report.normalize();
    reports_.push_back(std::move(report));
    return reports_.back();
  });
}

std::vector<Address> Ecosystem::select_reviewers(ManuscriptKey key) const {
  return reviewchain::select_reviewers(graph_.node(key), identities_, contracts_, policy_, seed_);
}

std::string Ecosystem::audit_log() const {
  std::string out;
  for (std::size_t i = 0; i < reports_.size(); ++i) {
    for (const auto& line : reports_[i].audit_lines(i + 1)) {
      out += line;
      out += '\n';
    }
  }
  return out;
}

Hash32 Ecosystem::state_digest() const {
  Hasher h;
  h.update("state").update(ledger_.export_text()).update(ledger_.registry().export_text());
  h.update(graph_.export_nodelink()).update(audit_log());
  for (const auto& [id, c] : contracts_.all()) {
    h.update(id).update_u64(static_cast<std::uint64_t>(c.state)).update_u64(c.engaged);
    for (const auto& s : c.stakes) h.update(s.escrow).update_u64(s.settled);
  }
  for (const auto& addr : identities_.order()) {
    h.update(addr).update_u64(identities_.account(addr).reviews_completed);
  }
  h.update_u64(rng_.counter());
  return h.finish();
}

Report Ecosystem::verify() const {
  auto r = verify_ledger(ledger_);
  r.merge(verify_graph(graph_, ledger_.registry()));
  return r;
}

}  // namespace reviewchain
