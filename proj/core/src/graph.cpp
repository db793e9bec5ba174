#include "reviewchain/graph.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace reviewchain {

using nlohmann::json;

std::string_view to_string(Verdict v) {
  return v == Verdict::Confirm ? "confirm" : "revise";
}

std::string_view to_string(RemarkKind k) {
  switch (k) {
    case RemarkKind::Funding: return "funding";
    case RemarkKind::Proofreading: return "proofreading";
    case RemarkKind::Indexing: return "indexing";
    case RemarkKind::Other: return "other";
  }
  return "?";
}

std::string_view to_string(NodeState s) {
  switch (s) {
    case NodeState::UnderReview: return "under-review";
    case NodeState::Confirmed: return "confirmed";
    case NodeState::Withdrawn: return "withdrawn";
  }
  return "?";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "confirm") return Verdict::Confirm;
  if (text == "revise") return Verdict::Revise;
  throw Error(ErrorCode::ParseError, "unknown verdict: " + std::string(text));
}

RemarkKind parse_remark_kind(std::string_view text) {
  for (auto k : {RemarkKind::Funding, RemarkKind::Proofreading, RemarkKind::Indexing,
                 RemarkKind::Other}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown remark kind: " + std::string(text));
}

NodeState parse_node_state(std::string_view text) {
  for (auto s : {NodeState::UnderReview, NodeState::Confirmed, NodeState::Withdrawn}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::ParseError, "unknown node state: " + std::string(text));
}

bool AuthorshipComponent::has_author(const Address& a) const {
  return std::any_of(authors.begin(), authors.end(),
                     [&](const AuthorShare& s) { return s.author == a; });
}

Bytes ReviewRecord::signing_payload() const {
  return CanonicalRecord()
      .put("domain", "review")
      .put("subject", subject)
      .put_u64("version", version_signed)
      .put("report", report)
      .put_u64("verdict", static_cast<std::uint64_t>(verdict))
      .put("reviewer", reviewer)
      .put("contract", review_contract)
      .put_u64("stake", stake)
      .encode();
}

Bytes RemarkEntry::signing_payload(ManuscriptKey key) const {
  return CanonicalRecord()
      .put("domain", "remark")
      .put_u64("manuscript", key)
      .put("agent", agent)
      .put_u64("kind", static_cast<std::uint64_t>(kind))
      .put("contract", contract)
      .put_u64("stake", stake)
      .put("terms", terms_digest)
      .encode();
}

Address manuscript_account(ManuscriptKey key) {
  return Address::from_bytes(
      Hasher().update("manuscript-account").update_u64(key).finish().bytes);
}

Address ManuscriptNode::account() const { return manuscript_account(key); }

TokenAmount ManuscriptNode::remark_pool() const {
  TokenAmount sum = 0;
  for (const auto& r : remarks) sum += r.stake;
  return sum;
}

// --- hashing ---------------------------------------------------------------

Hash32 merkle_root(std::vector<ManuscriptId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.empty()) return sha256(std::string_view{});
  std::vector<Hash32> level;
  level.reserve(ids.size());
  for (const auto& id : ids) {
    const std::uint8_t leaf_tag = 0x00;
    level.push_back(Hasher().update(ByteView(&leaf_tag, 1)).update(id).finish());
  }
  std::sort(level.begin(), level.end());
  while (level.size() > 1) {
    if (level.size() % 2 == 1) level.push_back(level.back());
    std::vector<Hash32> up;
    up.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      const std::uint8_t inner_tag = 0x01;
      up.push_back(Hasher()
                       .update(ByteView(&inner_tag, 1))
                       .update(level[i])
                       .update(level[i + 1])
                       .finish());
    }
    level = std::move(up);
  }
  return level.front();
}

namespace {

CanonicalRecord encode_authors(const std::vector<AuthorShare>& authors) {
  std::vector<CanonicalRecord> items;
  for (const auto& a : authors) {
    items.push_back(CanonicalRecord().put("address", a.author).put("share", format_rational(a.share)));
  }
  CanonicalRecord r;
  r.put_list("list", items);
  return r;
}

std::vector<CanonicalRecord> encode_ids(const std::vector<ManuscriptId>& ids) {
  std::vector<CanonicalRecord> out;
  for (const auto& id : ids) out.push_back(CanonicalRecord().put("id", id));
  return out;
}

std::vector<CanonicalRecord> encode_keywords(const std::set<std::string>& kws) {
  std::vector<CanonicalRecord> out;
  for (const auto& k : kws) out.push_back(CanonicalRecord().put("k", k));
  return out;
}

std::vector<CanonicalRecord> encode_signatures(const std::map<Address, Signature>& sigs) {
  std::vector<CanonicalRecord> out;
  for (const auto& [a, s] : sigs) {
    out.push_back(CanonicalRecord().put("address", a).put("sig", Bytes(s.begin(), s.end())));
  }
  return out;
}

}  // namespace

Bytes canonical_encoding(const ManuscriptNode& node) {
  if (node.meta.version == 0) {
    throw Error(ErrorCode::MalformedComponent, "version must be at least 1");
  }
  CanonicalRecord authorship;
  authorship.put("authors", encode_authors(node.authorship.authors))
      .put_u64("author_stake", node.authorship.author_stake)
      .put("contract", node.authorship.contract)
      .put_list("signatures", encode_signatures(node.authorship.signatures));

  std::vector<CanonicalRecord> confirmations;
  for (const auto& r : node.confirmations) {
    confirmations.push_back(CanonicalRecord()
                                .put("reviewer", r.reviewer)
                                .put("review_contract", r.review_contract)
                                .put_u64("stake", r.stake)
                                .put("report", r.report)
                                .put_u64("verdict", static_cast<std::uint64_t>(r.verdict))
                                .put_u64("version_signed", r.version_signed)
                                .put("subject", r.subject)
                                .put("signature", Bytes(r.signature.begin(), r.signature.end())));
  }
  std::vector<CanonicalRecord> remarks;
  for (const auto& r : node.remarks) {
    remarks.push_back(CanonicalRecord()
                          .put("agent", r.agent)
                          .put_u64("kind", static_cast<std::uint64_t>(r.kind))
                          .put("contract", r.contract)
                          .put_u64("stake", r.stake)
                          .put("terms_digest", r.terms_digest)
                          .put("signature", Bytes(r.signature.begin(), r.signature.end())));
  }
  CanonicalRecord meta;
  meta.put_u64("version", node.meta.version)
      .put_u64("timestamp", node.meta.timestamp)
      .put("citation_merkle_root", node.meta.citation_merkle_root)
      .put("content_digest", node.meta.content_digest)
      .put_list("keywords", encode_keywords(node.meta.keywords));

  return CanonicalRecord()
      .put_u64("key", node.key)
      .put_u64("genesis", node.genesis ? 1 : 0)
      .put_u64("state", static_cast<std::uint64_t>(node.state))
      .put("authorship", authorship)
      .put_list("confirmations", confirmations)
      .put_list("remarks", remarks)
      .put("meta", meta)
      .put_list("citations", encode_ids(node.citations))
      .encode();
}

ManuscriptId canonical_hash(const ManuscriptNode& node) {
  return ManuscriptId::from_bytes(
      Hasher().update("manuscript").update(canonical_encoding(node)).finish().bytes);
}

Hash32 version_digest(ManuscriptKey key, const std::vector<AuthorShare>& authors,
                      TokenAmount author_stake, const ContractId& contract,
                      std::uint32_t version, const Hash32& content_digest,
                      const std::vector<ManuscriptId>& citations,
                      const std::set<std::string>& keywords) {
  auto enc = CanonicalRecord()
                 .put_u64("key", key)
                 .put("authors", encode_authors(authors))
                 .put_u64("author_stake", author_stake)
                 .put("contract", contract)
                 .put_u64("version", version)
                 .put("content_digest", content_digest)
                 .put("citation_merkle_root", merkle_root(citations))
                 .put_list("keywords", encode_keywords(keywords))
                 .encode();
  return Hasher().update("version").update(enc).finish();
}

Hash32 version_digest(const ManuscriptNode& node) {
  return version_digest(node.key, node.authorship.authors, node.authorship.author_stake,
                        node.authorship.contract, node.meta.version, node.meta.content_digest,
                        node.citations, node.meta.keywords);
}

Bytes withdrawal_payload(const ManuscriptNode& node) {
  return CanonicalRecord()
      .put("domain", "withdraw")
      .put_u64("key", node.key)
      .put("version", version_digest(node))
      .encode();
}

// --- PublicationGraph ------------------------------------------------------

namespace {

std::vector<ManuscriptId> normalized_ids(std::vector<ManuscriptId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void check_author_signatures(const std::vector<AuthorShare>& authors, const Hash32& digest,
                             const std::map<Address, Signature>& sigs,
                             const AccountRegistry& keys) {
  for (const auto& a : authors) {
    auto it = sigs.find(a.author);
    if (it == sigs.end()) {
      throw Error(ErrorCode::MissingSignature, "author " + a.author.hex() + " has not signed");
    }
    auto key = keys.accounts.find(a.author);
    if (key == keys.accounts.end() || !key->second ||
        !verify_signature(*key->second, digest.bytes, it->second)) {
      throw Error(ErrorCode::BadSignature, "author signature does not verify");
    }
  }
  for (const auto& [who, _] : sigs) {
    if (std::none_of(authors.begin(), authors.end(),
                     [&](const AuthorShare& s) { return s.author == who; })) {
      throw Error(ErrorCode::MalformedComponent, "signature from a non-author");
    }
  }
}

void check_shares(const std::vector<AuthorShare>& authors) {
  if (authors.empty()) throw Error(ErrorCode::SharesDontSumToOne, "no authors");
  Rational sum{0};
  std::set<Address> seen;
  for (const auto& a : authors) {
    if (a.share <= Rational{0} || a.share > Rational{1}) {
      throw Error(ErrorCode::SharesDontSumToOne, "share outside (0,1]");
    }
    if (!seen.insert(a.author).second) {
      throw Error(ErrorCode::MalformedComponent, "duplicate author");
    }
    sum += a.share;
  }
  if (sum != Rational{1}) {
    throw Error(ErrorCode::SharesDontSumToOne, "shares sum to " + format_rational(sum));
  }
}

const Contract& usable_authorship(const ContractBook& book, const ContractId& id,
                                  const std::vector<AuthorShare>& authors) {
  if (!book.contains(id)) throw Error(ErrorCode::UnknownContract, "unknown authorship contract");
  const auto& c = book.get(id);
  if (c.kind != ContractKind::Authorship) {
    throw Error(ErrorCode::StateMismatch, "not an authorship contract");
  }
  if (c.shares.size() != authors.size()) {
    throw Error(ErrorCode::StateMismatch, "authors differ from the authorship contract");
  }
  for (std::size_t i = 0; i < authors.size(); ++i) {
    if (c.shares[i].party != authors[i].author || c.shares[i].weight != authors[i].share) {
      throw Error(ErrorCode::StateMismatch, "authors differ from the authorship contract");
    }
  }
  if (c.state == ContractState::Proposed || c.state == ContractState::Signed) {
    throw Error(ErrorCode::MissingSignature, "authorship contract not signed by every author");
  }
  if (c.state != ContractState::Active) {
    throw Error(ErrorCode::StateMismatch, "authorship contract is " + std::string(to_string(c.state)));
  }
  if (c.manuscript) throw Error(ErrorCode::StateMismatch, "authorship contract already used");
  return c;
}

}  // namespace

TokenAmount PublicationGraph::authorship_stake(const ContractBook& book, const ContractId& contract) {
  TokenAmount sum = book.get(contract).held_stake();
  for (const auto& [_, f] : book.all()) {
    if (f.kind == ContractKind::Funding && f.state == ContractState::Active &&
        std::get<FundingTerms>(f.terms).target == contract) {
      sum += f.held_stake();
    }
  }
  return sum;
}

ManuscriptNode& PublicationGraph::at(ManuscriptKey key) {
  if (key >= nodes_.size()) {
    throw Error(ErrorCode::UnknownManuscript, "unknown manuscript " + std::to_string(key));
  }
  return nodes_[key];
}

const ManuscriptNode& PublicationGraph::node(ManuscriptKey key) const {
  if (key >= nodes_.size()) {
    throw Error(ErrorCode::UnknownManuscript, "unknown manuscript " + std::to_string(key));
  }
  return nodes_[key];
}

const ManuscriptNode* PublicationGraph::find(const ManuscriptId& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &nodes_[it->second];
}

void PublicationGraph::rehash(ManuscriptNode& node) {
  by_id_.erase(node.id);
  node.id = canonical_hash(node);
  by_id_[node.id] = node.key;
}

void PublicationGraph::check_citations(const std::vector<ManuscriptId>& citations) const {
  if (citations.empty()) {
    throw Error(ErrorCode::NoCitations, "a manuscript cites at least one node (genesis is always available)");
  }
  for (const auto& c : citations) {
    const auto* target = find(c);
    if (target == nullptr || target->state != NodeState::Confirmed) {
      throw Error(ErrorCode::UnconfirmedCitation, "citation " + c.hex() + " is not confirmed");
    }
  }
}

const ManuscriptNode& PublicationGraph::init_genesis(const Hash32& content_digest, Tick now) {
  if (!nodes_.empty()) throw Error(ErrorCode::GenesisExists, "genesis already initialised");
  ManuscriptNode g;
  g.key = 0;
  g.genesis = true;
  g.state = NodeState::Confirmed;
  g.meta.version = 1;
  g.meta.timestamp = now;
  g.meta.content_digest = content_digest;
  g.meta.citation_merkle_root = merkle_root({});
  nodes_.push_back(std::move(g));
  rehash(nodes_.back());
  return nodes_.back();
}

const ManuscriptNode& PublicationGraph::submit(const SubmitRequest& req, ContractBook& book,
                                               const AccountRegistry& keys, Tick now) {
  if (!has_genesis()) throw Error(ErrorCode::StateMismatch, "graph has no genesis");
  check_shares(req.authors);
  const auto& contract = usable_authorship(book, req.authorship_contract, req.authors);
  auto citations = normalized_ids(req.citations);
  check_citations(citations);

  ManuscriptNode n;
  n.key = next_key();
  n.authorship.authors = req.authors;
  n.authorship.author_stake = authorship_stake(book, contract.id);
  n.authorship.contract = contract.id;
  n.citations = std::move(citations);
  n.meta.version = 1;
  n.meta.timestamp = now;
  n.meta.content_digest = req.content_digest;
  n.meta.keywords = req.keywords;
  n.meta.citation_merkle_root = merkle_root(n.citations);
  check_author_signatures(n.authorship.authors, version_digest(n), req.signatures, keys);
  n.authorship.signatures = req.signatures;

  book.bind(contract.id, n.key);
  nodes_.push_back(std::move(n));
  rehash(nodes_.back());
  return nodes_.back();
}

const ManuscriptNode& PublicationGraph::revise(ManuscriptKey key, const ReviseRequest& req,
                                               ContractBook& book, const AccountRegistry& keys,
                                               Tick now) {
  auto& n = at(key);
  if (n.state != NodeState::UnderReview) {
    throw Error(ErrorCode::LockedManuscript, "manuscript is " + std::string(to_string(n.state)));
  }
  ManuscriptNode next = n;
  if (req.authorship_contract) {
    if (!req.authors) throw Error(ErrorCode::MalformedComponent, "new contract without authors");
    check_shares(*req.authors);
    const auto& c = usable_authorship(book, *req.authorship_contract, *req.authors);
    next.authorship.authors = *req.authors;
    next.authorship.contract = c.id;
    next.authorship.author_stake = authorship_stake(book, c.id);
  } else if (req.authors) {
    throw Error(ErrorCode::MalformedComponent, "author changes need a new authorship contract");
  }
  if (req.citations) {
    next.citations = normalized_ids(*req.citations);
    check_citations(next.citations);
  }
  if (req.keywords) next.meta.keywords = *req.keywords;
  next.meta.version = n.meta.version + 1;
  next.meta.timestamp = now;
  next.meta.content_digest = req.content_digest;
  next.meta.citation_merkle_root = merkle_root(next.citations);
  check_author_signatures(next.authorship.authors, version_digest(next), req.signatures, keys);
  next.authorship.signatures = req.signatures;

  if (req.authorship_contract) book.bind(*req.authorship_contract, key);
  n = std::move(next);
  rehash(n);
  return n;
}

const ManuscriptNode& PublicationGraph::record_review(ManuscriptKey key, const ReviewRecord& record,
                                                      ContractBook& book,
                                                      const AccountRegistry& keys) {
  auto& n = at(key);
  if (n.state != NodeState::UnderReview) {
    throw Error(ErrorCode::NotUnderReview, "manuscript is " + std::string(to_string(n.state)));
  }
  if (n.authorship.has_author(record.reviewer)) {
    throw Error(ErrorCode::ReviewerIsAuthor, "authors cannot review their own manuscript");
  }
  if (!book.contains(record.review_contract)) {
    throw Error(ErrorCode::NoReviewContract, "no review contract");
  }
  const auto& c = book.get(record.review_contract);
  if (c.kind != ContractKind::Review || !c.is_party(record.reviewer) || c.manuscript != key ||
      c.state != ContractState::Active) {
    throw Error(ErrorCode::NoReviewContract, "reviewer has no active review contract for this manuscript");
  }
  if (record.stake != c.stake_required || c.held_stake() != c.stake_required) {
    throw Error(ErrorCode::StateMismatch, "review stake does not match the escrowed stake");
  }
  if (record.version_signed != n.meta.version || record.subject != version_digest(n)) {
    throw Error(ErrorCode::StateMismatch, "review does not cover the current version");
  }
  auto pk = keys.accounts.find(record.reviewer);
  if (pk == keys.accounts.end() || !pk->second ||
      !verify_signature(*pk->second, record.signing_payload(), record.signature)) {
    throw Error(ErrorCode::BadSignature, "review signature does not verify");
  }
  book.mark_engaged(c.id);
  n.confirmations.push_back(record);
  rehash(n);
  return n;
}

const ManuscriptNode& PublicationGraph::attach_remark(ManuscriptKey key, const RemarkEntry& remark,
                                                      ContractBook& book,
                                                      const AccountRegistry& keys) {
  auto& n = at(key);
  if (n.state != NodeState::UnderReview) {
    throw Error(ErrorCode::LockedManuscript, "manuscript is " + std::string(to_string(n.state)));
  }
  if (remark.stake == 0) throw Error(ErrorCode::ZeroStake, "remarks carry a stake");
  const auto& c = book.get(remark.contract);
  const bool funding = c.kind == ContractKind::Funding && !std::get<FundingTerms>(c.terms).target;
  const bool indexing = c.kind == ContractKind::Indexing;
  if (!funding && !indexing) {
    throw Error(ErrorCode::InvalidTerms, "remarks are backed by funding or indexing contracts");
  }
  if ((remark.kind == RemarkKind::Funding && !funding) ||
      (remark.kind == RemarkKind::Indexing && !indexing)) {
    throw Error(ErrorCode::InvalidTerms, "remark kind does not match its contract");
  }
  if (!c.is_party(remark.agent)) throw Error(ErrorCode::NotAParty, "agent is not the contract party");
  if (c.state != ContractState::Active || c.held_stake() != remark.stake) {
    throw Error(ErrorCode::InsufficientFunds, "remark stake is not escrowed");
  }
  if (c.manuscript) throw Error(ErrorCode::StateMismatch, "contract already attached");
  auto pk = keys.accounts.find(remark.agent);
  if (pk == keys.accounts.end() || !pk->second ||
      !verify_signature(*pk->second, remark.signing_payload(key), remark.signature)) {
    throw Error(ErrorCode::BadSignature, "remark signature does not verify");
  }
  book.bind(c.id, key);
  book.mark_engaged(c.id);
  n.remarks.push_back(remark);
  rehash(n);
  return n;
}

const ManuscriptNode& PublicationGraph::mark_confirmed(ManuscriptKey key) {
  auto& n = at(key);
  if (n.state != NodeState::UnderReview) {
    throw Error(ErrorCode::LockedManuscript, "manuscript is " + std::string(to_string(n.state)));
  }
  n.state = NodeState::Confirmed;
  rehash(n);
  return n;
}

const ManuscriptNode& PublicationGraph::mark_withdrawn(ManuscriptKey key) {
  auto& n = at(key);
  if (n.state != NodeState::UnderReview) {
    throw Error(ErrorCode::LockedManuscript, "manuscript is " + std::string(to_string(n.state)));
  }
  n.state = NodeState::Withdrawn;
  rehash(n);
  return n;
}

std::vector<std::pair<ManuscriptId, ManuscriptId>> PublicationGraph::edges() const {
  std::vector<std::pair<ManuscriptId, ManuscriptId>> out;
  for (const auto& n : nodes_) {
    for (const auto& c : n.citations) out.emplace_back(n.id, c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- exports ---------------------------------------------------------------

namespace {

json node_to_json(const ManuscriptNode& n) {
  json authors = json::array();
  for (const auto& a : n.authorship.authors) {
    authors.push_back({{"address", a.author.hex()}, {"share", format_rational(a.share)}});
  }
  json sigs = json::object();
  for (const auto& [a, s] : n.authorship.signatures) sigs[a.hex()] = to_hex(s);
  json reviews = json::array();
  for (const auto& r : n.confirmations) {
    reviews.push_back({{"reviewer", r.reviewer.hex()},
                       {"contract", r.review_contract.hex()},
                       {"stake", r.stake},
                       {"report", r.report},
                       {"verdict", to_string(r.verdict)},
                       {"version", r.version_signed},
                       {"subject", r.subject.hex()},
                       {"signature", to_hex(r.signature)}});
  }
  json remarks = json::array();
  for (const auto& r : n.remarks) {
    remarks.push_back({{"agent", r.agent.hex()},
                       {"kind", to_string(r.kind)},
                       {"contract", r.contract.hex()},
                       {"stake", r.stake},
                       {"terms_digest", r.terms_digest.hex()},
                       {"signature", to_hex(r.signature)}});
  }
  json citations = json::array();
  for (const auto& c : n.citations) citations.push_back(c.hex());
  json keywords = json::array();
  for (const auto& k : n.meta.keywords) keywords.push_back(k);
  return {
      {"id", n.id.hex()},
      {"key", n.key},
      {"genesis", n.genesis},
      {"account", n.account().hex()},
      {"state", to_string(n.state)},
      {"authorship",
       {{"authors", authors},
        {"stake", n.authorship.author_stake},
        {"contract", n.authorship.contract.hex()},
        {"signatures", sigs}}},
      {"confirmations", reviews},
      {"remarks", remarks},
      {"meta",
       {{"version", n.meta.version},
        {"timestamp", n.meta.timestamp},
        {"merkle_root", n.meta.citation_merkle_root.hex()},
        {"content_digest", n.meta.content_digest.hex()},
        {"keywords", keywords}}},
      {"citations", citations},
  };
}

Signature sig_from_hex(const std::string& hex) {
  auto raw = from_hex(hex);
  if (raw.size() != 64) throw Error(ErrorCode::ParseError, "signature must be 64 bytes");
  Signature s{};
  std::copy(raw.begin(), raw.end(), s.begin());
  return s;
}

ManuscriptNode node_from_json(const json& j) {
  ManuscriptNode n;
  n.id = ManuscriptId::from_hex(j.at("id").get<std::string>());
  n.key = j.at("key").get<ManuscriptKey>();
  n.genesis = j.at("genesis").get<bool>();
  n.state = parse_node_state(j.at("state").get<std::string>());
  const auto& a = j.at("authorship");
  for (const auto& e : a.at("authors")) {
    n.authorship.authors.push_back({Address::from_hex(e.at("address").get<std::string>()),
                                    parse_rational(e.at("share").get<std::string>())});
  }
  n.authorship.author_stake = a.at("stake").get<TokenAmount>();
  n.authorship.contract = ContractId::from_hex(a.at("contract").get<std::string>());
  for (const auto& [addr, sig] : a.at("signatures").items()) {
    n.authorship.signatures[Address::from_hex(addr)] = sig_from_hex(sig.get<std::string>());
  }
  for (const auto& r : j.at("confirmations")) {
    ReviewRecord rec;
    rec.reviewer = Address::from_hex(r.at("reviewer").get<std::string>());
    rec.review_contract = ContractId::from_hex(r.at("contract").get<std::string>());
    rec.stake = r.at("stake").get<TokenAmount>();
    rec.report = r.at("report").get<std::string>();
    rec.verdict = parse_verdict(r.at("verdict").get<std::string>());
    rec.version_signed = r.at("version").get<std::uint32_t>();
    rec.subject = Hash32::from_hex(r.at("subject").get<std::string>());
    rec.signature = sig_from_hex(r.at("signature").get<std::string>());
    n.confirmations.push_back(std::move(rec));
  }
  for (const auto& r : j.at("remarks")) {
    RemarkEntry rem;
    rem.agent = Address::from_hex(r.at("agent").get<std::string>());
    rem.kind = parse_remark_kind(r.at("kind").get<std::string>());
    rem.contract = ContractId::from_hex(r.at("contract").get<std::string>());
    rem.stake = r.at("stake").get<TokenAmount>();
    rem.terms_digest = Hash32::from_hex(r.at("terms_digest").get<std::string>());
    rem.signature = sig_from_hex(r.at("signature").get<std::string>());
    n.remarks.push_back(std::move(rem));
  }
  const auto& m = j.at("meta");
  n.meta.version = m.at("version").get<std::uint32_t>();
  n.meta.timestamp = m.at("timestamp").get<Tick>();
  n.meta.citation_merkle_root = Hash32::from_hex(m.at("merkle_root").get<std::string>());
  n.meta.content_digest = Hash32::from_hex(m.at("content_digest").get<std::string>());
  for (const auto& k : m.at("keywords")) n.meta.keywords.insert(k.get<std::string>());
  for (const auto& c : j.at("citations")) {
    n.citations.push_back(ManuscriptId::from_hex(c.get<std::string>()));
  }
  return n;
}

std::vector<const ManuscriptNode*> sorted_by_id(const std::vector<ManuscriptNode>& nodes) {
  std::vector<const ManuscriptNode*> out;
  for (const auto& n : nodes) out.push_back(&n);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
  return out;
}

}  // namespace

std::string PublicationGraph::export_nodelink() const {
  json nodes = json::array();
  for (const auto* n : sorted_by_id(nodes_)) nodes.push_back(node_to_json(*n));
  json links = json::array();
  for (const auto& [src, dst] : edges()) {
    links.push_back({{"source", src.hex()}, {"target", dst.hex()}});
  }
  json doc = {
      {"directed", true},
      {"multigraph", false},
      {"graph", {{"genesis", nodes_.empty() ? std::string() : nodes_.front().id.hex()}}},
      {"nodes", nodes},
      {"links", links},
  };
  return doc.dump(2) + "\n";
}

std::string PublicationGraph::export_dot() const {
  std::ostringstream out;
  out << "digraph publication_graph {\n";
  for (const auto* n : sorted_by_id(nodes_)) {
    out << "  \"" << n->id.hex() << "\" [label=\"#" << n->key << " v" << n->meta.version << ' '
        << to_string(n->state) << (n->genesis ? " genesis" : "") << "\"];\n";
  }
  for (const auto& [src, dst] : edges()) {
    out << "  \"" << src.hex() << "\" -> \"" << dst.hex() << "\";\n";
  }
  out << "}\n";
  return out.str();
}

PublicationGraph PublicationGraph::parse_nodelink(std::string_view text) {
  PublicationGraph g;
  try {
    auto doc = json::parse(text);
    std::vector<ManuscriptNode> nodes;
    for (const auto& j : doc.at("nodes")) nodes.push_back(node_from_json(j));
    std::sort(nodes.begin(), nodes.end(),
              [](const auto& a, const auto& b) { return a.key < b.key; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].key != i) throw Error(ErrorCode::ParseError, "manuscript keys are not contiguous");
      if (g.by_id_.contains(nodes[i].id)) throw Error(ErrorCode::ParseError, "duplicate node id");
      g.by_id_[nodes[i].id] = nodes[i].key;
    }
    g.nodes_ = std::move(nodes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph export: ") + e.what());
  }
  if (g.export_nodelink() != text) {
    throw Error(ErrorCode::ParseError, "graph export is not in canonical form");
  }
  return g;
}

// --- verification ----------------------------------------------------------

Report verify_node(const ManuscriptNode& node, const PublicationGraph& graph,
                   const AccountRegistry& keys) {
  Report r;
  const auto at = "manuscript #" + std::to_string(node.key) + ": ";
  try {
    if (canonical_hash(node) != node.id) r.add(at + "id does not match contents");
  } catch (const Error& e) {
    r.add(at + e.what());
    return r;
  }
  if (node.meta.citation_merkle_root != merkle_root(node.citations)) {
    r.add(at + "citation merkle root mismatch");
  }
  if (!std::is_sorted(node.citations.begin(), node.citations.end()) ||
      std::adjacent_find(node.citations.begin(), node.citations.end()) != node.citations.end()) {
    r.add(at + "citations not a sorted set");
  }

  if (node.genesis) {
    if (node.key != 0 || !node.citations.empty() || !node.authorship.authors.empty() ||
        node.state != NodeState::Confirmed || !node.confirmations.empty() || !node.remarks.empty()) {
      r.add(at + "malformed genesis");
    }
    return r;
  }

  try {
    check_shares(node.authorship.authors);
  } catch (const Error& e) {
    r.add(at + e.what());
  }
  try {
    check_author_signatures(node.authorship.authors, version_digest(node), node.authorship.signatures,
                            keys);
  } catch (const Error& e) {
    r.add(at + e.what());
  }
  if (node.citations.empty()) r.add(at + "no citations");
  for (const auto& c : node.citations) {
    const auto* target = graph.find(c);
    if (target == nullptr) {
      r.add(at + "cites unknown manuscript " + c.hex());
    } else if (target->state != NodeState::Confirmed) {
      r.add(at + "cites unconfirmed manuscript " + c.hex());
    } else if (target->key >= node.key) {
      r.add(at + "cites a later manuscript");
    }
  }
  const auto current = version_digest(node);
  for (std::size_t i = 0; i < node.confirmations.size(); ++i) {
    const auto& rec = node.confirmations[i];
    const auto where = at + "review " + std::to_string(i) + ": ";
    if (node.authorship.has_author(rec.reviewer)) r.add(where + "reviewer is an author");
    if (rec.version_signed == 0 || rec.version_signed > node.meta.version) {
      r.add(where + "version out of range");
    }
    if (rec.version_signed == node.meta.version && rec.subject != current) {
      r.add(where + "subject does not match current version");
    }
    auto pk = keys.accounts.find(rec.reviewer);
    if (pk == keys.accounts.end() || !pk->second ||
        !verify_signature(*pk->second, rec.signing_payload(), rec.signature)) {
      r.add(where + "bad signature");
    }
  }
  for (std::size_t i = 0; i < node.remarks.size(); ++i) {
    const auto& rem = node.remarks[i];
    const auto where = at + "remark " + std::to_string(i) + ": ";
    if (rem.stake == 0) r.add(where + "zero stake");
    auto pk = keys.accounts.find(rem.agent);
    if (pk == keys.accounts.end() || !pk->second ||
        !verify_signature(*pk->second, rem.signing_payload(node.key), rem.signature)) {
      r.add(where + "bad signature");
    }
  }
  return r;
}

Report verify_graph(const PublicationGraph& graph, const AccountRegistry& keys) {
  Report r;
  const auto& nodes = graph.nodes();
  if (nodes.empty() || !nodes.front().genesis) r.add("graph has no genesis node");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].key != i) r.add("manuscript index inconsistent at " + std::to_string(i));
    if (i > 0 && nodes[i].genesis) r.add("second genesis node");
    if (graph.find(nodes[i].id) != &nodes[i]) r.add("id index inconsistent at " + std::to_string(i));
    r.merge(verify_node(nodes[i], graph, keys));
  }

  // Kahn's algorithm over citing -> cited edges.
  std::map<ManuscriptKey, std::size_t> indegree;
  std::map<ManuscriptKey, std::vector<ManuscriptKey>> out;
  for (const auto& n : nodes) indegree[n.key];
  for (const auto& n : nodes) {
    for (const auto& c : n.citations) {
      if (const auto* t = graph.find(c)) {
        out[n.key].push_back(t->key);
        ++indegree[t->key];
      }
    }
  }
  std::vector<ManuscriptKey> ready;
  for (const auto& [k, d] : indegree) {
    if (d == 0) ready.push_back(k);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    auto k = ready.back();
    ready.pop_back();
    ++visited;
    for (auto t : out[k]) {
      if (--indegree[t] == 0) ready.push_back(t);
    }
  }
  if (visited != nodes.size()) r.add("citation graph contains a cycle");
  return r;
}

}  // namespace reviewchain
