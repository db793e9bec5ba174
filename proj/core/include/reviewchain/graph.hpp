#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "reviewchain/contracts.hpp"
#include "reviewchain/crypto.hpp"
#include "reviewchain/ledger.hpp"
#include "reviewchain/rational.hpp"

namespace reviewchain {

enum class Verdict : std::uint8_t { Confirm, Revise };
enum class RemarkKind : std::uint8_t { Funding, Proofreading, Indexing, Other };
enum class NodeState : std::uint8_t { UnderReview, Confirmed, Withdrawn };

std::string_view to_string(Verdict v);
std::string_view to_string(RemarkKind k);
std::string_view to_string(NodeState s);
Verdict parse_verdict(std::string_view text);
RemarkKind parse_remark_kind(std::string_view text);
NodeState parse_node_state(std::string_view text);

struct AuthorShare {
  Address author;
  Rational share;
  bool operator==(const AuthorShare&) const = default;
};

struct AuthorshipComponent {
  std::vector<AuthorShare> authors;
  TokenAmount author_stake = 0;
  ContractId contract;
  std::map<Address, Signature> signatures;
  bool operator==(const AuthorshipComponent&) const = default;

  bool has_author(const Address& a) const;
};

struct ReviewRecord {
  Address reviewer;
  ContractId review_contract;
  TokenAmount stake = 0;
  std::string report;
  Verdict verdict = Verdict::Revise;
  std::uint32_t version_signed = 0;
  /// Version digest of the manuscript the reviewer read.
  Hash32 subject;
  Signature signature{};
  bool operator==(const ReviewRecord&) const = default;

  Bytes signing_payload() const;
};

struct RemarkEntry {
  Address agent;
  RemarkKind kind = RemarkKind::Other;
  ContractId contract;
  TokenAmount stake = 0;
  Hash32 terms_digest;
  Signature signature{};
  bool operator==(const RemarkEntry&) const = default;

  /// Remarks are bound to the manuscript key, so they survive revisions.
  Bytes signing_payload(ManuscriptKey key) const;
};

struct ManuscriptMeta {
  std::uint32_t version = 1;
  Tick timestamp = 0;
  Hash32 citation_merkle_root;
  Hash32 content_digest;
  std::set<std::string> keywords;
  bool operator==(const ManuscriptMeta&) const = default;
};

struct ManuscriptNode {
  ManuscriptKey key = 0;
  ManuscriptId id;
  bool genesis = false;
  AuthorshipComponent authorship;
  std::vector<ReviewRecord> confirmations;
  std::vector<RemarkEntry> remarks;
  ManuscriptMeta meta;
  std::vector<ManuscriptId> citations;  // sorted, distinct
  NodeState state = NodeState::UnderReview;
  bool operator==(const ManuscriptNode&) const = default;

  /// System ledger account that receives citation inflows.
  Address account() const;
  TokenAmount remark_pool() const;
};

Address manuscript_account(ManuscriptKey key);

/// Sorted leaves H(0x00||id), inner nodes H(0x01||l||r), odd levels
/// duplicate their last node, empty set hashes to H("").
Hash32 merkle_root(std::vector<ManuscriptId> ids);

/// Canonical byte encoding of every stored field except the id.
Bytes canonical_encoding(const ManuscriptNode& node);
ManuscriptId canonical_hash(const ManuscriptNode& node);

/// What authors sign for a version: key, authorship without signatures,
/// meta (minus timestamp) and citations.
Hash32 version_digest(ManuscriptKey key, const std::vector<AuthorShare>& authors,
                      TokenAmount author_stake, const ContractId& contract,
                      std::uint32_t version, const Hash32& content_digest,
                      const std::vector<ManuscriptId>& citations,
                      const std::set<std::string>& keywords);
Hash32 version_digest(const ManuscriptNode& node);

/// Message authors sign to withdraw the manuscript.
Bytes withdrawal_payload(const ManuscriptNode& node);

struct SubmitRequest {
  std::vector<AuthorShare> authors;
  Hash32 content_digest;
  std::vector<ManuscriptId> citations;
  std::set<std::string> keywords;
  ContractId authorship_contract;
  std::map<Address, Signature> signatures;
};

struct ReviseRequest {
  Hash32 content_digest;
  std::optional<std::vector<ManuscriptId>> citations;
  std::optional<std::set<std::string>> keywords;
  /// Replacement authorship (a fresh Active contract) if the author list or
  /// shares change.
  std::optional<ContractId> authorship_contract;
  std::optional<std::vector<AuthorShare>> authors;
  std::map<Address, Signature> signatures;
};

/// The publication graph: nodes keyed by a stable ManuscriptKey, edges from
/// citing to cited manuscript.
class PublicationGraph {
 public:
  const ManuscriptNode& init_genesis(const Hash32& content_digest, Tick now);

  /// Key the next submitted manuscript will get (authors sign over it).
  ManuscriptKey next_key() const { return static_cast<ManuscriptKey>(nodes_.size()); }
  /// Stake recorded for an authorship contract: its own stakes plus those
  /// of funding contracts covering it.
  static TokenAmount authorship_stake(const ContractBook& book, const ContractId& contract);

  const ManuscriptNode& submit(const SubmitRequest& req, ContractBook& book,
                               const AccountRegistry& keys, Tick now);
  const ManuscriptNode& revise(ManuscriptKey key, const ReviseRequest& req, ContractBook& book,
                               const AccountRegistry& keys, Tick now);
  const ManuscriptNode& record_review(ManuscriptKey key, const ReviewRecord& record,
                                      ContractBook& book, const AccountRegistry& keys);
  const ManuscriptNode& attach_remark(ManuscriptKey key, const RemarkEntry& remark,
                                      ContractBook& book, const AccountRegistry& keys);

  const ManuscriptNode& mark_confirmed(ManuscriptKey key);
  const ManuscriptNode& mark_withdrawn(ManuscriptKey key);

  bool has_genesis() const { return !nodes_.empty(); }
  ManuscriptKey genesis_key() const { return 0; }
  bool contains(ManuscriptKey key) const { return key < nodes_.size(); }
  const ManuscriptNode& node(ManuscriptKey key) const;
  const ManuscriptNode* find(const ManuscriptId& id) const;
  const std::vector<ManuscriptNode>& nodes() const { return nodes_; }

  /// citing id -> cited id, sorted.
  std::vector<std::pair<ManuscriptId, ManuscriptId>> edges() const;

  /// Node-link JSON with full component data; nodes sorted by id.
  std::string export_nodelink() const;
  /// DOT digraph; nodes sorted by id.
  std::string export_dot() const;
  /// Strict: the text must be exactly what export_nodelink would write.
  static PublicationGraph parse_nodelink(std::string_view text);

  /// Test hook for tamper experiments.
  std::vector<ManuscriptNode>& mutable_nodes_for_testing() { return nodes_; }

 private:
  ManuscriptNode& at(ManuscriptKey key);
  void check_citations(const std::vector<ManuscriptId>& citations) const;
  void rehash(ManuscriptNode& node);

  std::vector<ManuscriptNode> nodes_;
  std::map<ManuscriptId, ManuscriptKey> by_id_;
};

/// id recomputation, signatures, share sum, merkle root, citation state.
Report verify_node(const ManuscriptNode& node, const PublicationGraph& graph,
                   const AccountRegistry& keys);
/// verify_node over every node plus acyclicity and index consistency.
Report verify_graph(const PublicationGraph& graph, const AccountRegistry& keys);

}  // namespace reviewchain
