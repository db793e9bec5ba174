#include "reviewchain/por.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "reviewchain/text.hpp"

namespace reviewchain {

std::string_view to_string(SelfCitationRule rule) {
  return rule == SelfCitationRule::Allow ? "allow" : "redirect-authors-to-treasury";
}

SelfCitationRule parse_self_citation_rule(std::string_view text) {
  if (text == "allow") return SelfCitationRule::Allow;
  if (text == "redirect-authors-to-treasury") return SelfCitationRule::RedirectAuthorsToTreasury;
  throw Error(ErrorCode::InvalidPolicy, "unknown self-citation rule: " + std::string(text));
}

// --- policy ----------------------------------------------------------------

void PolicyConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidPolicy, why); };
  if (K < 1) bad("K must be at least 1");
  for (const auto* r : {&alpha, &beta, &gamma, &refund}) {
    if (*r < Rational{0} || *r > Rational{1}) bad("policy fractions must lie in [0,1]");
  }
  if (alpha + beta + gamma != Rational{1}) bad("alpha + beta + gamma must equal 1");
  if (alpha == Rational{0}) bad("alpha must be positive");
  if (author_stake == 0 || reviewer_stake == 0) bad("stakes must be positive");
  if (candidate_count == 0) bad("candidate_count must be positive");
  if (total_supply == 0) throw Error(ErrorCode::ZeroSupply, "total_supply must be positive");
}

namespace {

std::uint64_t parse_u64(const std::string& key, std::string_view v) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::InvalidPolicy, key + " expects an unsigned integer");
  }
  try {
    return std::stoull(std::string(v));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidPolicy, key + " out of range");
  }
}

Rational parse_fraction(const std::string& key, std::string_view v) {
  try {
    return parse_rational(v);
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidPolicy, key + " expects a rational like 3/10 or 0.3");
  }
}

}  // namespace

PolicyConfig PolicyConfig::parse(std::string_view text) {
  PolicyConfig p;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidPolicy, "line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key{trim(trimmed.substr(0, eq))};
    auto value = trim(trimmed.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::InvalidPolicy, "line " + std::to_string(lineno) + ": duplicate " + key);
    }
    if (key == "K") {
      auto k = parse_u64(key, value);
      if (k > 1000) throw Error(ErrorCode::InvalidPolicy, "K out of range");
      p.K = static_cast<std::uint32_t>(k);
    } else if (key == "author_stake") {
      p.author_stake = parse_u64(key, value);
    } else if (key == "reviewer_stake") {
      p.reviewer_stake = parse_u64(key, value);
    } else if (key == "alpha") {
      p.alpha = parse_fraction(key, value);
    } else if (key == "beta") {
      p.beta = parse_fraction(key, value);
    } else if (key == "gamma") {
      p.gamma = parse_fraction(key, value);
    } else if (key == "refund") {
      p.refund = parse_fraction(key, value);
    } else if (key == "self_citation") {
      p.self_citation = parse_self_citation_rule(value);
    } else if (key == "candidate_count") {
      auto n = parse_u64(key, value);
      if (n > 10000) throw Error(ErrorCode::InvalidPolicy, "candidate_count out of range");
      p.candidate_count = static_cast<std::uint32_t>(n);
    } else if (key == "total_supply") {
      p.total_supply = parse_u64(key, value);
    } else {
      throw Error(ErrorCode::InvalidPolicy, "line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  p.validate();
  return p;
}

std::string PolicyConfig::to_text() const {
  std::ostringstream out;
  out << "K=" << K << '\n'
      << "author_stake=" << author_stake << '\n'
      << "reviewer_stake=" << reviewer_stake << '\n'
      << "alpha=" << format_rational(alpha) << '\n'
      << "beta=" << format_rational(beta) << '\n'
      << "gamma=" << format_rational(gamma) << '\n'
      << "refund=" << format_rational(refund) << '\n'
      << "self_citation=" << to_string(self_citation) << '\n'
      << "candidate_count=" << candidate_count << '\n'
      << "total_supply=" << total_supply << '\n';
  return out.str();
}

// --- reviewer selection ----------------------------------------------------

std::optional<IndexingTerms> venue_terms(const ManuscriptNode& node, const ContractBook& book) {
  if (!node.genesis && book.contains(node.authorship.contract)) {
    const auto& a = book.get(node.authorship.contract);
    if (auto venue = std::get<AuthorshipTerms>(a.terms).venue) {
      return std::get<IndexingTerms>(book.get(*venue).terms);
    }
  }
  for (const auto& r : node.remarks) {
    const auto& c = book.get(r.contract);
    if (c.kind == ContractKind::Indexing) return std::get<IndexingTerms>(c.terms);
  }
  return std::nullopt;
}

std::vector<ReviewerScore> score_candidates(const ManuscriptNode& node, const IdentityPool& pool,
                                            const ContractBook& book, std::uint64_t seed) {
  std::set<Address> contracted;
  for (const auto& [_, c] : book.all()) {
    if (c.kind == ContractKind::Review && c.manuscript == node.key &&
        c.state != ContractState::Cancelled) {
      contracted.insert(c.parties.begin(), c.parties.end());
    }
  }
  const auto venue = venue_terms(node, book);
  std::vector<ReviewerScore> out;
  for (const auto& addr : pool.order()) {
    const auto& user = pool.account(addr);
    if (!user.profile.reviewer_opt_in || node.authorship.has_author(addr) ||
        contracted.contains(addr)) {
      continue;
    }
    if (venue && !venue->reviewer_whitelist.empty() &&
        std::find(venue->reviewer_whitelist.begin(), venue->reviewer_whitelist.end(), addr) ==
            venue->reviewer_whitelist.end()) {
      continue;
    }
    ReviewerScore s;
    s.candidate = addr;
    for (const auto& k : user.profile.keywords) {
      if (node.meta.keywords.contains(k)) ++s.keyword_overlap;
    }
    s.history = user.reviews_completed;
    s.score = 2 * std::uint64_t{s.keyword_overlap} + std::min<std::uint64_t>(s.history, 10);
    s.tie_break = Hasher().update("tie-break").update_u64(seed).update(addr).finish();
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const ReviewerScore& a, const ReviewerScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tie_break < b.tie_break;
  });
  return out;
}

std::vector<Address> select_reviewers(const ManuscriptNode& node, const IdentityPool& pool,
                                      const ContractBook& book, const PolicyConfig& policy,
                                      std::uint64_t seed) {
  if (node.state != NodeState::UnderReview) {
    throw Error(ErrorCode::NotUnderReview, "manuscript is " + std::string(to_string(node.state)));
  }
  auto scored = score_candidates(node, pool, book, seed);
  if (scored.empty()) throw Error(ErrorCode::EmptyPool, "no eligible reviewers");
  std::vector<Address> out;
  for (std::size_t i = 0; i < scored.size() && i < policy.candidate_count; ++i) {
    out.push_back(scored[i].candidate);
  }
  return out;
}

// --- tallying --------------------------------------------------------------

std::uint32_t tally_confirmations(const ManuscriptNode& node) {
  std::map<Address, const ReviewRecord*> latest;
  for (const auto& r : node.confirmations) latest[r.reviewer] = &r;
  std::uint32_t n = 0;
  for (const auto& [_, r] : latest) {
    if (r->verdict == Verdict::Confirm && r->version_signed == node.meta.version) ++n;
  }
  return n;
}

std::uint32_t required_confirmations(const ManuscriptNode& node, const ContractBook& book,
                                     const PolicyConfig& policy) {
  if (auto venue = venue_terms(node, book); venue && venue->k_override) return *venue->k_override;
  return policy.K;
}

// --- distribution ----------------------------------------------------------

std::string_view to_string(BeneficiaryClass c) {
  switch (c) {
    case BeneficiaryClass::Author: return "author";
    case BeneficiaryClass::Reviewer: return "reviewer";
    case BeneficiaryClass::Remark: return "remark";
    case BeneficiaryClass::Treasury: return "treasury";
  }
  return "?";
}

BeneficiaryClass parse_beneficiary_class(std::string_view text) {
  for (auto c : {BeneficiaryClass::Author, BeneficiaryClass::Reviewer, BeneficiaryClass::Remark,
                 BeneficiaryClass::Treasury}) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorCode::ParseError, "unknown beneficiary class: " + std::string(text));
}

std::map<Address, Rational> clawbacks_for(const ManuscriptNode& node, const ContractBook& book) {
  std::map<Address, Rational> out;
  std::set<ContractId> counted;
  auto add = [&](const Contract& c) {
    if (c.state == ContractState::Cancelled || !counted.insert(c.id).second) return;
    if (c.clawback() > Rational{0}) out[c.parties.front()] += c.clawback();
  };
  for (const auto& [_, c] : book.all()) {
    if (c.manuscript == node.key &&
        (c.kind == ContractKind::Funding || c.kind == ContractKind::Indexing)) {
      add(c);
    }
  }
  if (!node.genesis && book.contains(node.authorship.contract)) {
    const auto& a = book.get(node.authorship.contract);
    if (auto venue = std::get<AuthorshipTerms>(a.terms).venue) add(book.get(*venue));
  }
  Rational total{0};
  for (const auto& [_, r] : out) total += r;
  if (total > Rational{1}) {
    for (auto& [_, r] : out) r /= total;
  }
  return out;
}

bool shares_author(const ManuscriptNode& cited, const ManuscriptNode& citing) {
  return std::any_of(citing.authorship.authors.begin(), citing.authorship.authors.end(),
                     [&](const AuthorShare& a) { return cited.authorship.has_author(a.author); });
}

std::vector<Beneficiary> distribution_for_citation(const ManuscriptNode& cited, TokenAmount amount,
                                                   const ManuscriptNode& citing,
                                                   const ContractBook& book,
                                                   const PolicyConfig& policy,
                                                   const Address& treasury) {
  if (cited.state != NodeState::Confirmed) {
    throw Error(ErrorCode::NotConfirmed, "cited manuscript is not confirmed");
  }
  if (amount == 0) return {};
  if (cited.genesis) return {{cited.account(), amount, BeneficiaryClass::Treasury}};

  // Distinct reviewers whose latest verdict confirmed the final version.
  std::map<Address, const ReviewRecord*> latest;
  for (const auto& r : cited.confirmations) latest[r.reviewer] = &r;
  std::vector<Address> reviewers;
  for (const auto& [a, r] : latest) {
    if (r->verdict == Verdict::Confirm && r->version_signed == cited.meta.version) {
      reviewers.push_back(a);
    }
  }
  std::map<Address, TokenAmount> remark_stakes;
  TokenAmount remark_total = 0;
  for (const auto& r : cited.remarks) {
    remark_stakes[r.agent] += r.stake;
    remark_total += r.stake;
  }

  Rational weight_total = policy.alpha;
  if (!reviewers.empty()) weight_total += policy.beta;
  if (remark_total > 0) weight_total += policy.gamma;
  const Rational wa = policy.alpha / weight_total;
  const Rational wb = reviewers.empty() ? Rational{0} : policy.beta / weight_total;
  const Rational wg = remark_total == 0 ? Rational{0} : policy.gamma / weight_total;

  std::map<std::pair<Address, BeneficiaryClass>, TokenAmount> merged;
  const auto claws = clawbacks_for(cited, book);
  Rational claw_total{0};
  for (const auto& [who, r] : claws) {
    merged[{who, BeneficiaryClass::Author}] += floor_mul(amount, wa * r);
    claw_total += r;
  }
  for (const auto& a : cited.authorship.authors) {
    merged[{a.author, BeneficiaryClass::Author}] +=
        floor_mul(amount, wa * a.share * (Rational{1} - claw_total));
  }
  for (const auto& r : reviewers) {
    merged[{r, BeneficiaryClass::Reviewer}] +=
        floor_mul(amount, wb / static_cast<std::int64_t>(reviewers.size()));
  }
  for (const auto& [agent, stake] : remark_stakes) {
    merged[{agent, BeneficiaryClass::Remark}] +=
        floor_mul(amount, wg * Rational(static_cast<std::int64_t>(stake),
                                        static_cast<std::int64_t>(remark_total)));
  }

  if (policy.self_citation == SelfCitationRule::RedirectAuthorsToTreasury &&
      shares_author(cited, citing)) {
    TokenAmount author_class = 0;
    for (auto it = merged.begin(); it != merged.end();) {
      if (it->first.second == BeneficiaryClass::Author) {
        author_class += it->second;
        it = merged.erase(it);
      } else {
        ++it;
      }
    }
    merged[{treasury, BeneficiaryClass::Author}] += author_class;
  }

  TokenAmount given = 0;
  std::vector<Beneficiary> out;
  for (const auto& [k, v] : merged) {
    given += v;
    if (v > 0) out.push_back({k.first, v, k.second});
  }
  if (given > amount) {
    throw Error(ErrorCode::PayoutMismatch, "distribution exceeds inflow");
  }
  if (amount > given) {
    bool added = false;
    for (auto& b : out) {
      if (b.to == treasury && b.cls == BeneficiaryClass::Treasury) {
        b.amount += amount - given;
        added = true;
      }
    }
    if (!added) out.push_back({treasury, amount - given, BeneficiaryClass::Treasury});
  }
  std::sort(out.begin(), out.end(), [](const Beneficiary& a, const Beneficiary& b) {
    return std::tie(a.to, a.cls) < std::tie(b.to, b.cls);
  });
  return out;
}

// --- reports ---------------------------------------------------------------

TokenAmount SettlementReport::total() const {
  TokenAmount sum = 0;
  for (const auto& l : per_beneficiary) sum += l.beneficiary.amount;
  return sum;
}

void SettlementReport::normalize() {
  std::sort(per_beneficiary.begin(), per_beneficiary.end(),
            [](const SettlementLine& a, const SettlementLine& b) {
              return std::tie(a.beneficiary.to, a.source, a.beneficiary.cls) <
                     std::tie(b.beneficiary.to, b.source, b.beneficiary.cls);
            });
}

std::vector<std::string> SettlementReport::audit_lines(std::uint64_t seq) const {
  std::vector<std::string> out;
  const char* event = kind == SettlementKind::Confirmation ? "confirm" : "withdraw";
  for (const auto& l : per_beneficiary) {
    std::ostringstream line;
    line << seq << ' ' << event << ' ' << manuscript << ' ' << l.source << ' '
         << to_string(l.beneficiary.cls) << ' ' << l.beneficiary.to.hex() << ' '
         << l.beneficiary.amount;
    out.push_back(line.str());
  }
  return out;
}

std::vector<SettlementLine> withdrawal_lines(const ManuscriptNode& node,
                                             std::span<const Contract> contracts,
                                             const PolicyConfig& policy,
                                             const Address& treasury) {
  std::map<std::pair<Address, BeneficiaryClass>, TokenAmount> merged;
  for (const auto& c : contracts) {
    for (const auto& s : c.stakes) {
      if (s.settled) continue;
      switch (s.role) {
        case StakeRole::Author:
        case StakeRole::Covered: {
          auto back = floor_mul(s.amount, policy.refund);
          merged[{s.owner, BeneficiaryClass::Author}] += back;
          merged[{treasury, BeneficiaryClass::Treasury}] += s.amount - back;
          break;
        }
        case StakeRole::Reviewer:
          merged[{s.owner, BeneficiaryClass::Reviewer}] += s.amount;
          break;
        case StakeRole::Remark:
          merged[{s.owner, BeneficiaryClass::Remark}] += s.amount;
          break;
      }
    }
  }
  std::vector<SettlementLine> out;
  for (const auto& [k, v] : merged) {
    if (v > 0) out.push_back({node.key, {k.first, v, k.second}});
  }
  return out;
}

}  // namespace reviewchain
