#include "reviewchain/identity.hpp"

#include <algorithm>
#include <cctype>

#include "reviewchain/text.hpp"

namespace reviewchain {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Author: return "author";
    case Role::Reviewer: return "reviewer";
    case Role::Funder: return "funder";
    case Role::Publisher: return "publisher";
    case Role::ServiceProvider: return "service-provider";
  }
  return "?";
}

Role parse_role(std::string_view text) {
  for (auto r : {Role::Author, Role::Reviewer, Role::Funder, Role::Publisher,
                 Role::ServiceProvider}) {
    if (to_string(r) == text) return r;
  }
  throw Error(ErrorCode::InvalidProfile, "unknown role: " + std::string(text));
}

bool valid_scholar_id(std::string_view scheme, std::string_view value) {
  if (scheme.empty() || value.empty()) return false;
  auto plain = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
           c == '.';
  };
  if (!std::all_of(scheme.begin(), scheme.end(), plain) ||
      !std::all_of(value.begin(), value.end(), plain)) {
    return false;
  }
  if (scheme == "orcid") {
    // dddd-dddd-dddd-ddd[dX]
    if (value.size() != 19) return false;
    for (std::size_t i = 0; i < value.size(); ++i) {
      char c = value[i];
      if (i == 4 || i == 9 || i == 14) {
        if (c != '-') return false;
      } else if (i == 18) {
        if (!std::isdigit(static_cast<unsigned char>(c)) && c != 'X') return false;
      } else if (!std::isdigit(static_cast<unsigned char>(c))) {
        return false;
      }
    }
  }
  return true;
}

Profile Profile::normalized() const {
  Profile p;
  p.display_name = display_name;
  for (const auto& k : keywords) {
    std::string lower;
    for (char c : k) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (!lower.empty()) p.keywords.insert(lower);
  }
  for (const auto& [scheme, value] : scholar_ids) {
    if (!valid_scholar_id(scheme, value)) {
      throw Error(ErrorCode::InvalidProfile, "malformed scholar id " + scheme + ":" + value);
    }
  }
  p.scholar_ids = scholar_ids;
  p.roles = roles;
  p.reviewer_opt_in = reviewer_opt_in;
  if (reviewer_opt_in) p.roles.insert(Role::Reviewer);
  return p;
}

int Profile::attribute_count() const {
  return static_cast<int>(!keywords.empty()) + static_cast<int>(!scholar_ids.empty()) +
         static_cast<int>(!display_name.empty());
}

Bytes Profile::encode() const {
  std::vector<CanonicalRecord> kw, ids, rs;
  for (const auto& k : keywords) kw.push_back(CanonicalRecord().put("k", k));
  for (const auto& [s, v] : scholar_ids) {
    ids.push_back(CanonicalRecord().put("scheme", s).put("value", v));
  }
  for (auto r : roles) rs.push_back(CanonicalRecord().put("r", to_string(r)));
  return CanonicalRecord()
      .put("display_name", display_name)
      .put_list("keywords", kw)
      .put_list("scholar_ids", ids)
      .put_list("roles", rs)
      .put_u64("reviewer_opt_in", reviewer_opt_in ? 1 : 0)
      .encode();
}

Profile Profile::parse_record(std::string_view record) {
  auto kv = KeyValues::parse(tokenize(record));
  if (!kv.positional.empty()) {
    throw Error(ErrorCode::ParseError, "unexpected token in profile: " + kv.positional.front());
  }
  Profile p;
  for (const auto& [key, value] : kv.named) {
    if (key == "name") {
      p.display_name = value;
    } else if (key == "keywords") {
      for (auto& k : split_list(value)) p.keywords.insert(k);
    } else if (key == "ids") {
      for (auto& id : split_list(value)) {
        auto colon = id.find(':');
        if (colon == std::string::npos) {
          throw Error(ErrorCode::InvalidProfile, "scholar id needs scheme:value: " + id);
        }
        p.scholar_ids[id.substr(0, colon)] = id.substr(colon + 1);
      }
    } else if (key == "roles") {
      for (auto& r : split_list(value)) p.roles.insert(parse_role(r));
    } else if (key == "optin") {
      if (value == "yes" || value == "1" || value == "true") {
        p.reviewer_opt_in = true;
      } else if (value == "no" || value == "0" || value == "false") {
        p.reviewer_opt_in = false;
      } else {
        throw Error(ErrorCode::ParseError, "optin must be yes/no");
      }
    } else {
      throw Error(ErrorCode::ParseError, "unknown profile field: " + key);
    }
  }
  return p;
}

std::string Profile::to_record() const {
  auto join = [](const auto& items, auto&& fmt) {
    std::string out;
    for (const auto& i : items) {
      if (!out.empty()) out.push_back(',');
      out += fmt(i);
    }
    return out;
  };
  std::string out = "name=" + quote(display_name);
  out += " keywords=" + join(keywords, [](const std::string& s) { return s; });
  out += " ids=" + join(scholar_ids, [](const auto& kv) { return kv.first + ":" + kv.second; });
  out += " roles=" + join(roles, [](Role r) { return std::string(to_string(r)); });
  out += std::string(" optin=") + (reviewer_opt_in ? "yes" : "no");
  return out;
}

TokenAmount gift_for(const Profile& profile) {
  TokenAmount gift = 100 + 10 * static_cast<TokenAmount>(profile.attribute_count());
  return std::min<TokenAmount>(gift, 150);
}

const UserAccount& IdentityPool::create_account(const Profile& profile, Ledger& ledger,
                                                ScenarioRng& rng) {
  auto normalized = profile.normalized();
  auto keypair = KeyPair::from_seed(rng.next());
  auto address = keypair.address();
  if (accounts_.contains(address) || ledger.knows(address)) {
    throw Error(ErrorCode::StateMismatch, "address collision " + address.hex());
  }
  ledger.register_account(keypair.public_key());
  ledger.system_transfer(ledger.treasury(), address, gift_for(normalized), ContractId{});

  UserAccount account{address, keypair, std::move(normalized), ledger.tick(), 0, 0};
  order_.push_back(address);
  return accounts_.emplace(address, std::move(account)).first->second;
}

Bytes IdentityPool::profile_update_payload(const Address& who,
                                           const Profile& profile) const {
  const auto& acct = account(who);
  return CanonicalRecord()
      .put("address", who)
      .put_u64("nonce", acct.profile_nonce)
      .put("profile", profile.normalized().encode())
      .encode();
}

const UserAccount& IdentityPool::update_profile(const Address& who,
                                                const Profile& profile,
                                                const Signature& sig) {
  auto payload = profile_update_payload(who, profile);
  auto& acct = accounts_.at(who);
  if (!verify_signature(acct.keypair.public_key(), payload, sig)) {
    throw Error(ErrorCode::BadSignature, "profile update not signed by holder");
  }
  acct.profile = profile.normalized();
  ++acct.profile_nonce;
  return acct;
}

void IdentityPool::record_review_completed(const Address& who) {
  auto it = accounts_.find(who);
  if (it == accounts_.end()) throw Error(ErrorCode::UnknownAddress, "unknown user");
  ++it->second.reviews_completed;
}

const UserAccount& IdentityPool::account(const Address& who) const {
  auto it = accounts_.find(who);
  if (it == accounts_.end()) {
    throw Error(ErrorCode::UnknownAddress, "unknown user " + who.hex());
  }
  return it->second;
}

}  // namespace reviewchain
