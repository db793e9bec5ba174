#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "reviewchain/crypto.hpp"
#include "reviewchain/ledger.hpp"

namespace reviewchain {

enum class Role : std::uint8_t { Author, Reviewer, Funder, Publisher, ServiceProvider };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct Profile {
  std::string display_name;
  std::set<std::string> keywords;
  /// e.g. {"orcid": "0000-0002-1825-0097", "scholar": "abc123"}
  std::map<std::string, std::string> scholar_ids;
  std::set<Role> roles;
  bool reviewer_opt_in = false;

  /// Lower-cases keywords and adds Reviewer to roles when opted in.
  /// Throws InvalidProfile for malformed scholar ids.
  Profile normalized() const;
  /// Number of non-empty attributes among name, keywords, scholar ids.
  int attribute_count() const;
  Bytes encode() const;

  /// Parses the profile import record, e.g.
  ///   name="Ada L" keywords=blockchain,review ids=orcid:0000-0002-1825-0097
  ///   roles=author,reviewer optin=yes
  static Profile parse_record(std::string_view record);
  std::string to_record() const;

  bool operator==(const Profile&) const = default;
};

/// Format validation only; nothing is checked against external services.
bool valid_scholar_id(std::string_view scheme, std::string_view value);

/// 100 grains base + 10 per non-empty attribute, capped at 150.
TokenAmount gift_for(const Profile& profile);

struct UserAccount {
  Address address;
  KeyPair keypair;
  Profile profile;
  Tick created_at = 0;
  std::uint64_t reviews_completed = 0;
  std::uint64_t profile_nonce = 0;
};

/// The user pool. Keypairs are derived from the shared scenario RNG so a
/// whole run replays bit-identically.
class IdentityPool {
 public:
  const UserAccount& create_account(const Profile& profile, Ledger& ledger,
                                    ScenarioRng& rng);

  /// Message the account holder signs to authorise a profile update.
  Bytes profile_update_payload(const Address& who, const Profile& profile) const;
  const UserAccount& update_profile(const Address& who, const Profile& profile,
                                    const Signature& sig);

  void record_review_completed(const Address& who);

  bool contains(const Address& who) const { return accounts_.contains(who); }
  const UserAccount& account(const Address& who) const;
  const std::map<Address, UserAccount>& accounts() const { return accounts_; }
  /// Addresses in creation order.
  const std::vector<Address>& order() const { return order_; }

 private:
  std::map<Address, UserAccount> accounts_;
  std::vector<Address> order_;
};

}  // namespace reviewchain
