#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "reviewchain/types.hpp"

namespace reviewchain {

using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

Hash32 sha256(ByteView data);
inline Hash32 sha256(std::string_view s) { return sha256(as_bytes(s)); }

/// Incremental SHA-256.
class Hasher {
 public:
  Hasher();
  Hasher& update(ByteView data);
  Hasher& update(std::string_view s) { return update(as_bytes(s)); }
  Hasher& update_u64(std::uint64_t v);
  template <typename Tag>
  Hasher& update(const Digest<Tag>& d) {
    return update(d.view());
  }
  Hash32 finish();

 private:
  alignas(64) std::array<std::uint8_t, 128> state_{};
};

Address address_of(const PublicKey& key);

/// Ed25519 keypair. Signing is deterministic for a given (key, message).
class KeyPair {
 public:
  static KeyPair from_seed(const Hash32& seed);

  const PublicKey& public_key() const { return public_; }
  Address address() const { return address_of(public_); }
  Signature sign(ByteView message) const;

 private:
  KeyPair() = default;

  PublicKey public_{};
  std::array<std::uint8_t, 64> secret_{};
};

bool verify_signature(const PublicKey& key, ByteView message,
                      const Signature& sig);

/// Counter-based stream: draw i is SHA-256(tag || seed || i). All scenario
/// randomness flows from one of these.
class ScenarioRng {
 public:
  explicit ScenarioRng(std::uint64_t seed) : seed_(seed) {}

  Hash32 next();
  std::uint64_t next_u64();
  /// Uniform value in [0, bound); bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Length-prefixed, name-sorted field encoding. Field names are sorted
/// lexicographically at encode time, so insertion order is irrelevant.
class CanonicalRecord {
 public:
  CanonicalRecord& put(std::string name, Bytes value);
  CanonicalRecord& put(std::string name, std::string_view text);
  CanonicalRecord& put_u64(std::string name, std::uint64_t v);
  template <typename Tag>
  CanonicalRecord& put(std::string name, const Digest<Tag>& d) {
    return put(std::move(name), Bytes(d.bytes.begin(), d.bytes.end()));
  }
  CanonicalRecord& put(std::string name, const CanonicalRecord& nested) {
    return put(std::move(name), nested.encode());
  }
  /// Ordered list of nested records; order is significant.
  CanonicalRecord& put_list(std::string name,
                            const std::vector<CanonicalRecord>& items);

  Bytes encode() const;

 private:
  std::vector<std::pair<std::string, Bytes>> fields_;
};

void append_u32(Bytes& out, std::uint32_t v);
void append_u64(Bytes& out, std::uint64_t v);

}  // namespace reviewchain
