#include "reviewchain/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>

namespace reviewchain {

namespace {

struct SodiumInit {
  SodiumInit() {
    if (sodium_init() < 0) {
      throw std::runtime_error("libsodium initialisation failed");
    }
  }
};

void ensure_sodium() { static const SodiumInit init; }

static_assert(sizeof(crypto_hash_sha256_state) <= 128);

crypto_hash_sha256_state* as_state(std::array<std::uint8_t, 128>& raw) {
  return reinterpret_cast<crypto_hash_sha256_state*>(raw.data());
}

}  // namespace

std::string to_hex(ByteView bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw Error(ErrorCode::ParseError, "odd-length hex string");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::ParseError, "invalid hex character");
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Hash32 sha256(ByteView data) {
  ensure_sodium();
  Hash32 h;
  crypto_hash_sha256(h.bytes.data(), data.data(), data.size());
  return h;
}

Hasher::Hasher() {
  ensure_sodium();
  crypto_hash_sha256_init(as_state(state_));
}

Hasher& Hasher::update(ByteView data) {
  crypto_hash_sha256_update(as_state(state_), data.data(), data.size());
  return *this;
}

Hasher& Hasher::update_u64(std::uint64_t v) {
  Bytes b;
  append_u64(b, v);
  return update(b);
}

Hash32 Hasher::finish() {
  Hash32 h;
  crypto_hash_sha256_final(as_state(state_), h.bytes.data());
  return h;
}

Address address_of(const PublicKey& key) {
  return Address::from_bytes(
      Hasher().update("address").update(key).finish().bytes);
}

KeyPair KeyPair::from_seed(const Hash32& seed) {
  ensure_sodium();
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_.data(), kp.secret_.data(),
                           seed.bytes.data());
  return kp;
}

Signature KeyPair::sign(ByteView message) const {
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       secret_.data());
  return sig;
}

bool verify_signature(const PublicKey& key, ByteView message,
                      const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), message.data(),
                                     message.size(), key.data()) == 0;
}

Hash32 ScenarioRng::next() {
  return Hasher()
      .update("scenario-rng")
      .update_u64(seed_)
      .update_u64(counter_++)
      .finish();
}

std::uint64_t ScenarioRng::next_u64() {
  auto h = next();
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | h.bytes[i];
  return v;
}

std::uint64_t ScenarioRng::uniform(std::uint64_t bound) {
  // Rejection sampling keeps the distribution exact.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    auto v = next_u64();
    if (v < limit) return v % bound;
  }
}

void append_u32(Bytes& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64(Bytes& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

CanonicalRecord& CanonicalRecord::put(std::string name, Bytes value) {
  fields_.emplace_back(std::move(name), std::move(value));
  return *this;
}

CanonicalRecord& CanonicalRecord::put(std::string name, std::string_view text) {
  auto b = as_bytes(text);
  return put(std::move(name), Bytes(b.begin(), b.end()));
}

CanonicalRecord& CanonicalRecord::put_u64(std::string name, std::uint64_t v) {
  Bytes b;
  append_u64(b, v);
  return put(std::move(name), std::move(b));
}

CanonicalRecord& CanonicalRecord::put_list(
    std::string name, const std::vector<CanonicalRecord>& items) {
  Bytes out;
  append_u32(out, static_cast<std::uint32_t>(items.size()));
  for (const auto& item : items) {
    auto enc = item.encode();
    append_u32(out, static_cast<std::uint32_t>(enc.size()));
    out.insert(out.end(), enc.begin(), enc.end());
  }
  return put(std::move(name), std::move(out));
}

Bytes CanonicalRecord::encode() const {
  auto sorted = fields_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].first == sorted[i - 1].first) {
      throw Error(ErrorCode::MalformedComponent,
                  "duplicate canonical field: " + sorted[i].first);
    }
  }
  Bytes out;
  for (const auto& [name, value] : sorted) {
    append_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    append_u32(out, static_cast<std::uint32_t>(value.size()));
    out.insert(out.end(), value.begin(), value.end());
  }
  return out;
}

}  // namespace reviewchain
