#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reviewchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Smallest indivisible token unit.
using TokenAmount = std::uint64_t;

/// Logical clock value; never wall time.
using Tick = std::uint64_t;

std::string to_hex(ByteView bytes);
/// Throws Error{ErrorCode::ParseError} on odd length or non-hex characters.
/// Only lower-case hex is accepted so that every value has one spelling.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// 32-byte hash value tagged by what it identifies.
template <typename Tag>
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  static Digest from_bytes(ByteView b) {
    Digest d;
    if (b.size() != d.bytes.size()) {
      throw std::invalid_argument("digest must be 32 bytes");
    }
    std::copy(b.begin(), b.end(), d.bytes.begin());
    return d;
  }
  static Digest from_hex(std::string_view hex);

  bool is_zero() const {
    for (auto b : bytes) {
      if (b != 0) return false;
    }
    return true;
  }
  std::string hex() const { return to_hex(bytes); }
  ByteView view() const { return bytes; }

  friend auto operator<=>(const Digest&, const Digest&) = default;
};

struct AddressTag {};
struct TxIdTag {};
struct EscrowIdTag {};
struct ContractIdTag {};
struct ManuscriptIdTag {};
struct HashTag {};

using Address = Digest<AddressTag>;
using TxId = Digest<TxIdTag>;
using EscrowId = Digest<EscrowIdTag>;
using ContractId = Digest<ContractIdTag>;
using ManuscriptId = Digest<ManuscriptIdTag>;
using Hash32 = Digest<HashTag>;

/// Stable handle of a manuscript across versions; the ManuscriptId changes
/// with every mutation, the key never does.
using ManuscriptKey = std::uint32_t;

enum class ErrorCode {
  ZeroSupply,
  ZeroAmount,
  ZeroStake,
  InsufficientFunds,
  BadSignature,
  UnknownAddress,
  PayoutMismatch,
  AlreadyTerminal,
  UnknownEscrow,
  InvalidProfile,
  MalformedComponent,
  GenesisExists,
  UnconfirmedCitation,
  NoCitations,
  SharesDontSumToOne,
  MissingSignature,
  LockedManuscript,
  NotUnderReview,
  NoReviewContract,
  ReviewerIsAuthor,
  UnknownManuscript,
  InvalidShares,
  InvalidTerms,
  UnknownParty,
  UnknownContract,
  NotAParty,
  AlreadyActive,
  AlreadyLocked,
  StateMismatch,
  EmptyPool,
  NotConfirmed,
  InvalidPolicy,
  ParseError,
  UnknownFormat,
  UnknownEntity,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every module reports failures through this exception; the code is the
/// machine-readable category surfaced by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

template <typename Tag>
Digest<Tag> Digest<Tag>::from_hex(std::string_view hex) {
  auto raw = reviewchain::from_hex(hex);
  if (raw.size() != 32) {
    throw Error(ErrorCode::ParseError, "expected 64 hex characters");
  }
  return from_bytes(raw);
}

/// Result of an integrity check; violations are collected, never thrown.
struct Report {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string v) { violations.push_back(std::move(v)); }
  void merge(const Report& other) {
    violations.insert(violations.end(), other.violations.begin(),
                      other.violations.end());
  }
};

}  // namespace reviewchain

template <typename Tag>
struct std::hash<reviewchain::Digest<Tag>> {
  std::size_t operator()(const reviewchain::Digest<Tag>& d) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
      h = (h << 8) | d.bytes[i];
    }
    return h;
  }
};
