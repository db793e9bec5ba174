#include "reviewchain/rational.hpp"

#include <charconv>

namespace reviewchain {

namespace {

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "invalid number: " + std::string(s));
  }
  return v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = parse_int(text.substr(0, slash));
    auto den = parse_int(text.substr(slash + 1));
    if (den == 0) {
      throw Error(ErrorCode::ParseError, "zero denominator: " + std::string(text));
    }
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 12) {
      throw Error(ErrorCode::ParseError, "invalid decimal: " + std::string(text));
    }
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    bool negative = !whole.empty() && whole.front() == '-';
    std::int64_t w = whole.empty() || whole == "-" ? 0 : parse_int(whole);
    std::int64_t f = parse_int(frac);
    if (f < 0) {
      throw Error(ErrorCode::ParseError, "invalid decimal: " + std::string(text));
    }
    std::int64_t num = (w < 0 ? -w : w) * scale + f;
    return Rational(negative ? -num : num, scale);
  }
  return Rational(parse_int(text));
}

std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

TokenAmount floor_mul(TokenAmount amount, const Rational& r) {
  if (r.numerator() < 0) {
    throw Error(ErrorCode::InvalidShares, "negative weight");
  }
  __extension__ using u128 = unsigned __int128;
  const u128 prod = static_cast<u128>(amount) * static_cast<std::uint64_t>(r.numerator());
  return static_cast<TokenAmount>(prod / static_cast<std::uint64_t>(r.denominator()));
}

}  // namespace reviewchain
