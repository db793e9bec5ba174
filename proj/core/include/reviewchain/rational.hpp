#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "reviewchain/types.hpp"

namespace reviewchain {

/// Exact share/weight arithmetic. Always kept normalised by boost.
using Rational = boost::rational<std::int64_t>;

/// Accepts "3/5", "0.6", "1". Decimal input is converted exactly.
Rational parse_rational(std::string_view text);

/// Canonical spelling "n/d" (or "n" when d == 1).
std::string format_rational(const Rational& r);

/// floor(amount * r) for r >= 0, with a 128-bit intermediate.
TokenAmount floor_mul(TokenAmount amount, const Rational& r);

}  // namespace reviewchain
