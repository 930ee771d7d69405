#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace sck {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Parses "p" or "p/q" with optional leading '-' on p; q must be positive.
Rat parse_rational(const std::string& s);

// Canonical "p" or "p/q" form (q > 1 only when needed).
std::string rational_to_string(const Rat& r);

// A plain decimal literal (optional sign, digits, optional '.', digits),
// parsed exactly.  `fractional_digits` reports how many digits followed the
// point, which bounds the literal's resolution.
struct Decimal {
  Rat value;
  int fractional_digits = 0;
};

Decimal parse_decimal(const std::string& s);

Int gcd(Int a, Int b);

}  // namespace sck
