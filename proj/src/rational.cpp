#include "sck/rational.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>

#include "sck/error.hpp"

namespace sck {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rat parse_rational(const std::string& s) {
  std::string t = s;
  bool neg = false;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  auto slash = t.find('/');
  std::string num = slash == std::string::npos ? t : t.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : t.substr(slash + 1);
  if (!all_digits(num) || !all_digits(den))
    throw structural_error("not a rational literal: '" + s + "'");
  Int n(num), d(den);
  if (d == 0) throw structural_error("zero denominator in '" + s + "'");
  Rat r(n, d);
  return neg ? Rat(-r) : r;
}

std::string rational_to_string(const Rat& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

Decimal parse_decimal(const std::string& s) {
  std::string t = s;
  bool neg = false;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  auto dot = t.find('.');
  std::string ip = dot == std::string::npos ? t : t.substr(0, dot);
  std::string fp = dot == std::string::npos ? "" : t.substr(dot + 1);
  if (ip.empty()) ip = "0";
  if (!all_digits(ip) || (!fp.empty() && !all_digits(fp)))
    throw structural_error("not a decimal literal: '" + s + "'");
  Int scale = 1;
  for (size_t i = 0; i < fp.size(); ++i) scale *= 10;
  Int mantissa(ip + fp);
  Rat v(mantissa, scale);
  Decimal d;
  d.value = neg ? Rat(-v) : v;
  d.fractional_digits = static_cast<int>(fp.size());
  return d;
}

Int gcd(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace sck
