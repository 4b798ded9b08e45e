#pragma once
// Exact rational scalars (GMP-backed) plus the parsing and rendering
// conventions used across the workbench: "p/q" or plain integer text,
// and a fixed 12-digit decimal companion for reports.

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crl {

using Rat = mpq_class;

// Raised by any text-format reader in this library.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Rat rat(long n) { return Rat(n); }

inline Rat rat(long num, long den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

namespace detail {
inline bool digits_only(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}
}  // namespace detail

// Accepts "p", "-p", "p/q", "-p/q" with arbitrary-precision digits.
// The denominator must be a plain positive integer.
inline Rat parse_rational(std::string_view token) {
  auto fail = [&] { return ParseError("malformed rational '" + std::string(token) + "'"); };
  std::string_view num = token, den;
  if (auto slash = token.find('/'); slash != std::string_view::npos) {
    num = token.substr(0, slash);
    den = token.substr(slash + 1);
    if (!detail::digits_only(den)) throw fail();
  }
  bool neg = false;
  if (!num.empty() && (num[0] == '-' || num[0] == '+')) {
    neg = num[0] == '-';
    num.remove_prefix(1);
  }
  if (!detail::digits_only(num)) throw fail();
  mpz_class n(std::string(num), 10);
  if (neg) n = -n;
  if (den.empty()) return Rat(n);
  mpz_class d(std::string(den), 10);
  if (d == 0) throw ParseError("rational with zero denominator '" + std::string(token) + "'");
  Rat r(n, d);
  r.canonicalize();
  return r;
}

// Canonical text: "p/q", or just "p" when the denominator is 1.
inline std::string rat_str(const Rat& r) { return r.get_str(); }

// Fixed-point decimal rendering with `digits` fractional places,
// rounding half away from zero.
inline std::string rat_decimal(const Rat& r, int digits = 12) {
  mpz_class num = r.get_num();
  mpz_class den = r.get_den();
  bool neg = num < 0;
  if (neg) num = -num;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpz_class rounded = (2 * num * scale + den) / (2 * den);
  mpz_class ip = rounded / scale;
  mpz_class fp = rounded % scale;
  std::string frac = fp.get_str();
  frac.insert(frac.begin(), static_cast<std::size_t>(digits) - frac.size(), '0');
  std::string out;
  if (neg && rounded != 0) out += '-';
  out += ip.get_str();
  out += '.';
  out += frac;
  return out;
}

// Report convention: exact value first, decimal in parentheses.
inline std::string rat_report(const Rat& r) {
  return rat_str(r) + " (= " + rat_decimal(r) + ")";
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace crl
