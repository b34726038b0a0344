#include "nlbif/common.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

namespace nlbif {

namespace {

long long checked_gcd(long long a, long long b) {
  return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}

}  // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw ConfigError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (num == 0) {
    den = 1;
    return;
  }
  long long g = checked_gcd(num, den);
  num /= g;
  den /= g;
}

Rational Rational::parse(std::string_view text) {
  auto fail = [&] { throw ConfigError("cannot parse rational '" + std::string(text) + "'"); };
  // strip spaces
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) fail();

  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    long long n = 0, d = 0;
    auto r1 = std::from_chars(text.data(), text.data() + slash, n);
    auto r2 = std::from_chars(text.data() + slash + 1, text.data() + text.size(), d);
    if (r1.ec != std::errc{} || r1.ptr != text.data() + slash) fail();
    if (r2.ec != std::errc{} || r2.ptr != text.data() + text.size()) fail();
    return Rational(n, d);
  }

  auto dot = text.find('.');
  if (dot != std::string_view::npos) {
    // finite decimal: shift the point
    std::string digits(text.substr(0, dot));
    std::string frac(text.substr(dot + 1));
    if (frac.empty() || frac.size() > 12) fail();
    long long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    bool neg = !digits.empty() && digits[0] == '-';
    if (neg) digits.erase(0, 1);
    long long whole = 0, part = 0;
    if (!digits.empty()) {
      auto r = std::from_chars(digits.data(), digits.data() + digits.size(), whole);
      if (r.ec != std::errc{} || r.ptr != digits.data() + digits.size()) fail();
    }
    auto r = std::from_chars(frac.data(), frac.data() + frac.size(), part);
    if (r.ec != std::errc{} || r.ptr != frac.data() + frac.size()) fail();
    long long n = whole * den + part;
    return Rational(neg ? -n : n, den);
  }

  long long n = 0;
  auto r = std::from_chars(text.data(), text.data() + text.size(), n);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) fail();
  return Rational(n);
}

Rational Rational::operator-(const Rational& o) const {
  return Rational(num * o.den - o.num * den, den * o.den);
}

std::strong_ordering Rational::operator<=>(const Rational& o) const {
  // cross-multiplication; magnitudes stay tiny for config-sized rationals
  long long lhs = num * o.den;
  long long rhs = o.num * den;
  return lhs <=> rhs;
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace nlbif
