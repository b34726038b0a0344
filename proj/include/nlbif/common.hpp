#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nlbif {

// Error taxonomy, mapped to CLI exit codes by the driver:
//   ConfigError     -> 3   (bad scenario description, degenerate mesh, ...)
//   SolverError     -> 4   (singular Jacobian, non-convergence, blowup)
// DomainError and HypothesisError indicate misuse of an operation or a
// violated structural assumption; the driver reports them as configuration
// problems.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct PositivityError : SolverError {
  explicit PositivityError(const std::string& what) : SolverError(what) {}
};

struct HypothesisError : std::runtime_error {
  explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

/// Exact rational, used for the tie-sensitive exponents p, q, gamma.
/// The seven direction cases are discontinuous in the tie pattern among
/// {gamma, p-1, q-1}, so comparisons must not go through floating point.
struct Rational {
  long long num = 0;
  long long den = 1;  // always > 0, gcd(num, den) == 1

  Rational() = default;
  Rational(long long n, long long d = 1);

  /// Accepts "3/2", "2", and finite decimals like "1.5".
  static Rational parse(std::string_view text);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  Rational operator-(const Rational& o) const;
  Rational operator-(long long k) const { return *this - Rational(k); }

  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  std::strong_ordering operator<=>(const Rational& o) const;

  std::string str() const;
};

}  // namespace nlbif
