#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nlbif/continuation.hpp"
#include "nlbif/system.hpp"

namespace nlbif {

// The local branch through (t1, 0) has the form (t1 + eta(eps), eps V + eps rho(eps))
// with eta(eps) ~ L * eps^delta, delta = min{gamma, p-1, q-1}. Which terms of
// the closed-form limit L survive depends on the tie pattern among the three
// exponents; there are seven cases:
//   1: delta = gamma, strictly smallest        -> nonlocal terms only
//   2: delta = gamma = p-1 < q-1               -> nonlocal + u-advection
//   3: delta = gamma = q-1 < p-1               -> nonlocal + v-advection
//   4: delta = gamma = p-1 = q-1               -> all terms
//   5: delta = p-1 = q-1 < gamma               -> both advections
//   6: delta = q-1, strictly smallest          -> v-advection only
//   7: delta = p-1, strictly smallest          -> u-advection only

/// Exact-rational classification of the tie pattern. Returns (delta, case id).
std::pair<Rational, int> delta_exponent(const Rational& gamma, const Rational& p,
                                        const Rational& q);

/// Quadrature of <A V, V> = lambda_A |xi|^2 int phi_1^2; strictly positive for
/// well-formed V.
double transversality_denominator(const CouplingMatrix& A, const State& V);

struct EtaLimits {
  Rational delta{0, 1};
  int case_id = 0;
  double denominator = 0.0;
  double nonlocal_part = 0.0;   // numerator contribution of the kernel terms
  double advection_part = 0.0;  // numerator contribution of the advection terms
  double closed_form = 0.0;     // advection part with the divergence-form sign
  double alt_sign = 0.0;        // advection part with the opposite sign
  bool degenerate = false;      // active numerator is exactly zero
};

/// Closed-form direction limit for the active case. The advection terms admit
/// two sign conventions (direct quadrature of int m (xi phi)^m field.grad(xi phi)
/// versus the divergence form after integration by parts differ by a sign);
/// both candidates are returned and the empirical branch adjudicates.
EtaLimits eta_limit(const Problem& pb, const State& V, const Rational& delta, int case_id);

/// Effective tie pattern of a concrete problem: exponent slots whose
/// advection term is structurally absent (zero field, or linear mode where
/// advection sits in the linear operator) do not compete for the minimum.
std::pair<Rational, int> effective_delta(const Problem& pb);

/// The order-eps^delta part of the residual nonlinearity, paired against V:
/// eta estimate int H(U).V / int A U.V. Linear mode: H = (Phi u, Psi v);
/// power mode adds the nonlinear advection terms. The quotient identity
/// assumes the linear part is self-adjoint (symmetric A; no first-order term
/// in linear mode); the slope form carries the verdict either way.
double eta_quotient(const Problem& pb, const State& U, const State& V);

struct EtaSample {
  double epsilon;
  double slope_form;     // (t(eps) - t1) / eps^delta
  double quotient_form;  // eta_quotient / eps^delta
};

/// Rescaled samples from the small-epsilon branch points (eps <= 0.1).
std::vector<EtaSample> empirical_eta(const Problem& pb, const Branch& branch, double delta);

enum class SignVerdict { formula_consistent, alt_sign_consistent, inconsistent };

struct DirectionReport {
  double delta = 0.0;
  int case_id = 0;
  double denominator = 0.0;
  double closed_form_limit = 0.0;
  double alt_sign_limit = 0.0;
  bool degenerate = false;
  std::vector<EtaSample> empirical_samples;
  double empirical_limit = 0.0;  // smallest-epsilon slope-form sample
  BranchDirection direction = BranchDirection::undetermined;
  SignVerdict verdict = SignVerdict::inconsistent;
};

/// Full direction analysis of a computed branch: exponent classification,
/// closed-form candidates, empirical rescaled samples, and the sign verdict.
DirectionReport analyze_direction(const Problem& pb, const Branch& branch);

std::string to_string(SignVerdict v);
std::string to_string(BranchDirection d);

}  // namespace nlbif
