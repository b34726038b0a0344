#include "nlbif/direction.hpp"

#include <algorithm>
#include <cmath>

namespace nlbif {

namespace {

int case_from_flags(bool nl, bool pa, bool qa) {
  if (nl && !pa && !qa) return 1;
  if (nl && pa && !qa) return 2;
  if (nl && !pa && qa) return 3;
  if (nl && pa && qa) return 4;
  if (!nl && pa && qa) return 5;
  if (!nl && !pa && qa) return 6;
  return 7;  // !nl && pa && !qa
}

inline double pow_pos(double x, double e) { return x == 0.0 ? 0.0 : std::pow(x, e); }

}  // namespace

std::pair<Rational, int> delta_exponent(const Rational& gamma, const Rational& p,
                                        const Rational& q) {
  if (!(gamma.value() > 0.0)) throw ConfigError("delta exponent needs gamma > 0");
  Rational pm1 = p - 1;
  Rational qm1 = q - 1;
  Rational m = std::min({gamma, pm1, qm1});
  return {m, case_from_flags(gamma == m, pm1 == m, qm1 == m)};
}

std::pair<Rational, int> effective_delta(const Problem& pb) {
  // exponent slots only compete when the corresponding advection term is
  // actually nonlinear and present: in linear mode advection sits inside the
  // linear operator and a zero field contributes nothing at any order
  bool p_active = pb.mode == Mode::power_advection && !pb.alpha.is_zero();
  bool q_active = pb.mode == Mode::power_advection && !pb.beta.is_zero();
  Rational m = pb.gamma;
  if (p_active) m = std::min(m, pb.p - 1);
  if (q_active) m = std::min(m, pb.q - 1);
  return {m, case_from_flags(pb.gamma == m, p_active && (pb.p - 1) == m,
                             q_active && (pb.q - 1) == m)};
}

double transversality_denominator(const CouplingMatrix& A, const State& V) {
  const auto& v1 = V.u.values;
  const auto& v2 = V.v.values;
  double acc = 0.0;
  for (Eigen::Index m = 0; m < v1.size(); ++m) {
    acc += (A.a * v1[m] + A.b * v2[m]) * v1[m] + (A.c * v1[m] + A.d * v2[m]) * v2[m];
  }
  double den = V.u.grid.node_weight() * acc;
  if (!(den > 0.0))
    throw ConfigError("transversality denominator is not positive; V is malformed");
  return den;
}

EtaLimits eta_limit(const Problem& pb, const State& V, const Rational& delta, int case_id) {
  if (case_id < 1 || case_id > 7) throw ConfigError("direction case id must be in 1..7");
  EtaLimits out;
  out.delta = delta;
  out.case_id = case_id;
  out.denominator = transversality_denominator(pb.A, V);

  const bool nl = case_id <= 4;
  const bool pa = case_id == 2 || case_id == 4 || case_id == 5 || case_id == 7;
  const bool qa = case_id == 3 || case_id == 4 || case_id == 5 || case_id == 6;
  const double w = pb.grid.node_weight();

  if (nl) {
    // int [xi1^2 Phi_V + xi2^2 Psi_V] phi_1^2 = int [Phi_V V1^2 + Psi_V V2^2]
    GridField phiV = apply_nonlocal(pb.M1, pb.react_u, V.u, V.v);
    GridField psiV = apply_nonlocal(pb.M2, pb.react_v, V.u, V.v);
    double acc = 0.0;
    for (Eigen::Index m = 0; m < phiV.values.size(); ++m) {
      acc += phiV.values[m] * V.u.values[m] * V.u.values[m] +
             psiV.values[m] * V.v.values[m] * V.v.values[m];
    }
    out.nonlocal_part = w * acc;
  }

  // advection contributions: the displayed forms are the direct quadrature
  // int m (xi phi)^m field.grad(xi phi) for the mixed cases 2-5 and the
  // divergence form m/(m+1) int (xi phi)^(m+1) div(field) for cases 6-7;
  // the two differ by a sign after integration by parts
  double adv = 0.0;
  const double pv = pb.p.value(), qv = pb.q.value();
  if (pa && !pb.alpha.is_zero()) {
    if (case_id == 7) {
      GridField dv = divergence(pb.alpha, pb.grid);
      double acc = 0.0;
      for (Eigen::Index m = 0; m < dv.values.size(); ++m)
        acc += pow_pos(V.u.values[m], pv + 1.0) * dv.values[m];
      adv += pv / (pv + 1.0) * w * acc;
    } else {
      GridField conv = advect(pb.alpha, V.u);
      double acc = 0.0;
      for (Eigen::Index m = 0; m < conv.values.size(); ++m)
        acc += pow_pos(V.u.values[m], pv) * conv.values[m];
      adv += pv * w * acc;
    }
  }
  if (qa && !pb.beta.is_zero()) {
    if (case_id == 6) {
      GridField dv = divergence(pb.beta, pb.grid);
      double acc = 0.0;
      for (Eigen::Index m = 0; m < dv.values.size(); ++m)
        acc += pow_pos(V.v.values[m], qv + 1.0) * dv.values[m];
      adv += qv / (qv + 1.0) * w * acc;
    } else {
      GridField conv = advect(pb.beta, V.v);
      double acc = 0.0;
      for (Eigen::Index m = 0; m < conv.values.size(); ++m)
        acc += pow_pos(V.v.values[m], qv) * conv.values[m];
      adv += qv * w * acc;
    }
  }
  out.advection_part = adv;

  out.closed_form = (out.nonlocal_part + adv) / out.denominator;
  out.alt_sign = (out.nonlocal_part - adv) / out.denominator;
  out.degenerate = out.closed_form == 0.0 && out.alt_sign == 0.0;
  return out;
}

double eta_quotient(const Problem& pb, const State& U, const State& V) {
  const double w = pb.grid.node_weight();
  GridField phi = apply_nonlocal(pb.M1, pb.react_u, U.u, U.v);
  GridField psi = apply_nonlocal(pb.M2, pb.react_v, U.u, U.v);

  Eigen::VectorXd Hu = phi.values.cwiseProduct(U.u.values);
  Eigen::VectorXd Hv = psi.values.cwiseProduct(U.v.values);
  if (pb.mode == Mode::power_advection) {
    const double pv = pb.p.value(), qv = pb.q.value();
    GridField cu = advect(pb.alpha, U.u);
    GridField cv = advect(pb.beta, U.v);
    for (Eigen::Index m = 0; m < Hu.size(); ++m) {
      Hu[m] += pv * pow_pos(std::abs(U.u.values[m]), pv - 1.0) * cu.values[m];
      Hv[m] += qv * pow_pos(std::abs(U.v.values[m]), qv - 1.0) * cv.values[m];
    }
  }

  double num = 0.0, den = 0.0;
  for (Eigen::Index m = 0; m < Hu.size(); ++m) {
    num += Hu[m] * V.u.values[m] + Hv[m] * V.v.values[m];
    double au = pb.A.a * U.u.values[m] + pb.A.b * U.v.values[m];
    double av = pb.A.c * U.u.values[m] + pb.A.d * U.v.values[m];
    den += au * V.u.values[m] + av * V.v.values[m];
  }
  if (den == 0.0) throw DomainError("eta quotient denominator vanished");
  return (w * num) / (w * den);
}

std::vector<EtaSample> empirical_eta(const Problem& pb, const Branch& branch, double delta) {
  if (branch.points.size() < 3)
    throw DomainError("empirical eta needs at least 3 branch points");
  std::vector<EtaSample> out;
  for (const auto& pt : branch.points) {
    if (pt.epsilon > 0.1) continue;
    double scale = std::pow(pt.epsilon, delta);
    EtaSample s;
    s.epsilon = pt.epsilon;
    s.slope_form = (pt.t - branch.t1) / scale;
    s.quotient_form = eta_quotient(pb, pt.U, branch.V) / scale;
    out.push_back(s);
  }
  return out;
}

DirectionReport analyze_direction(const Problem& pb, const Branch& branch) {
  auto [delta, case_id] = effective_delta(pb);
  EtaLimits lim = eta_limit(pb, branch.V, delta, case_id);

  DirectionReport rep;
  rep.delta = delta.value();
  rep.case_id = case_id;
  rep.denominator = lim.denominator;
  rep.closed_form_limit = lim.closed_form;
  rep.alt_sign_limit = lim.alt_sign;
  rep.degenerate = lim.degenerate;
  rep.empirical_samples = empirical_eta(pb, branch, delta.value());
  if (rep.empirical_samples.empty())
    throw DomainError("no branch points below the epsilon cutoff for direction analysis");
  rep.empirical_limit = rep.empirical_samples.front().slope_form;
  rep.direction = detect_direction(branch).direction;

  if (lim.degenerate) {
    rep.verdict = SignVerdict::formula_consistent;
    return rep;
  }
  double E = rep.empirical_limit;
  double err_f = std::abs(E - lim.closed_form);
  double err_a = std::abs(E - lim.alt_sign);
  bool ok_f = err_f <= 0.35 * std::abs(lim.closed_form) + 1e-9;
  bool ok_a = err_a <= 0.35 * std::abs(lim.alt_sign) + 1e-9;
  if (ok_f && (err_f <= err_a || lim.closed_form == lim.alt_sign)) {
    rep.verdict = SignVerdict::formula_consistent;
  } else if (ok_a) {
    rep.verdict = SignVerdict::alt_sign_consistent;
  } else {
    rep.verdict = SignVerdict::inconsistent;
  }
  return rep;
}

std::string to_string(SignVerdict v) {
  switch (v) {
    case SignVerdict::formula_consistent:
      return "formula-consistent";
    case SignVerdict::alt_sign_consistent:
      return "alt-sign-consistent";
    case SignVerdict::inconsistent:
      return "inconsistent";
  }
  return "?";
}

std::string to_string(BranchDirection d) {
  switch (d) {
    case BranchDirection::supercritical:
      return "supercritical";
    case BranchDirection::subcritical:
      return "subcritical";
    case BranchDirection::undetermined:
      return "undetermined";
  }
  return "?";
}

}  // namespace nlbif
