#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nlbif/system.hpp"

namespace nlbif {

enum class BranchDirection { supercritical, subcritical, undetermined };

struct BranchPoint {
  double t = 0.0;
  State U;
  double amplitude = 0.0;      // max(u) + max(v)
  double epsilon = 0.0;        // <U,V> / <V,V>, the tangent projection
  double residual_norm = 0.0;
  double rho_norm = 0.0;       // ‖U/epsilon - V‖_inf, the orthogonal remainder
};

struct Branch {
  double t1 = 0.0;
  State V;  // phi_1 * xi, the null direction at the bifurcation point
  std::vector<BranchPoint> points;
  BranchDirection direction = BranchDirection::undetermined;
  std::string truncation_reason;  // empty when the run stopped at max_points
};

struct ContinuationSettings {
  double initial_epsilon = 5e-3;
  double step = 5e-3;
  int max_points = 20;
  double newton_tol = 1e-11;
  bool arclength = true;
  double amplitude_cap = 10.0;
  double blowup_cap = 1e6;  // iterates above this are a solver fault
};

/// Onset data of the positive branch: t1 = lambda_1 / lambda_A for the
/// mode-appropriate operator (advected in linear mode, pure Laplacian in
/// power mode) and V = phi_1 * xi with phi_1 max-normalized and xi the unit
/// Perron vector of A.
std::pair<double, State> bifurcation_seed(const Problem& pb, double eig_tol = 1e-10);

/// Tracks the positive branch from (t1, 0). The first two points use natural
/// parameterization in epsilon (the branch is vertical in t at onset); from
/// the third point a secant-tangent pseudo-arclength predictor-corrector
/// takes over unless settings.arclength is false. Corrector failures bisect
/// the step up to 5 times before truncating the branch with a reason.
Branch continue_branch(const Problem& pb, const ContinuationSettings& settings);

struct DirectionVerdict {
  BranchDirection direction;
  std::vector<std::pair<double, double>> eta_samples;  // (epsilon, t - t1)
};

/// Classifies the branch from the smallest-epsilon points: supercritical if
/// every sampled eta = t - t1 is positive, subcritical if all negative.
/// Requires at least 3 points.
DirectionVerdict detect_direction(const Branch& branch);

}  // namespace nlbif
