#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlbif/continuation.hpp"
#include "nlbif/system.hpp"

namespace nlbif {

enum class RunKind { eig, verify, branch, direction, hypotheses, identity_check };

RunKind parse_run_kind(const std::string& s);
std::string to_string(RunKind k);
std::string to_string(Mode m);

/// Complete scenario description parsed from a TOML-style config file.
/// A, p, q, gamma and both kernels/reactions are mandatory; tie-sensitive
/// exponents are kept as exact rationals.
struct ScenarioConfig {
  std::string name;
  RunKind kind = RunKind::verify;
  Mode mode = Mode::linear_advection;

  int dim = 1;
  std::array<std::array<double, 2>, 2> bounds{{{0.0, 1.0}, {0.0, 1.0}}};
  std::array<int, 2> n{3, 3};

  CouplingMatrix A{1, 1, 1, 1};
  Rational p{1, 1}, q{1, 1}, gamma{1, 1};

  // deferred field/kernel/reaction descriptors (built against the grid later)
  struct FieldCfg {
    std::string kind = "zero";
    std::vector<double> components;       // constant
    double strength = 0.0;                // rotation
    std::array<double, 2> center{0, 0};   // rotation
    int out_axis = 0, in_axis = 0;        // shear
    double rate = 0.0;                    // shear
    std::vector<double> linear, quadratic;  // grad-scalar
    std::vector<std::vector<double>> samples;  // tabulated, per axis, closed grid
  };
  FieldCfg alpha, beta;

  struct KernelCfg {
    std::string kind = "constant";
    double value = 1.0;   // constant / band magnitude
    double length = 1.0;  // gaussian
    double radius = 0.0;  // band
    // separable profile a(x) = scale * prod_k x_k^power (power 0 or 1)
    double sep_scale = 1.0;
    int sep_power = 1;
  };
  KernelCfg kernel_u, kernel_v;

  struct ReactionCfg {
    std::string family = "power";
    Rational mu{0, 1};
    double c1 = 1.0, c2 = 0.0;
  };
  ReactionCfg reaction_u, reaction_v;

  std::vector<double> multipliers;
  std::vector<double> seed_amplitudes{0.05, 0.2};
  ContinuationSettings continuation;

  double newton_tol = 1e-10;
  int newton_max_iter = 60;
  double zero_tol = 1e-8;
  double blowup_cap = 1e6;
  double kernel_class_eps = 0.0;  // 0 -> default 4h at load of the grid
  bool relax_divergence = false;

  std::uint64_t seed = 0;
  std::string out_stem;  // defaults to the config file stem
};

/// Parses and validates a scenario file. Parse errors carry the line number;
/// constraint violations name the offending field.
ScenarioConfig load_config(const std::string& path);

/// Applies a mesh refinement factor (per-axis n multiplied by k).
void apply_mesh_scale(ScenarioConfig& cfg, int k);

Grid make_grid(const ScenarioConfig& cfg);
VectorField make_field(const ScenarioConfig::FieldCfg& f, const Grid& g, const std::string& where);
Kernel make_kernel(const ScenarioConfig::KernelCfg& k, int dim, const std::string& where);
Reaction make_reaction(const ScenarioConfig::ReactionCfg& r, const Rational& gamma,
                       Reaction::Major major, const std::string& where);

/// Builds the assembled Problem for the scenario (mode constraints rechecked).
Problem build_problem(const ScenarioConfig& cfg);

}  // namespace nlbif
