#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlbif/config.hpp"
#include "nlbif/direction.hpp"

namespace nlbif {

// Environment variable capping sweep concurrency.
inline constexpr const char* kThreadsEnvVar = "NONLOCAL_BRANCH_THREADS";

struct SweepOutcome {
  double multiplier = 0.0;
  double t = 0.0;
  std::string outcome;  // "zero" | "positive" | "mixed" | "fault"
  double amplitude = 0.0;
  double margin = 0.0;
  double residual_norm = 0.0;
  double sup_norm = 0.0;
  int iterations = 0;
  std::string fault;
};

struct Thresholds {
  double lambda1 = 0.0;
  double lambda_A = 0.0;
  double t1 = 0.0;
  double eig_residual = 0.0;
  int eig_iterations = 0;
};

struct VerifyReport {
  Thresholds thresholds;
  std::vector<SweepOutcome> sweep;  // ordered by t
  // existence read-off of the original problem at t = 1
  std::optional<SweepOutcome> at_unit_t;
  double lambda_gap = 0.0;  // lambda_A - lambda_1
  bool unit_consistent = true;
  bool pass = false;
};

struct HypothesisReport {
  struct Item {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Item> items;
  bool pass = true;
};

struct RunArtifacts {
  std::vector<std::string> files;  // paths written
  int exit_code = 0;
  std::string summary;             // human-readable lines
};

/// Sweep the configured t-multipliers of t1, Newton from eps*V seeds at each,
/// and aggregate to the existence/nonexistence verdict. The evaluation at
/// t = 1 answers the original existence question: positive solution iff
/// lambda_A exceeds the relevant lambda_1.
VerifyReport run_verify(const ScenarioConfig& cfg, const Problem& pb);

/// Branch continuation; also computes the branch CSV rows.
Branch run_branch(const ScenarioConfig& cfg, const Problem& pb);

/// Short branch plus closed-form/empirical direction analysis.
DirectionReport run_direction(const ScenarioConfig& cfg, const Problem& pb,
                              std::optional<Branch>* branch_out = nullptr);

/// Kernel-class, homogeneity, lower-bound, boundedness, derivative and
/// advection-identity checks on seeded random fields.
HypothesisReport run_hypotheses(const ScenarioConfig& cfg, std::uint64_t seed,
                                bool identity_only = false);

/// Full subcommand dispatch: runs the scenario, writes CSV/JSON artifacts
/// under out_dir, returns what was written plus the process exit code.
RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

// artifact writers (deterministic: 17 significant digits, LF endings,
// stable key order)
std::string branch_csv(const Branch& branch);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace nlbif
