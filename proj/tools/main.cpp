// Command-line driver: eigenvalue thresholds, existence sweeps, branch
// continuation, bifurcation-direction analysis and hypothesis checks for the
// nonlocal logistic system with nonlinear advection.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nlbif/runner.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int mesh_scale = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "scenario file")->required();
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "override the scenario seed")
      ->each([&](const std::string&) { o.seed_set = true; });
  cmd->add_option("--mesh-scale", o.mesh_scale, "multiply per-axis n")->check(CLI::PositiveNumber);
}

int run(const CommonOpts& o, nlbif::RunKind expected, bool allow_identity) {
  nlbif::ScenarioConfig cfg = nlbif::load_config(o.config);
  if (cfg.kind != expected && !(allow_identity && cfg.kind == nlbif::RunKind::identity_check)) {
    throw nlbif::ConfigError("scenario kind '" + nlbif::to_string(cfg.kind) +
                             "' does not match the subcommand");
  }
  if (o.seed_set) cfg.seed = o.seed;
  if (o.mesh_scale != 1) nlbif::apply_mesh_scale(cfg, o.mesh_scale);
  nlbif::RunArtifacts art = nlbif::run_scenario(cfg, o.out);
  std::cout << art.summary;
  for (const auto& f : art.files) std::cout << "wrote " << f << "\n";
  return art.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal logistic system solver and verification toolkit"};
  app.require_subcommand(1);

  CommonOpts eig_o, verify_o, branch_o, direction_o, hyp_o;
  auto* eig = app.add_subcommand("eig", "principal eigenvalues and the threshold t1");
  add_common(eig, eig_o);
  auto* verify = app.add_subcommand("verify", "existence/nonexistence sweep around t1");
  add_common(verify, verify_o);
  auto* branch = app.add_subcommand("branch", "positive-branch continuation, CSV export");
  add_common(branch, branch_o);
  auto* direction = app.add_subcommand("direction", "bifurcation direction analysis");
  add_common(direction, direction_o);
  auto* hyp = app.add_subcommand("hypotheses", "kernel/reaction hypothesis checks");
  add_common(hyp, hyp_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (eig->parsed()) return run(eig_o, nlbif::RunKind::eig, false);
    if (verify->parsed()) return run(verify_o, nlbif::RunKind::verify, false);
    if (branch->parsed()) return run(branch_o, nlbif::RunKind::branch, false);
    if (direction->parsed()) return run(direction_o, nlbif::RunKind::direction, false);
    if (hyp->parsed()) return run(hyp_o, nlbif::RunKind::hypotheses, true);
  } catch (const nlbif::SolverError& e) {
    std::cerr << "solver fault: " << e.what() << "\n";
    return 4;
  } catch (const nlbif::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const nlbif::HypothesisError& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return 3;
  } catch (const nlbif::DomainError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
