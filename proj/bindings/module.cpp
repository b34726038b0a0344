#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlbif/runner.hpp"

namespace py = pybind11;
using namespace nlbif;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Solver and verification toolkit for nonlocal logistic systems "
            "with nonlinear advection";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DomainError>(m, "DomainError");
  py::register_exception<SolverError>(m, "SolverError");
  py::register_exception<HypothesisError>(m, "HypothesisError");

  py::class_<Rational>(m, "Rational")
      .def(py::init<long long, long long>(), py::arg("num"), py::arg("den") = 1)
      .def_static("parse", [](const std::string& s) { return Rational::parse(s); })
      .def_readonly("num", &Rational::num)
      .def_readonly("den", &Rational::den)
      .def("value", &Rational::value)
      .def("__repr__", [](const Rational& r) { return "Rational(" + r.str() + ")"; });

  py::class_<Grid>(m, "Grid")
      .def_static("interval", &Grid::interval, py::arg("low"), py::arg("high"), py::arg("n"))
      .def_static("rectangle", &Grid::rectangle, py::arg("x_bounds"), py::arg("y_bounds"),
                  py::arg("nx"), py::arg("ny"))
      .def_property_readonly("dim", &Grid::dim)
      .def("count", &Grid::count)
      .def("spacing", &Grid::spacing)
      .def("size", &Grid::size)
      .def("measure", &Grid::measure)
      .def("node_weight", &Grid::node_weight)
      .def("point", &Grid::point);

  py::class_<GridField>(m, "GridField")
      .def(py::init<const Grid&>())
      .def(py::init<const Grid&, Eigen::VectorXd>())
      .def_static("sample", &GridField::sample)
      .def_readonly("grid", &GridField::grid)
      .def_property(
          "values", [](const GridField& f) { return f.values; },
          [](GridField& f, const Eigen::VectorXd& v) {
            if (v.size() != f.values.size()) throw DomainError("field size mismatch");
            f.values = v;
          })
      .def("max", &GridField::max)
      .def("min", &GridField::min)
      .def("linf", &GridField::linf);

  py::class_<VectorField>(m, "VectorField")
      .def_static("zero", &VectorField::zero)
      .def_static("constant", &VectorField::constant)
      .def_static("rotation", &VectorField::rotation, py::arg("strength"),
                  py::arg("center") = std::array<double, 2>{0.0, 0.0})
      .def_static("shear", &VectorField::shear, py::arg("out_axis"), py::arg("in_axis"),
                  py::arg("rate"))
      .def_static("grad_scalar", &VectorField::grad_scalar)
      .def_static("tabulated", &VectorField::tabulated)
      .def("divergence_free_by_construction", &VectorField::divergence_free_by_construction);

  m.def("gradient", &gradient);
  m.def("divergence", &divergence);
  m.def("advect", &advect);
  m.def("integrate", &integrate);
  m.def("inner", &inner);
  m.def("advection_identity_residual", &advection_identity_residual, py::arg("u"), py::arg("vf"),
        py::arg("p"));

  py::class_<EllipticOperator>(m, "EllipticOperator")
      .def(py::init<const Grid&, std::optional<VectorField>>(), py::arg("grid"),
           py::arg("advection") = std::nullopt)
      .def("apply", &EllipticOperator::apply)
      .def("dense", &EllipticOperator::dense);

  py::class_<EigenPair>(m, "EigenPair")
      .def_readonly("lambda_", &EigenPair::lambda)
      .def_readonly("phi", &EigenPair::phi)
      .def_readonly("residual", &EigenPair::residual)
      .def_readonly("iterations", &EigenPair::iterations);

  m.def("principal_eigenpair", &principal_eigenpair, py::arg("op"), py::arg("tol") = 1e-10,
        py::arg("max_iter") = 500);

  py::class_<CouplingMatrix>(m, "CouplingMatrix")
      .def(py::init([](double a, double b, double c, double d) {
             return CouplingMatrix{a, b, c, d};
           }),
           py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
      .def_readonly("a", &CouplingMatrix::a)
      .def_readonly("b", &CouplingMatrix::b)
      .def_readonly("c", &CouplingMatrix::c)
      .def_readonly("d", &CouplingMatrix::d);

  py::class_<MatrixEigen>(m, "MatrixEigen")
      .def_readonly("lambda_A", &MatrixEigen::lambda_A)
      .def_readonly("z", &MatrixEigen::z)
      .def_readonly("sigma", &MatrixEigen::sigma)
      .def_readonly("b_hat", &MatrixEigen::b_hat)
      .def_readonly("A0", &MatrixEigen::A0);

  m.def("coupling_eigen", &coupling_eigen);
  m.def("threshold", &threshold, py::arg("A"), py::arg("op"), py::arg("eig_tol") = 1e-10);

  py::class_<Kernel>(m, "Kernel")
      .def_static("constant", &Kernel::constant)
      .def_static("gaussian", &Kernel::gaussian)
      .def_static("band", &Kernel::band, py::arg("radius"), py::arg("value") = 1.0)
      .def_static("separable", &Kernel::separable)
      .def_static("tabulated", &Kernel::tabulated);

  py::class_<KernelMatrix>(m, "KernelMatrix")
      .def(py::init<const Kernel&, const Grid&>())
      .def("apply", &KernelMatrix::apply)
      .def("dense", &KernelMatrix::dense)
      .def("kernel_sup", &KernelMatrix::kernel_sup);

  py::enum_<Reaction::Major>(m, "Major")
      .value("first", Reaction::Major::first)
      .value("second", Reaction::Major::second);

  py::class_<Reaction>(m, "Reaction")
      .def_static("power", &Reaction::power, py::arg("gamma"),
                  py::arg("major") = Reaction::Major::first)
      .def_static("mixed", &Reaction::mixed, py::arg("gamma"), py::arg("mu"),
                  py::arg("major") = Reaction::Major::first)
      .def_static("weighted", &Reaction::weighted, py::arg("gamma"), py::arg("c1"), py::arg("c2"),
                  py::arg("major") = Reaction::Major::first)
      .def("__call__", &Reaction::operator())
      .def("d_first", &Reaction::d_first)
      .def("d_second", &Reaction::d_second)
      .def("eps0", &Reaction::eps0);

  m.def("apply_nonlocal", &apply_nonlocal);
  m.def("kernel_weighted_mass", &kernel_weighted_mass);
  m.def("check_phi_bound", &check_phi_bound);

  py::class_<KernelClassReport>(m, "KernelClassReport")
      .def_readonly("pass_", &KernelClassReport::pass)
      .def_readonly("eps", &KernelClassReport::eps)
      .def_readonly("witness_x", &KernelClassReport::witness_x)
      .def_readonly("witness_y", &KernelClassReport::witness_y)
      .def_readonly("failing_node", &KernelClassReport::failing_node)
      .def_readonly("detail", &KernelClassReport::detail);
  m.def("check_kernel_class", &check_kernel_class);

  py::enum_<Mode>(m, "Mode")
      .value("linear_advection", Mode::linear_advection)
      .value("power_advection", Mode::power_advection);

  py::class_<State>(m, "State")
      .def(py::init<const Grid&>())
      .def(py::init<GridField, GridField>())
      .def_readwrite("u", &State::u)
      .def_readwrite("v", &State::v)
      .def("linf", &State::linf);

  py::class_<Problem>(m, "Problem")
      .def_readonly("mode", &Problem::mode)
      .def_readonly("grid", &Problem::grid)
      .def_readonly("A", &Problem::A);

  m.def("make_problem", &make_problem, py::arg("mode"), py::arg("grid"), py::arg("A"),
        py::arg("p"), py::arg("q"), py::arg("gamma"), py::arg("alpha"), py::arg("beta"),
        py::arg("kernel_u"), py::arg("kernel_v"), py::arg("react_u"), py::arg("react_v"),
        py::arg("relax_divergence") = false);

  m.def("residual", &residual);
  m.def("jacobian", &jacobian);

  py::class_<PositivityResult>(m, "PositivityResult")
      .def_readonly("positive", &PositivityResult::positive)
      .def_readonly("margin", &PositivityResult::margin);
  m.def("positivity_check", &positivity_check);

  py::class_<NewtonResult>(m, "NewtonResult")
      .def_readonly("U", &NewtonResult::U)
      .def_readonly("converged", &NewtonResult::converged)
      .def_readonly("iterations", &NewtonResult::iterations)
      .def_readonly("residual_norm", &NewtonResult::residual_norm)
      .def_readonly("reason", &NewtonResult::reason);
  m.def("newton_solve", &newton_solve, py::arg("problem"), py::arg("t"), py::arg("U0"),
        py::arg("tol") = 1e-10, py::arg("max_iter") = 60, py::arg("blowup_cap") = 1e6);

  py::enum_<BranchDirection>(m, "BranchDirection")
      .value("supercritical", BranchDirection::supercritical)
      .value("subcritical", BranchDirection::subcritical)
      .value("undetermined", BranchDirection::undetermined);

  py::class_<BranchPoint>(m, "BranchPoint")
      .def_readonly("t", &BranchPoint::t)
      .def_readonly("U", &BranchPoint::U)
      .def_readonly("amplitude", &BranchPoint::amplitude)
      .def_readonly("epsilon", &BranchPoint::epsilon)
      .def_readonly("residual_norm", &BranchPoint::residual_norm)
      .def_readonly("rho_norm", &BranchPoint::rho_norm);

  py::class_<Branch>(m, "Branch")
      .def_readonly("t1", &Branch::t1)
      .def_readonly("V", &Branch::V)
      .def_readonly("points", &Branch::points)
      .def_readonly("direction", &Branch::direction)
      .def_readonly("truncation_reason", &Branch::truncation_reason);

  py::class_<ContinuationSettings>(m, "ContinuationSettings")
      .def(py::init<>())
      .def_readwrite("initial_epsilon", &ContinuationSettings::initial_epsilon)
      .def_readwrite("step", &ContinuationSettings::step)
      .def_readwrite("max_points", &ContinuationSettings::max_points)
      .def_readwrite("newton_tol", &ContinuationSettings::newton_tol)
      .def_readwrite("arclength", &ContinuationSettings::arclength)
      .def_readwrite("amplitude_cap", &ContinuationSettings::amplitude_cap)
      .def_readwrite("blowup_cap", &ContinuationSettings::blowup_cap);

  m.def("bifurcation_seed", &bifurcation_seed, py::arg("problem"), py::arg("eig_tol") = 1e-10);
  m.def("continue_branch", &continue_branch);

  py::class_<DirectionVerdict>(m, "DirectionVerdict")
      .def_readonly("direction", &DirectionVerdict::direction)
      .def_readonly("eta_samples", &DirectionVerdict::eta_samples);
  m.def("detect_direction", &detect_direction);

  py::enum_<SignVerdict>(m, "SignVerdict")
      .value("formula_consistent", SignVerdict::formula_consistent)
      .value("alt_sign_consistent", SignVerdict::alt_sign_consistent)
      .value("inconsistent", SignVerdict::inconsistent);

  m.def("delta_exponent", &delta_exponent);
  m.def("effective_delta", &effective_delta);
  m.def("transversality_denominator", &transversality_denominator);

  py::class_<EtaLimits>(m, "EtaLimits")
      .def_readonly("delta", &EtaLimits::delta)
      .def_readonly("case_id", &EtaLimits::case_id)
      .def_readonly("denominator", &EtaLimits::denominator)
      .def_readonly("closed_form", &EtaLimits::closed_form)
      .def_readonly("alt_sign", &EtaLimits::alt_sign)
      .def_readonly("degenerate", &EtaLimits::degenerate);
  m.def("eta_limit", &eta_limit);
  m.def("eta_quotient", &eta_quotient);

  py::class_<EtaSample>(m, "EtaSample")
      .def_readonly("epsilon", &EtaSample::epsilon)
      .def_readonly("slope_form", &EtaSample::slope_form)
      .def_readonly("quotient_form", &EtaSample::quotient_form);
  m.def("empirical_eta", &empirical_eta);

  py::class_<DirectionReport>(m, "DirectionReport")
      .def_readonly("delta", &DirectionReport::delta)
      .def_readonly("case_id", &DirectionReport::case_id)
      .def_readonly("denominator", &DirectionReport::denominator)
      .def_readonly("closed_form_limit", &DirectionReport::closed_form_limit)
      .def_readonly("alt_sign_limit", &DirectionReport::alt_sign_limit)
      .def_readonly("degenerate", &DirectionReport::degenerate)
      .def_readonly("empirical_samples", &DirectionReport::empirical_samples)
      .def_readonly("empirical_limit", &DirectionReport::empirical_limit)
      .def_readonly("direction", &DirectionReport::direction)
      .def_readonly("verdict", &DirectionReport::verdict);
  m.def("analyze_direction", &analyze_direction);

  py::enum_<RunKind>(m, "RunKind")
      .value("eig", RunKind::eig)
      .value("verify", RunKind::verify)
      .value("branch", RunKind::branch)
      .value("direction", RunKind::direction)
      .value("hypotheses", RunKind::hypotheses)
      .value("identity_check", RunKind::identity_check);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readonly("name", &ScenarioConfig::name)
      .def_readonly("kind", &ScenarioConfig::kind)
      .def_readonly("mode", &ScenarioConfig::mode)
      .def_readonly("seed", &ScenarioConfig::seed)
      .def_readwrite("out_stem", &ScenarioConfig::out_stem);
  m.def("load_config", &load_config);
  m.def("apply_mesh_scale", &apply_mesh_scale);
  m.def("build_problem", &build_problem);

  py::class_<RunArtifacts>(m, "RunArtifacts")
      .def_readonly("files", &RunArtifacts::files)
      .def_readonly("exit_code", &RunArtifacts::exit_code)
      .def_readonly("summary", &RunArtifacts::summary);
  m.def("run_scenario", &run_scenario, py::arg("config"), py::arg("out_dir"));
}
