#include "nlbif/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace nlbif {

namespace {

struct Token {
  enum class Kind { number, string, boolean, num_array, str_array };
  Kind kind = Kind::number;
  double num = 0.0;
  std::string raw;  // original text, kept for exact rational parsing
  std::string str;
  bool b = false;
  std::vector<double> nums;
  std::vector<std::string> strs;
  int line = 0;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

Token parse_value(const std::string& text, int line, const std::string& key) {
  Token t;
  t.line = line;
  t.raw = text;
  if (text.empty()) throw ConfigError("line " + std::to_string(line) + ": empty value for " + key);

  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"')
      throw ConfigError("line " + std::to_string(line) + ": unterminated string for " + key);
    t.kind = Token::Kind::string;
    t.str = text.substr(1, text.size() - 2);
    return t;
  }
  if (text == "true" || text == "false") {
    t.kind = Token::Kind::boolean;
    t.b = text == "true";
    return t;
  }
  if (text.front() == '[') {
    if (text.back() != ']')
      throw ConfigError("line " + std::to_string(line) + ": unterminated array for " + key);
    std::string body = text.substr(1, text.size() - 2);
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : body) {
      if (ch == ',') {
        parts.push_back(trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty()) parts.push_back(trim(cur));
    bool strings = !parts.empty() && parts.front().size() && parts.front().front() == '"';
    if (strings) {
      t.kind = Token::Kind::str_array;
      for (auto& p : parts) {
        if (p.size() < 2 || p.front() != '"' || p.back() != '"')
          throw ConfigError("line " + std::to_string(line) + ": bad string array for " + key);
        t.strs.push_back(p.substr(1, p.size() - 2));
      }
    } else {
      t.kind = Token::Kind::num_array;
      for (auto& p : parts) {
        double v;
        if (!parse_number(p, v))
          throw ConfigError("line " + std::to_string(line) + ": bad number '" + p + "' in " + key);
        t.nums.push_back(v);
      }
    }
    return t;
  }
  double v;
  if (!parse_number(text, v))
    throw ConfigError("line " + std::to_string(line) + ": cannot parse value '" + text + "' for " +
                      key);
  t.kind = Token::Kind::number;
  t.num = v;
  return t;
}

class Table {
 public:
  explicit Table(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    std::string prefix;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
        prefix = trim(line.substr(1, line.size() - 2));
        if (prefix.empty())
          throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      std::string full = prefix.empty() ? key : prefix + "." + key;
      if (values_.count(full))
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + full);
      values_.emplace(full, parse_value(val, lineno, full));
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const Token& require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigError("missing required key '" + key + "' in " + path_);
    return it->second;
  }

  double number(const std::string& key) const {
    const Token& t = require(key);
    if (t.kind != Token::Kind::number)
      throw ConfigError("line " + std::to_string(t.line) + ": " + key + " must be a number");
    return t.num;
  }
  double number_or(const std::string& key, double dflt) const {
    return has(key) ? number(key) : dflt;
  }
  int integer(const std::string& key) const { return static_cast<int>(number(key)); }
  bool boolean_or(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const Token& t = require(key);
    if (t.kind != Token::Kind::boolean)
      throw ConfigError("line " + std::to_string(t.line) + ": " + key + " must be true/false");
    return t.b;
  }
  std::string string(const std::string& key) const {
    const Token& t = require(key);
    if (t.kind != Token::Kind::string)
      throw ConfigError("line " + std::to_string(t.line) + ": " + key + " must be a string");
    return t.str;
  }
  std::string string_or(const std::string& key, const std::string& dflt) const {
    return has(key) ? string(key) : dflt;
  }
  std::vector<double> numbers(const std::string& key) const {
    const Token& t = require(key);
    if (t.kind == Token::Kind::num_array) return t.nums;
    if (t.kind == Token::Kind::number) return {t.num};
    throw ConfigError("line " + std::to_string(t.line) + ": " + key + " must be a number array");
  }
  /// Rationals accept "3/2" strings, bare integers and finite decimals.
  Rational rational(const std::string& key) const {
    const Token& t = require(key);
    if (t.kind == Token::Kind::string) return Rational::parse(t.str);
    if (t.kind == Token::Kind::number) return Rational::parse(t.raw);
    throw ConfigError("line " + std::to_string(t.line) + ": " + key + " must be a rational");
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::map<std::string, Token> values_;
};

std::string stem_of(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

ScenarioConfig::FieldCfg read_field(const Table& t, const std::string& sec) {
  ScenarioConfig::FieldCfg f;
  if (!t.has(sec + ".kind")) return f;  // defaults to zero
  f.kind = t.string(sec + ".kind");
  if (f.kind == "constant") {
    f.components = t.numbers(sec + ".components");
  } else if (f.kind == "rotation") {
    f.strength = t.number(sec + ".strength");
    auto c = t.has(sec + ".center") ? t.numbers(sec + ".center") : std::vector<double>{0.0, 0.0};
    if (c.size() != 2) throw ConfigError(sec + ".center needs two entries");
    f.center = {c[0], c[1]};
  } else if (f.kind == "shear") {
    f.out_axis = static_cast<int>(t.number_or(sec + ".out_axis", 0));
    f.in_axis = static_cast<int>(t.number_or(sec + ".in_axis", 0));
    f.rate = t.number(sec + ".rate");
  } else if (f.kind == "grad-scalar") {
    f.linear = t.numbers(sec + ".linear");
    f.quadratic = t.numbers(sec + ".quadratic");
  } else if (f.kind == "tabulated") {
    f.samples.push_back(t.numbers(sec + ".values_x"));
    if (t.has(sec + ".values_y")) f.samples.push_back(t.numbers(sec + ".values_y"));
  } else if (f.kind != "zero") {
    throw ConfigError(sec + ".kind '" + f.kind + "' is not a known field kind");
  }
  return f;
}

ScenarioConfig::KernelCfg read_kernel(const Table& t, const std::string& sec) {
  ScenarioConfig::KernelCfg k;
  k.kind = t.string(sec + ".kind");
  if (k.kind == "constant") {
    k.value = t.number(sec + ".value");
  } else if (k.kind == "gaussian") {
    k.length = t.number(sec + ".length");
  } else if (k.kind == "band") {
    k.radius = t.number(sec + ".radius");
    k.value = t.number_or(sec + ".value", 1.0);
  } else if (k.kind == "separable") {
    k.sep_scale = t.number_or(sec + ".scale", 1.0);
    k.sep_power = static_cast<int>(t.number_or(sec + ".power", 1));
  } else {
    throw ConfigError(sec + ".kind '" + k.kind + "' is not a known kernel kind");
  }
  return k;
}

ScenarioConfig::ReactionCfg read_reaction(const Table& t, const std::string& sec) {
  ScenarioConfig::ReactionCfg r;
  r.family = t.string(sec + ".family");
  if (r.family == "mixed") {
    r.mu = t.rational(sec + ".mu");
  } else if (r.family == "weighted") {
    r.c1 = t.number(sec + ".c1");
    r.c2 = t.number(sec + ".c2");
  } else if (r.family != "power") {
    throw ConfigError(sec + ".family '" + r.family + "' is not a known reaction family");
  }
  return r;
}

}  // namespace

RunKind parse_run_kind(const std::string& s) {
  if (s == "eig") return RunKind::eig;
  if (s == "verify") return RunKind::verify;
  if (s == "branch") return RunKind::branch;
  if (s == "direction") return RunKind::direction;
  if (s == "hypotheses") return RunKind::hypotheses;
  if (s == "identity-check") return RunKind::identity_check;
  throw ConfigError("unknown run kind '" + s + "'");
}

std::string to_string(RunKind k) {
  switch (k) {
    case RunKind::eig: return "eig";
    case RunKind::verify: return "verify";
    case RunKind::branch: return "branch";
    case RunKind::direction: return "direction";
    case RunKind::hypotheses: return "hypotheses";
    case RunKind::identity_check: return "identity-check";
  }
  return "?";
}

std::string to_string(Mode m) {
  return m == Mode::linear_advection ? "linear-advection" : "power-advection";
}

ScenarioConfig load_config(const std::string& path) {
  Table t(path);
  ScenarioConfig cfg;
  cfg.name = t.string_or("name", stem_of(path));
  cfg.kind = parse_run_kind(t.string("kind"));
  std::string mode = t.string("mode");
  if (mode == "linear-advection") {
    cfg.mode = Mode::linear_advection;
  } else if (mode == "power-advection") {
    cfg.mode = Mode::power_advection;
  } else {
    throw ConfigError("mode must be linear-advection or power-advection, got '" + mode + "'");
  }

  cfg.dim = t.integer("domain.dim");
  if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("domain.dim must be 1 or 2");
  auto xb = t.numbers("domain.x");
  if (xb.size() != 2) throw ConfigError("domain.x needs [low, high]");
  cfg.bounds[0] = {xb[0], xb[1]};
  if (cfg.dim == 2) {
    auto yb = t.numbers("domain.y");
    if (yb.size() != 2) throw ConfigError("domain.y needs [low, high]");
    cfg.bounds[1] = {yb[0], yb[1]};
  }
  auto nn = t.numbers("domain.n");
  if (static_cast<int>(nn.size()) != cfg.dim)
    throw ConfigError("domain.n needs one entry per axis");
  cfg.n[0] = static_cast<int>(nn[0]);
  cfg.n[1] = cfg.dim == 2 ? static_cast<int>(nn[1]) : 1;

  cfg.A.a = t.number("coupling.a");
  cfg.A.b = t.number("coupling.b");
  cfg.A.c = t.number("coupling.c");
  cfg.A.d = t.number("coupling.d");
  const char* names[4] = {"a", "b", "c", "d"};
  double entries[4] = {cfg.A.a, cfg.A.b, cfg.A.c, cfg.A.d};
  for (int i = 0; i < 4; ++i) {
    if (!(entries[i] > 0.0))
      throw ConfigError(std::string("constraint violation: A.") + names[i] +
                        " (coupling." + names[i] + ") must be positive");
  }

  cfg.p = t.rational("p");
  cfg.q = t.rational("q");
  cfg.gamma = t.rational("gamma");
  if (!(cfg.gamma.value() > 0.0)) throw ConfigError("constraint violation: gamma must be positive");

  cfg.alpha = read_field(t, "advection.alpha");
  cfg.beta = t.has("advection.beta.kind") ? read_field(t, "advection.beta") : cfg.alpha;

  cfg.kernel_u = read_kernel(t, "kernel_u");
  cfg.kernel_v = read_kernel(t, "kernel_v");
  cfg.reaction_u = read_reaction(t, "reaction_u");
  cfg.reaction_v = read_reaction(t, "reaction_v");

  if (t.has("sweep.multipliers")) cfg.multipliers = t.numbers("sweep.multipliers");
  if (t.has("sweep.seed_amplitudes")) cfg.seed_amplitudes = t.numbers("sweep.seed_amplitudes");
  for (double s : cfg.seed_amplitudes)
    if (!(s > 0.0)) throw ConfigError("sweep.seed_amplitudes must be positive");

  cfg.continuation.initial_epsilon = t.number_or("continuation.initial_epsilon", 5e-3);
  cfg.continuation.step = t.number_or("continuation.step", 5e-3);
  cfg.continuation.max_points = static_cast<int>(t.number_or("continuation.max_points", 20));
  cfg.continuation.newton_tol = t.number_or("continuation.newton_tol", 1e-11);
  cfg.continuation.arclength = t.boolean_or("continuation.arclength", true);
  cfg.continuation.amplitude_cap = t.number_or("continuation.amplitude_cap", 10.0);

  cfg.newton_tol = t.number_or("run.newton_tol", 1e-10);
  cfg.newton_max_iter = static_cast<int>(t.number_or("run.max_iter", 60));
  cfg.zero_tol = t.number_or("run.zero_tol", 1e-8);
  cfg.blowup_cap = t.number_or("run.blowup_cap", 1e6);
  cfg.continuation.blowup_cap = cfg.blowup_cap;
  cfg.kernel_class_eps = t.number_or("run.kernel_class_eps", 0.0);
  cfg.relax_divergence = t.boolean_or("relax_divergence", false);

  cfg.seed = static_cast<std::uint64_t>(t.number_or("seed", 0.0));
  cfg.out_stem = t.string_or("output.stem", cfg.name);

  // cheap structural re-validation; the full mode checks run in build_problem
  if (cfg.mode == Mode::linear_advection) {
    const Rational one(1);
    if (!(cfg.p == one) || !(cfg.q == one))
      throw ConfigError("constraint violation: linear-advection mode requires p = q = 1");
    ScenarioConfig::FieldCfg a = cfg.alpha, b = cfg.beta;
    bool same = a.kind == b.kind && a.components == b.components && a.strength == b.strength &&
                a.center == b.center && a.out_axis == b.out_axis && a.in_axis == b.in_axis &&
                a.rate == b.rate && a.linear == b.linear && a.quadratic == b.quadratic &&
                a.samples == b.samples;
    if (!same)
      throw ConfigError(
          "constraint violation: linear-advection mode requires identical advection fields "
          "(alpha = beta)");
  }
  return cfg;
}

void apply_mesh_scale(ScenarioConfig& cfg, int k) {
  if (k < 1) throw ConfigError("mesh scale must be a positive integer");
  cfg.n[0] *= k;
  if (cfg.dim == 2) cfg.n[1] *= k;
}

Grid make_grid(const ScenarioConfig& cfg) {
  if (cfg.dim == 1) return Grid::interval(cfg.bounds[0][0], cfg.bounds[0][1], cfg.n[0]);
  return Grid::rectangle({cfg.bounds[0][0], cfg.bounds[0][1]},
                         {cfg.bounds[1][0], cfg.bounds[1][1]}, cfg.n[0], cfg.n[1]);
}

VectorField make_field(const ScenarioConfig::FieldCfg& f, const Grid& g,
                       const std::string& where) {
  if (f.kind == "zero") return VectorField::zero();
  if (f.kind == "constant") return VectorField::constant(f.components);
  if (f.kind == "rotation") {
    if (g.dim() != 2) throw ConfigError(where + ": rotation fields need a 2D domain");
    return VectorField::rotation(f.strength, f.center);
  }
  if (f.kind == "shear") return VectorField::shear(f.out_axis, f.in_axis, f.rate);
  if (f.kind == "grad-scalar") return VectorField::grad_scalar(f.linear, f.quadratic);
  if (f.kind == "tabulated") {
    std::vector<Eigen::VectorXd> samples;
    for (const auto& axis_vals : f.samples) {
      Eigen::VectorXd v(axis_vals.size());
      for (std::size_t i = 0; i < axis_vals.size(); ++i) v[i] = axis_vals[i];
      samples.push_back(std::move(v));
    }
    return VectorField::tabulated(g, std::move(samples));
  }
  throw ConfigError(where + ": unknown field kind " + f.kind);
}

Kernel make_kernel(const ScenarioConfig::KernelCfg& k, int dim, const std::string& where) {
  if (k.kind == "constant") return Kernel::constant(k.value);
  if (k.kind == "gaussian") return Kernel::gaussian(k.length);
  if (k.kind == "band") return Kernel::band(k.radius, k.value);
  if (k.kind == "separable") {
    // profile scale * prod_k x_k^power on each side
    double scale = k.sep_scale;
    int power = k.sep_power;
    auto monomial = [dim, power](std::array<double, 2> x) {
      double v = 1.0;
      for (int e = 0; e < power; ++e) {
        v *= x[0];
        if (dim == 2) v *= x[1];
      }
      return v;
    };
    auto profile_a = [scale, monomial](std::array<double, 2> x) { return scale * monomial(x); };
    return Kernel::separable(profile_a, monomial);
  }
  throw ConfigError(where + ": unknown kernel kind " + k.kind);
}

Reaction make_reaction(const ScenarioConfig::ReactionCfg& r, const Rational& gamma,
                       Reaction::Major major, const std::string& where) {
  if (r.family == "power") return Reaction::power(gamma, major);
  if (r.family == "mixed") return Reaction::mixed(gamma, r.mu, major);
  if (r.family == "weighted") return Reaction::weighted(gamma, r.c1, r.c2, major);
  throw ConfigError(where + ": unknown reaction family " + r.family);
}

Problem build_problem(const ScenarioConfig& cfg) {
  Grid g = make_grid(cfg);
  VectorField alpha = make_field(cfg.alpha, g, "advection.alpha");
  VectorField beta = make_field(cfg.beta, g, "advection.beta");
  Kernel ku = make_kernel(cfg.kernel_u, g.dim(), "kernel_u");
  Kernel kv = make_kernel(cfg.kernel_v, g.dim(), "kernel_v");
  Reaction fu = make_reaction(cfg.reaction_u, cfg.gamma, Reaction::Major::first, "reaction_u");
  Reaction fv = make_reaction(cfg.reaction_v, cfg.gamma, Reaction::Major::second, "reaction_v");
  return make_problem(cfg.mode, g, cfg.A, cfg.p, cfg.q, cfg.gamma, alpha, beta, ku, kv, fu, fv,
                      cfg.relax_divergence);
}

}  // namespace nlbif
