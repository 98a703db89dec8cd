#include "perdde/config.hpp"

#include <fstream>
#include <set>

#include "perdde/error.hpp"

namespace perdde {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ConfigInvalid, path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& j, const std::string& path, const std::set<std::string>& known) {
  if (!j.is_object()) invalid(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) invalid(join(path, key), "unknown field");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) invalid(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(path, "must be finite");
  return x;
}

double number_or(const json& j, const std::string& path, const std::string& key, double fallback) {
  return j.contains(key) ? number(j.at(key), join(path, key)) : fallback;
}

std::optional<double> optional_number(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number(j.at(key), join(path, key));
}

long long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) invalid(path, "expected an integer");
  return v.get<long long>();
}

int int_or(const json& j, const std::string& path, const std::string& key, int fallback, int lo, int hi) {
  if (!j.contains(key)) return fallback;
  const long long x = integer(j.at(key), join(path, key));
  if (x < lo || x > hi) {
    invalid(join(path, key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(x);
}

bool bool_or(const json& j, const std::string& path, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) invalid(join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

Vec vector(const json& v, const std::string& path, std::optional<int> size = std::nullopt) {
  if (!v.is_array()) invalid(path, "expected an array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], path + "[" + std::to_string(i) + "]");
  if (size && out.size() != *size) invalid(path, "expected " + std::to_string(*size) + " entries");
  return out;
}

Mat matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) invalid(path, "expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  Mat M(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    M.row(r) = vector(v[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]", static_cast<int>(n)).transpose();
  }
  return M;
}

json to_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Mat& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) rows.push_back(to_json(Vec(M.row(r).transpose())));
  return rows;
}

std::vector<double> broadcast(const json& j, const std::string& path, const std::string& key, int count, double fallback) {
  if (!j.contains(key)) return std::vector<double>(static_cast<std::size_t>(count), fallback);
  const json& v = j.at(key);
  if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(count), number(v, join(path, key)));
  const Vec x = vector(v, join(path, key), count);
  return {x.data(), x.data() + x.size()};
}

void parse_system(const json& j, RunConfig& cfg) {
  const std::string path = "system";
  if (!j.contains("kind") || !j.at("kind").is_string()) invalid("system.kind", "expected \"linear\" or \"example\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    check_keys(j, path, {"kind", "A", "B"});
    cfg.kind = SystemKind::Linear;
    if (!j.contains("A")) invalid("system.A", "required for the linear system");
    cfg.A = matrix(j.at("A"), "system.A");
    cfg.B = j.contains("B") ? matrix(j.at("B"), "system.B") : Mat::Zero(cfg.A.rows(), cfg.A.cols());
    if (cfg.B.rows() != cfg.A.rows()) invalid("system.B", "must match the size of A");
    return;
  }
  if (kind != "example") invalid("system.kind", "unknown system \"" + kind + "\"");
  check_keys(j, path, {"kind", "N", "J", "J0", "d", "a", "alpha", "v"});
  cfg.kind = SystemKind::Example;
  ExampleParams& p = cfg.example;
  p.N = int_or(j, path, "N", 2, 1, 64);
  p.J = int_or(j, path, "J", 2, 1, 1000);
  p.J0 = int_or(j, path, "J0", p.J, 0, p.J);
  p.d = number_or(j, path, "d", 1.0);
  p.a = broadcast(j, path, "a", p.J, 1.0);
  p.alpha = broadcast(j, path, "alpha", p.J, 3.0);
  p.v.clear();
  if (j.contains("v")) {
    const json& v = j.at("v");
    if (!v.is_array() || static_cast<int>(v.size()) != p.J) invalid("system.v", "expected J centers");
    for (std::size_t i = 0; i < v.size(); ++i) p.v.push_back(vector(v[i], "system.v[" + std::to_string(i) + "]", p.N));
  } else {
    // Default centers: unit spacing on the first axis, none at the origin.
    for (int i = 0; i < p.J; ++i) {
      Vec c = Vec::Zero(p.N);
      c[0] = (i - 0.5 * (p.J - 1)) + (p.J % 2 == 1 ? 0.5 : 0.0);
      p.v.push_back(c);
    }
  }
  try {
    p.validate();
  } catch (const Error& e) {
    invalid("system", e.what());
  }
}

void parse_domain(const json& j, RunConfig& cfg) {
  const std::string path = "domain";
  check_keys(j, path, {"R", "eta", "holes", "chi"});
  DomainSpec& d = cfg.domain;
  d.R = number_or(j, path, "R", d.R);
  if (!(d.R > 0.0)) invalid("domain.R", "must be positive");
  d.eta = optional_number(j, path, "eta");
  if (d.eta && !(*d.eta > 0.0)) invalid("domain.eta", "must be positive");
  if (j.contains("chi") && !j.at("chi").is_null()) d.chi = static_cast<int>(integer(j.at("chi"), "domain.chi"));
  d.holes.clear();
  if (j.contains("holes")) {
    const json& h = j.at("holes");
    if (!h.is_array()) invalid("domain.holes", "expected an array");
    for (std::size_t i = 0; i < h.size(); ++i) {
      const std::string hp = "domain.holes[" + std::to_string(i) + "]";
      check_keys(h[i], hp, {"center", "eta"});
      Hole hole;
      if (!h[i].contains("center")) invalid(hp + ".center", "required");
      hole.center = vector(h[i].at("center"), hp + ".center", cfg.dim());
      hole.eta = h[i].contains("eta") ? number(h[i].at("eta"), hp + ".eta") : d.eta.value_or(0.0);
      if (!(hole.eta > 0.0)) invalid(hp + ".eta", "must be positive");
      d.holes.push_back(hole);
    }
  }
}

void parse_forcing(const json& j, RunConfig& cfg) {
  const std::string path = "forcing";
  check_keys(j, path, {"amplitude", "a0", "cos", "sin"});
  const int n = cfg.dim();
  ForcingSpec& f = cfg.forcing;
  f.amplitude = number_or(j, path, "amplitude", 1.0);
  if (f.amplitude < 0.0) invalid("forcing.amplitude", "must be non-negative");
  f.a0 = j.contains("a0") ? vector(j.at("a0"), "forcing.a0", n) : Vec::Zero(n);
  auto harmonics = [&](const std::string& key) {
    std::vector<Vec> out;
    if (!j.contains(key)) return out;
    const json& v = j.at(key);
    if (!v.is_array()) invalid(join(path, key), "expected an array of vectors, one per harmonic");
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(vector(v[i], join(path, key) + "[" + std::to_string(i) + "]", n));
    return out;
  };
  f.cos_coeffs = harmonics("cos");
  f.sin_coeffs = harmonics("sin");
}

void parse_solver(const json& j, RunConfig& cfg) {
  const std::string path = "solver";
  check_keys(j, path,
             {"degree", "budget", "perturbations", "perturbation_scale", "rho", "tol_newton", "tol_res", "max_iter",
              "max_halvings", "cond_limit", "analytic_jacobian", "probe_forcing"});
  MultiStartOptions& s = cfg.solver;
  if (j.contains("degree") && !j.at("degree").is_null()) s.degree = int_or(j, path, "degree", 8, 0, 512);
  s.budget = int_or(j, path, "budget", s.budget, 1, 1 << 20);
  s.perturbations = int_or(j, path, "perturbations", s.perturbations, 0, 1000);
  s.perturbation_scale = number_or(j, path, "perturbation_scale", s.perturbation_scale);
  s.rho = optional_number(j, path, "rho");
  s.solver.tol_newton = number_or(j, path, "tol_newton", s.solver.tol_newton);
  s.solver.tol_res = optional_number(j, path, "tol_res");
  s.solver.max_iter = int_or(j, path, "max_iter", s.solver.max_iter, 1, 10000);
  s.solver.max_halvings = int_or(j, path, "max_halvings", s.solver.max_halvings, 0, 60);
  s.solver.cond_limit = number_or(j, path, "cond_limit", s.solver.cond_limit);
  s.solver.use_analytic_jacobian = bool_or(j, path, "analytic_jacobian", s.solver.use_analytic_jacobian);
  cfg.probe_forcing = bool_or(j, path, "probe_forcing", cfg.probe_forcing);
  if (!(s.solver.tol_newton > 0.0)) invalid("solver.tol_newton", "must be positive");
  if (s.rho && !(*s.rho > 0.0)) invalid("solver.rho", "must be positive");
}

void parse_integrator(const json& j, RunConfig& cfg) {
  const std::string path = "integrator";
  check_keys(j, path, {"m", "ode_steps", "blowup_bound", "poincare_nodes"});
  IntegratorSpec& s = cfg.integrator;
  s.m = int_or(j, path, "m", s.m, 1, 1 << 14);
  s.ode_steps = int_or(j, path, "ode_steps", s.ode_steps, 1, 1 << 24);
  s.blowup_bound = number_or(j, path, "blowup_bound", s.blowup_bound);
  s.poincare_nodes = int_or(j, path, "poincare_nodes", s.poincare_nodes, 1, 1 << 14);
  if (!(s.blowup_bound > 0.0)) invalid("integrator.blowup_bound", "must be positive");
}

void parse_sampling(const json& j, RunConfig& cfg) {
  const std::string path = "sampling";
  check_keys(j, path, {"boundary", "pairs", "sup", "epsilon_probe"});
  SamplingSpec& s = cfg.sampling;
  s.boundary = int_or(j, path, "boundary", s.boundary, 1, 1 << 22);
  s.pairs = int_or(j, path, "pairs", s.pairs, 0, 1 << 16);
  s.sup = int_or(j, path, "sup", s.sup, 1, 1 << 24);
  s.epsilon_probe = number_or(j, path, "epsilon_probe", s.epsilon_probe);
  if (!(s.epsilon_probe > 0.0 && s.epsilon_probe < 1.0)) invalid("sampling.epsilon_probe", "must lie in (0, 1)");
}

}  // namespace

int RunConfig::dim() const { return kind == SystemKind::Linear ? static_cast<int>(A.rows()) : example.N; }

RunConfig parse_config(const json& j) {
  check_keys(j, "", {"system", "domain", "tau", "period", "forcing", "solver", "integrator", "sampling", "seed", "threads"});
  RunConfig cfg;
  if (!j.contains("system")) invalid("system", "required");
  parse_system(j.at("system"), cfg);
  parse_domain(j.value("domain", json::object()), cfg);
  cfg.tau = number_or(j, "", "tau", 0.0);
  if (cfg.tau < 0.0) invalid("tau", "must be non-negative");
  if (!j.contains("period")) invalid("period", "required");
  cfg.period = number(j.at("period"), "period");
  if (!(cfg.period > 0.0)) invalid("period", "must be positive");
  if (cfg.tau > cfg.period) invalid("tau", "must not exceed the period");
  parse_forcing(j.value("forcing", json::object()), cfg);
  parse_solver(j.value("solver", json::object()), cfg);
  parse_integrator(j.value("integrator", json::object()), cfg);
  parse_sampling(j.value("sampling", json::object()), cfg);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) invalid("seed", "expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.threads = int_or(j, "", "threads", cfg.threads, 1, 1024);
  cfg.solver.seed = cfg.seed;
  cfg.solver.threads = cfg.threads;

  try {
    build_domain(cfg).validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    invalid("domain", e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, path + ": cannot open");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& cfg) {
  json j;
  if (cfg.kind == SystemKind::Linear) {
    j["system"] = {{"kind", "linear"}, {"A", to_json(cfg.A)}, {"B", to_json(cfg.B)}};
  } else {
    const ExampleParams& p = cfg.example;
    json v = json::array();
    for (const auto& c : p.v) v.push_back(to_json(c));
    j["system"] = {{"kind", "example"}, {"N", p.N}, {"J", p.J}, {"J0", p.J0}, {"d", p.d},
                   {"a", p.a},          {"alpha", p.alpha}, {"v", v}};
  }
  json dom = {{"R", cfg.domain.R}};
  if (cfg.domain.eta) dom["eta"] = *cfg.domain.eta;
  if (cfg.domain.chi) dom["chi"] = *cfg.domain.chi;
  if (!cfg.domain.holes.empty()) {
    json holes = json::array();
    for (const auto& h : cfg.domain.holes) holes.push_back({{"center", to_json(h.center)}, {"eta", h.eta}});
    dom["holes"] = holes;
  }
  j["domain"] = dom;
  j["tau"] = cfg.tau;
  j["period"] = cfg.period;
  json cosv = json::array(), sinv = json::array();
  for (const auto& c : cfg.forcing.cos_coeffs) cosv.push_back(to_json(c));
  for (const auto& s : cfg.forcing.sin_coeffs) sinv.push_back(to_json(s));
  j["forcing"] = {{"amplitude", cfg.forcing.amplitude}, {"a0", to_json(cfg.forcing.a0)}, {"cos", cosv}, {"sin", sinv}};
  const MultiStartOptions& s = cfg.solver;
  j["solver"] = {{"degree", s.degree ? json(*s.degree) : json(nullptr)},
                 {"budget", s.budget},
                 {"perturbations", s.perturbations},
                 {"perturbation_scale", s.perturbation_scale},
                 {"rho", s.rho ? json(*s.rho) : json(nullptr)},
                 {"tol_newton", s.solver.tol_newton},
                 {"tol_res", s.solver.tol_res ? json(*s.solver.tol_res) : json(nullptr)},
                 {"max_iter", s.solver.max_iter},
                 {"max_halvings", s.solver.max_halvings},
                 {"cond_limit", s.solver.cond_limit},
                 {"analytic_jacobian", s.solver.use_analytic_jacobian},
                 {"probe_forcing", cfg.probe_forcing}};
  j["integrator"] = {{"m", cfg.integrator.m},
                     {"ode_steps", cfg.integrator.ode_steps},
                     {"blowup_bound", cfg.integrator.blowup_bound},
                     {"poincare_nodes", cfg.integrator.poincare_nodes}};
  j["sampling"] = {{"boundary", cfg.sampling.boundary},
                   {"pairs", cfg.sampling.pairs},
                   {"sup", cfg.sampling.sup},
                   {"epsilon_probe", cfg.sampling.epsilon_probe}};
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  return j;
}

TrigPoly build_forcing(const RunConfig& cfg) {
  const int n = cfg.dim();
  const ForcingSpec& f = cfg.forcing;
  const int K = static_cast<int>(std::max(f.cos_coeffs.size(), f.sin_coeffs.size()));
  TrigPoly p(n, cfg.period, K);
  p.a0() = f.a0;
  for (std::size_t k = 0; k < f.cos_coeffs.size(); ++k) p.a(static_cast<int>(k) + 1) = f.cos_coeffs[k];
  for (std::size_t k = 0; k < f.sin_coeffs.size(); ++k) p.b(static_cast<int>(k) + 1) = f.sin_coeffs[k];
  return f.amplitude * p;
}

PuncturedBall build_domain(const RunConfig& cfg) {
  PuncturedBall dom;
  dom.dim = cfg.dim();
  dom.R = cfg.domain.R;
  if (!cfg.domain.holes.empty()) {
    dom.holes = cfg.domain.holes;
  } else if (cfg.kind == SystemKind::Example) {
    if (!cfg.domain.eta) invalid("domain.eta", "required for the example system unless holes are listed");
    dom = PuncturedBall::with_common_radius(dom.dim, dom.R, cfg.example.v, *cfg.domain.eta);
  }
  return dom;
}

int domain_chi(const RunConfig& cfg, const PuncturedBall& dom) {
  return cfg.domain.chi.value_or(euler_characteristic(dom));
}

DelaySystem build_system(const RunConfig& cfg) {
  const TrigPoly p = build_forcing(cfg);
  if (cfg.kind == SystemKind::Linear) return linear_system(cfg.A, cfg.B, cfg.tau, cfg.period, p);
  try {
    return example_system(cfg.example, build_domain(cfg), cfg.tau, cfg.period, p);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParameterViolation) invalid("system", e.what());
    throw;
  }
}

}  // namespace perdde
