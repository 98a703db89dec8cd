#include "perdde/commands.hpp"

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "perdde/error.hpp"

namespace perdde {

using nlohmann::json;

namespace {

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json complex_list(const std::vector<std::complex<double>>& values) {
  json out = json::array();
  for (const auto& z : values) out.push_back({z.real(), z.imag()});
  return out;
}

int parity_sign(int dim) { return dim % 2 == 0 ? 1 : -1; }

// Errors that report a failed check rather than a failed run.
bool is_certificate_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::ResonantLinearisation:
    case ErrorCode::FloquetOne:
    case ErrorCode::WeakConditionFails:
    case ErrorCode::DegenerateCertificate:
      return true;
    default:
      return false;
  }
}

struct Context {
  RunConfig cfg;
  CommandOptions opts;
  CommandResult result;
  json& report() { return result.report; }
};

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

json eigentest_json(const EigenTestResult& r) { return {{"pass", r.pass}, {"offending_k", optional_json(r.offending_k)}}; }

Certificate certify(Context& ctx, const DelaySystem& sys, const PuncturedBall& dom) {
  const Certificate cert = nonresonance_test(sys.linearisation(), domain_chi(ctx.cfg, dom));
  ctx.report()["certificate"] = certificate_json(cert);
  ctx.report()["eigen_test"] = eigentest_json(small_delay_eigentest(sys.A + sys.B, sys.period));
  return cert;
}

InwardOptions inward_options(const RunConfig& cfg) {
  InwardOptions o;
  o.boundary_samples = cfg.sampling.boundary;
  o.pair_samples = cfg.sampling.pairs;
  o.sup_samples = cfg.sampling.sup;
  return o;
}

PoincareOptions poincare_options(const RunConfig& cfg) {
  PoincareOptions o;
  o.ode_steps = cfg.integrator.ode_steps;
  o.integrate.blowup_bound = cfg.integrator.blowup_bound;
  return o;
}

InwardReport domain_check(Context& ctx, const DelaySystem& sys, const PuncturedBall& dom) {
  const InwardOptions io = inward_options(ctx.cfg);
  const InwardReport rep = verify_inward(sys, dom, io);
  json frag = inward_json(rep);
  frag["R"] = dom.R;
  frag["holes"] = dom.hole_count();
  frag["chi"] = domain_chi(ctx.cfg, dom);
  try {
    const TauStar ts = tau_star(sys, dom, ctx.cfg.sampling.epsilon_probe, io);
    frag["tau_star"] = {{"epsilon", ts.epsilon}, {"sup_norm", ts.sup_norm}, {"tau_star", finite_or_null(ts.tau_star)}};
  } catch (const Error& e) {
    frag["tau_star"] = {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
  }
  ctx.report()["domain"] = frag;
  return rep;
}

std::vector<double> csv_times(double period, int m) {
  std::vector<double> t;
  for (int j = 0; j <= m; ++j) t.push_back(period * j / m);
  return t;
}

std::string write_solution_csv(Context& ctx, const TrigPoly& u, std::size_t index, int m) {
  const std::string name = "solution_" + std::to_string(index) + ".csv";
  if (ctx.opts.out_dir.empty()) return name;
  const auto path = std::filesystem::path(ctx.opts.out_dir) / name;
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Precondition, "cannot write " + path.string());
  const std::vector<double> t = csv_times(u.period(), m);
  std::vector<Vec> values;
  for (double s : t) values.push_back(u(s));
  write_trajectory_csv(os, t, values);
  ctx.result.files.push_back(path.string());
  return name;
}

struct SolveOutcome {
  SolutionSet set;
  DegreeAudit audit;
  int valid = 0;
};

SolveOutcome solve_and_audit(Context& ctx, const DelaySystem& sys, const PuncturedBall& dom, const Certificate& cert) {
  SolveOutcome out;
  MultiStartOptions mo = ctx.cfg.solver;
  mo.chi = domain_chi(ctx.cfg, dom);
  out.set = multi_start_solve(sys, dom, mo);
  out.audit = degree_audit(out.set, sys.dim, mo.chi.value(), cert.sign_s.value_or(0));

  const int m_csv = fine_grid_size(out.set.degree);
  const PoincareOptions po = poincare_options(ctx.cfg);
  json records = json::array();
  for (std::size_t i = 0; i < out.set.records.size(); ++i) {
    const SolutionRecord& r = out.set.records[i];
    json gap = nullptr;
    try {
      const HistorySegment phi = HistorySegment::from_trig(r.u, sys.period, sys.tau, ctx.cfg.integrator.poincare_nodes);
      gap = history_distance(poincare_map(sys, phi, po), phi);
    } catch (const Error& e) {
      gap = nullptr;
    }
    if (r.residual_inf <= r.tol_res) ++out.valid;
    records.push_back({{"index", i},
                       {"csv", write_solution_csv(ctx, r.u, i, m_csv)},
                       {"mean", vec_json(Vec(r.u.a0()))},
                       {"sup_norm", sup_norm(r.u, m_csv)},
                       {"residual_inf", r.residual_inf},
                       {"coeff_residual", r.coeff_residual},
                       {"tol_res", r.tol_res},
                       {"local_sign", r.local_sign},
                       {"near_equilibrium", r.near_equilibrium},
                       {"distance_to_equilibrium", r.distance_to_equilibrium},
                       {"iterations", r.iterations},
                       {"poincare_gap", gap}});
  }
  const SolutionSet& s = out.set;
  ctx.report()["solutions"] = {{"count", s.records.size()},
                               {"gamma_expected", optional_json(s.gamma_expected)},
                               {"degree", s.degree},
                               {"rho", s.rho},
                               {"delta_dup", s.delta_dup},
                               {"starts", s.starts},
                               {"converged", s.converged},
                               {"index_sum", s.index_sum},
                               {"chi_target", s.chi_target},
                               {"empty", s.records.empty()},
                               {"records", records}};
  const DegreeAudit& a = out.audit;
  ctx.report()["degree_audit"] = {{"index_sum", a.index_sum},
                                  {"expected_total", a.expected_total},
                                  {"total_matches", a.total_matches},
                                  {"near_equilibrium_sign", optional_json(a.near_equilibrium_sign)},
                                  {"expected_local", a.expected_local},
                                  {"local_matches", a.local_matches},
                                  {"missed_solutions", a.missed_solutions},
                                  {"passed", a.passed},
                                  {"message", a.message}};
  return out;
}

json probe_json(const ForcingProbe& p, double forcing_sup) {
  const bool outside = forcing_sup > 0.0 && (p.last_success == 0.0 || forcing_sup > p.last_success);
  return {{"forcing_sup", forcing_sup},
          {"last_success", p.last_success},
          {"first_failure", p.first_failure > 0.0 ? json(p.first_failure) : json(nullptr)},
          {"evaluations", p.evaluations},
          {"outside_small_forcing", outside}};
}

double forcing_sup(const DelaySystem& sys, const MultiStartOptions& mo) {
  return sup_norm(sys.forcing, fine_grid_size(choose_degree(sys, mo.degree)));
}

int cmd_analyze(Context& ctx) {
  const DelaySystem sys = build_system(ctx.cfg);
  const PuncturedBall dom = build_domain(ctx.cfg);
  const Certificate cert = certify(ctx, sys, dom);
  if (!cert.nonresonant) {
    ctx.result.headline = "resonant at k = " + std::to_string(cert.failing_k.value_or(-1)) + ", no Gamma claimed";
    return 2;
  }
  ctx.result.headline = "nonresonant, Gamma = " + std::to_string(cert.gamma.value_or(0));
  return 0;
}

int cmd_verify_domain(Context& ctx) {
  const DelaySystem sys = build_system(ctx.cfg);
  const PuncturedBall dom = build_domain(ctx.cfg);
  const InwardReport rep = domain_check(ctx, sys, dom);
  ctx.result.headline = std::string("inward conditions ") + (rep.pass ? "hold" : "fail") +
                        " on the sampled boundary (evidence, not proof)";
  return rep.pass ? 0 : 2;
}

int cmd_solve(Context& ctx) {
  const DelaySystem sys = build_system(ctx.cfg);
  const PuncturedBall dom = build_domain(ctx.cfg);
  const Certificate cert = certify(ctx, sys, dom);
  if (!cert.nonresonant && !ctx.opts.force) {
    ctx.report()["error"] = {{"code", "resonant-refusal"},
                             {"message", "linearisation is resonant; rerun with --force to solve anyway"}};
    ctx.result.headline = "refused: resonant linearisation";
    return 2;
  }
  const SolveOutcome out = solve_and_audit(ctx, sys, dom, cert);
  if (ctx.cfg.probe_forcing) {
    ctx.report()["forcing_probe"] =
        probe_json(probe_forcing_threshold(sys, dom, ctx.cfg.solver), forcing_sup(sys, ctx.cfg.solver));
  }
  const int gamma = cert.gamma.value_or(1);
  const int found = static_cast<int>(out.set.records.size());
  ctx.result.headline = "found " + std::to_string(found) + " of expected Gamma = " + std::to_string(gamma);
  return cert.nonresonant && found >= gamma && out.audit.passed ? 0 : 2;
}

int cmd_floquet(Context& ctx) {
  const DelaySystem sys = build_system(ctx.cfg);
  const LinearPair lp = sys.linearisation();
  json frag;
  const FloquetReport rep = floquet_report(lp, ctx.cfg.integrator.m, poincare_options(ctx.cfg));
  frag = floquet_json(rep);
  frag["m"] = sys.tau > 0.0 ? ctx.cfg.integrator.m : 0;
  if (sys.tau == 0.0) {
    const OdeDegree d = ode_poincare_degree(lp.A + lp.B, lp.period);
    frag["ode_degree"] = {{"sign", d.sign}, {"expected", d.expected}, {"consistent", d.consistent},
                          {"determinant", d.determinant}};
  } else {
    frag["ode_degree"] = nullptr;
  }
  std::optional<int> index_k;
  try {
    index_k = sign_of_det(lp.A + lp.B);
  } catch (const Error&) {
  }
  frag["index_comparison"] = {
      {"index_P", rep.index},
      {"index_K", optional_json(index_k)},
      {"expected_index_P", index_k ? json(parity_sign(lp.dim()) * *index_k) : json(nullptr)},
      {"agree", index_k ? json(parity_sign(lp.dim()) * *index_k == rep.index) : json(nullptr)}};
  const CharacteristicRoot root = positive_characteristic_root(lp);
  frag["characteristic"] = {{"h0", root.h0}, {"positive_root", optional_json(root.root)}, {"bracket", root.upper}};
  ctx.report()["floquet"] = frag;
  const bool consistent = sys.tau > 0.0 || frag["ode_degree"]["consistent"].get<bool>();
  ctx.result.headline = "index " + std::to_string(rep.index) + (rep.stable_hint ? ", stable" : ", not stable");
  return consistent ? 0 : 2;
}

int cmd_example(Context& ctx) {
  if (ctx.cfg.kind != SystemKind::Example) {
    throw Error(ErrorCode::ConfigInvalid, "system.kind: the example command needs the example system");
  }
  const DelaySystem sys = build_system(ctx.cfg);
  const PuncturedBall dom = build_domain(ctx.cfg);
  const InwardReport inward = domain_check(ctx, sys, dom);
  const Certificate cert = certify(ctx, sys, dom);
  if (!cert.nonresonant && !ctx.opts.force) {
    ctx.report()["error"] = {{"code", "resonant-refusal"},
                             {"message", "linearisation is resonant; rerun with --force to solve anyway"}};
    ctx.result.headline = "refused: resonant linearisation";
    return 2;
  }
  const SolveOutcome out = solve_and_audit(ctx, sys, dom, cert);
  const json probe = probe_json(probe_forcing_threshold(sys, dom, ctx.cfg.solver), forcing_sup(sys, ctx.cfg.solver));
  ctx.report()["forcing_probe"] = probe;

  const int gamma = cert.gamma.value_or(0);
  const int found = static_cast<int>(out.set.records.size());
  ctx.result.headline = "found " + std::to_string(found) + " of expected Gamma = " + std::to_string(gamma);
  if (probe["outside_small_forcing"].get<bool>()) ctx.result.headline += " (outside small-forcing regime)";
  ctx.report()["example"] = {{"J", ctx.cfg.example.J},
                             {"expected", gamma},
                             {"found", found},
                             {"inward_pass", inward.pass},
                             {"outside_small_forcing", probe["outside_small_forcing"]}};
  return inward.pass && cert.nonresonant && found >= gamma && out.audit.passed ? 0 : 2;
}

const std::map<std::string, std::function<int(Context&)>>& registry() {
  static const std::map<std::string, std::function<int(Context&)>> r{
      {"analyze", cmd_analyze},
      {"verify-domain", cmd_verify_domain},
      {"solve", cmd_solve},
      {"floquet", cmd_floquet},
      {"example", cmd_example},
  };
  return r;
}

json base_report(const std::string& command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}};
}

void finish(CommandResult& result, const std::string& out_dir) {
  result.report["exit_code"] = result.exit_code;
  result.report["status"] = result.exit_code == 0 ? "pass" : result.exit_code == 2 ? "certificate-failed" : "error";
  result.report["headline"] = result.headline;
  if (out_dir.empty()) return;
  const auto path = std::filesystem::path(out_dir) / "report.json";
  std::ofstream os(path);
  if (!os) return;
  os << result.report.dump(2) << '\n';
  result.files.insert(result.files.begin(), path.string());
}

CommandResult error_result(const std::string& command, const std::string& code, const std::string& message,
                           int exit_code) {
  CommandResult r;
  r.report = base_report(command);
  r.report["error"] = {{"code", code}, {"message", message}};
  r.exit_code = exit_code;
  r.headline = message;
  return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"analyze", "verify-domain", "solve", "floquet", "example"};
  return names;
}

json certificate_json(const Certificate& c) {
  return {{"dim", c.dim},
          {"nonresonant", c.nonresonant},
          {"degenerate", c.degenerate},
          {"failing_k", optional_json(c.failing_k)},
          {"k0", c.k0},
          {"h_values", c.h_values},
          {"normalized_h", c.normalized_h},
          {"sign_s", optional_json(c.sign_s)},
          {"gamma", optional_json(c.gamma)},
          {"chi", c.chi},
          {"margin", c.margin}};
}

json inward_json(const InwardReport& r) {
  auto point = [](const Vec& v) { return v.size() ? vec_json(v) : json(nullptr); };
  return {{"evidence_not_proof", true},
          {"sup_norm", r.sup_norm},
          {"pair_radius", r.pair_radius},
          {"tol_margin", r.tol_margin},
          {"weak_margin", r.weak_margin},
          {"strong_margin", r.strong_margin},
          {"component_margins", r.component_margins},
          {"weak_worst_x", point(r.weak_worst_x)},
          {"strong_worst_x", point(r.strong_worst_x)},
          {"strong_worst_y", point(r.strong_worst_y)},
          {"weak_pass", r.weak_pass},
          {"strong_pass", r.strong_pass},
          {"pass", r.pass},
          {"boundary_points", r.boundary_points},
          {"pairs_checked", r.pairs_checked}};
}

json floquet_json(const FloquetReport& r) {
  return {{"multipliers", complex_list(r.multipliers)},
          {"alpha", r.alpha},
          {"index", r.index},
          {"stable_hint", r.stable_hint}};
}

CommandResult run_command(const std::string& command, RunConfig cfg, const CommandOptions& opts) {
  const auto it = registry().find(command);
  if (it == registry().end()) {
    CommandResult r = error_result(command, "config-invalid", "unknown command \"" + command + "\"", 1);
    finish(r, "");
    return r;
  }
  if (opts.seed) cfg.seed = cfg.solver.seed = *opts.seed;
  if (opts.threads) cfg.threads = cfg.solver.threads = *opts.threads;

  Context ctx{std::move(cfg), opts, {}};
  ctx.result.report = base_report(command);
  ctx.report()["provenance"] = {{"config", to_json(ctx.cfg)},
                                {"seed", ctx.cfg.seed},
                                {"threads", ctx.cfg.threads},
                                {"force", opts.force},
                                {"version", kVersion},
                                {"eigen", eigen_version()}};
  if (!opts.out_dir.empty()) std::filesystem::create_directories(opts.out_dir);
  try {
    ctx.result.exit_code = it->second(ctx);
  } catch (const Error& e) {
    ctx.report()["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    ctx.result.headline = e.what();
    ctx.result.exit_code = is_certificate_failure(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    ctx.report()["error"] = {{"code", "internal"}, {"message", e.what()}};
    ctx.result.headline = e.what();
    ctx.result.exit_code = 1;
  }
  finish(ctx.result, opts.out_dir);
  return ctx.result;
}

CommandResult run_command(const std::string& command, const json& config, const CommandOptions& opts) {
  RunConfig cfg;
  try {
    cfg = parse_config(config);
  } catch (const Error& e) {
    CommandResult r = error_result(command, std::string(to_string(e.code())), e.what(), 1);
    if (!opts.out_dir.empty()) std::filesystem::create_directories(opts.out_dir);
    finish(r, opts.out_dir);
    return r;
  }
  return run_command(command, std::move(cfg), opts);
}

}  // namespace perdde
