// Acceptance harness: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perdde/domain.hpp"
#include "perdde/error.hpp"
#include "perdde/linear_analysis.hpp"
#include "perdde/spectral_solver.hpp"
#include "perdde/time_domain.hpp"

using namespace perdde;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Pinned tolerances.
constexpr double kLinearCoeffTol = 1e-10;
constexpr double kLinearDefectTol = 1e-10;
constexpr double kLinearSeconds = 1.0;
constexpr double kResonantH1 = 1e-12;
constexpr double kResonantEig = 1e-4;
constexpr int kResonantNodes = 128;
constexpr int kPropertyDraws = 1000;
constexpr double kNormalizedHFloor = -1e-9;
constexpr double kPropertySeconds = 10.0;
constexpr int kOdeDegreeDraws = 100;
constexpr double kExampleDefect = 1e-6;
constexpr double kExamplePoincare = 1e-4;
constexpr double kExampleSeconds = 300.0;
constexpr int kExampleRetries = 5;
constexpr double kOrderRatio = 16.0;
constexpr double kOrderSlack = 0.2;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::printf("criterion %d [%s] %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome linear_oracle() {
  const auto start = Clock::now();
  TrigPoly p(1, 2 * kPi, 1);
  p.a(1)[0] = 1.0;
  const DelaySystem sys = linear_system(Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1), 0.0, 2 * kPi, p);
  PuncturedBall dom;
  dom.dim = 1;
  dom.R = 2.0;
  const SolutionSet set = multi_start_solve(sys, dom);
  const double elapsed = seconds_since(start);
  if (set.records.size() != 1) return {false, "found " + std::to_string(set.records.size()) + " solutions"};

  const TrigPoly& u = set.records[0].u;
  TrigPoly exact(1, 2 * kPi, u.degree());
  exact.a(1)[0] = 0.5;
  exact.b(1)[0] = 0.5;
  const double coeff_err = (u.coeffs() - exact.coeffs()).lpNorm<Eigen::Infinity>();
  const double defect = set.records[0].residual_inf;
  Outcome o;
  o.pass = coeff_err < kLinearCoeffTol && defect < kLinearDefectTol && elapsed < kLinearSeconds;
  o.detail = "1 solution, coeff error " + fmt("%.2e", coeff_err) + ", defect " + fmt("%.2e", defect) + ", " +
             fmt("%.3f", elapsed) + " s";
  return o;
}

Outcome resonance_detection() {
  const LinearPair lp{Mat::Zero(1, 1), Mat::Constant(1, 1, -1.0), kPi / 2, 2 * kPi};
  const Certificate cert = nonresonance_test(lp, 1);
  const double h1 = block_pair(lp, 1).h;
  const Mat M = monodromy(lp, kResonantNodes);
  const auto mult = floquet_multipliers(M);
  int near_one = 0;
  for (const auto& s : mult) near_one += std::abs(s - 1.0) < kResonantEig ? 1 : 0;
  const Eigen::JacobiSVD<Mat> svd(M - Mat::Identity(M.rows(), M.cols()));
  const auto sv = svd.singularValues();
  int kernel = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) kernel += sv[i] < kResonantEig ? 1 : 0;

  Outcome o;
  o.pass = !cert.nonresonant && cert.failing_k == 1 && std::abs(h1) < kResonantH1 && near_one >= 1 && kernel == 2;
  o.detail = std::string(cert.nonresonant ? "nonresonant" : "resonant") +
             ", failing_k " + (cert.failing_k ? std::to_string(*cert.failing_k) : "none") + ", |h_1| " +
             fmt("%.2e", std::abs(h1)) + ", multipliers near 1: " + std::to_string(near_one) +
             ", kernel dim of M - I: " + std::to_string(kernel);
  return o;
}

struct Draw {
  LinearPair lp;
  int k;
};

std::vector<Draw> property_draws(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> harmonic(0, 12);
  std::uniform_real_distribution<double> tau(0.0, 3.0);
  std::uniform_real_distribution<double> period(0.5, 10.0);
  std::vector<Draw> draws;
  for (int i = 0; i < kPropertyDraws; ++i) {
    const int n = dim(rng);
    Mat A(n, n), B(n, n);
    for (Eigen::Index c = 0; c < A.size(); ++c) A.data()[c] = entry(rng);
    for (Eigen::Index c = 0; c < B.size(); ++c) B.data()[c] = entry(rng);
    const double t = tau(rng);
    const double T = period(rng);
    draws.push_back({{A, B, t, T}, harmonic(rng)});
  }
  return draws;
}

Outcome h_nonnegative(const std::vector<Draw>& draws) {
  const auto start = Clock::now();
  double worst = INFINITY;
  int violations = 0;
  for (const auto& d : draws) {
    const BlockPair bp = block_pair(d.lp, d.k);
    const double scale = std::pow(bp.scale, 2.0 * d.lp.dim());
    const double nh = bp.h / scale;
    worst = std::min(worst, nh);
    if (nh < kNormalizedHFloor) ++violations;
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = violations == 0 && elapsed < kPropertySeconds;
  o.detail = std::to_string(draws.size()) + " draws, min normalized h_k " + fmt("%.3e", worst) + ", violations " +
             std::to_string(violations) + ", " + fmt("%.3f", elapsed) + " s";
  return o;
}

Outcome mk_positive(const std::vector<Draw>& draws) {
  int checked = 0;
  int violations = 0;
  for (const auto& d : draws) {
    if (d.k == 0) continue;
    const BlockPair bp = block_pair(d.lp, d.k);
    if (!(bp.h > bp.tolerance)) continue;
    ++checked;
    if (bp.Mk.partialPivLu().determinant() <= 0.0) ++violations;
  }
  Outcome o;
  o.pass = violations == 0 && checked > 0;
  o.detail = std::to_string(checked) + " draws with h_k > tol, det(M_k) <= 0 in " + std::to_string(violations);
  return o;
}

Outcome ode_degree_identity(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> period(0.5, 8.0);
  int accepted = 0;
  int rejected = 0;
  int mismatches = 0;
  while (accepted < kOdeDegreeDraws) {
    const int n = dim(rng);
    Mat M(n, n);
    for (Eigen::Index c = 0; c < M.size(); ++c) M.data()[c] = entry(rng);
    const double T = period(rng);
    if (!small_delay_eigentest(M, T).pass) {
      ++rejected;
      continue;
    }
    try {
      const OdeDegree deg = ode_poincare_degree(M, T);
      ++accepted;
      if (!deg.consistent) ++mismatches;
    } catch (const Error&) {
      ++rejected;
    }
  }
  Outcome o;
  o.pass = mismatches == 0;
  o.detail = std::to_string(accepted) + " draws, mismatches " + std::to_string(mismatches) + ", rejected by precondition " +
             std::to_string(rejected);
  return o;
}

struct ExampleRun {
  SolutionSet set;
  DelaySystem sys;
  PuncturedBall dom;
  Certificate cert;
  InwardReport inward;
  std::vector<double> poincare;
  int attempts = 0;
  double seconds = 0.0;
  int valid = 0;
};

TrigPoly small_random_forcing(std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrigPoly q(2, 2 * kPi, 2);
  for (Eigen::Index i = 0; i < q.size(); ++i) q.coeffs()[i] = u(rng);
  const double s = sup_norm(q, 64);
  return (amplitude / s) * q;
}

ExampleRun example_run() {
  const auto start = Clock::now();
  ExampleParams params;
  params.N = 2;
  params.J = 2;
  params.J0 = 2;
  params.d = 1.0;
  params.a = {1.0, 1.0};
  params.alpha = {3.0, 3.0};
  Vec v1(2), v2(2);
  v1 << 0.5, 0.0;
  v2 << -0.5, 0.0;
  params.v = {v1, v2};

  ExampleRun run;
  run.dom = PuncturedBall::with_common_radius(2, 4.0, params.v, 0.15);
  const double tau = 1e-4;
  const double T = 2 * kPi;
  const double eps = 1e-3;
  TrigPoly p(2, T, 1);
  p.a(1)[0] = eps;
  p.b(1)[1] = eps;

  run.sys = example_system(params, run.dom, tau, T, p);
  run.inward = verify_inward(run.sys, run.dom);
  run.cert = nonresonance_test(run.sys.linearisation(), euler_characteristic(run.dom));

  std::mt19937_64 rng(20240917);
  MultiStartOptions opts;
  opts.seed = 7;
  const int gamma = run.cert.gamma.value_or(0);
  for (int attempt = 0; attempt <= kExampleRetries; ++attempt) {
    run.attempts = attempt + 1;
    run.set = multi_start_solve(run.sys, run.dom, opts);
    if (static_cast<int>(run.set.records.size()) >= gamma) break;
    if (attempt < kExampleRetries) run.sys = run.sys.with_forcing(p + small_random_forcing(rng, 0.5 * eps));
  }

  PoincareOptions popts;
  for (const auto& r : run.set.records) {
    const HistorySegment phi = HistorySegment::from_trig(r.u, T, tau, 8);
    double gap = INFINITY;
    try {
      gap = history_distance(poincare_map(run.sys, phi, popts), phi);
    } catch (const Error&) {
    }
    run.poincare.push_back(gap);
    if (r.residual_inf < kExampleDefect && gap < kExamplePoincare) ++run.valid;
  }
  run.seconds = seconds_since(start);
  return run;
}

Outcome example_headline(const ExampleRun& run) {
  const int gamma = run.cert.gamma.value_or(0);
  std::optional<int> near_sign;
  double worst_defect = 0.0;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < run.set.records.size(); ++i) {
    const auto& r = run.set.records[i];
    if (r.near_equilibrium) near_sign = r.local_sign;
    worst_defect = std::max(worst_defect, r.residual_inf);
    worst_gap = std::max(worst_gap, run.poincare[i]);
  }
  Outcome o;
  o.pass = run.inward.pass && gamma == 3 && run.valid >= gamma && near_sign == 1 && run.seconds < kExampleSeconds;
  o.detail = "inward " + std::string(run.inward.pass ? "pass" : "fail") + ", Gamma " + std::to_string(gamma) +
             ", found " + std::to_string(run.set.records.size()) + " (" + std::to_string(run.valid) +
             " valid), worst defect " + fmt("%.2e", worst_defect) + ", worst |P phi - phi| " +
             fmt("%.2e", worst_gap) + ", near-equilibrium sign " +
             (near_sign ? std::to_string(*near_sign) : "none") + ", attempts " + std::to_string(run.attempts) +
             ", " + fmt("%.1f", run.seconds) + " s";
  return o;
}

Outcome example_audit(const ExampleRun& run) {
  const int gamma = run.cert.gamma.value_or(0);
  const DegreeAudit audit =
      degree_audit(run.set, run.sys.dim, euler_characteristic(run.dom), run.cert.sign_s.value_or(0));
  const int found = static_cast<int>(run.set.records.size());
  Outcome o;
  o.pass = (audit.total_matches && audit.index_sum == -1) || (audit.missed_solutions && found < gamma);
  o.detail = "index sum " + std::to_string(audit.index_sum) + ", expected " + std::to_string(audit.expected_total) +
             (audit.missed_solutions ? ", missed-solutions flagged" : "");
  return o;
}

Outcome integrator_order() {
  const double tau = 4.0;
  const DelayRhs rhs = [](double, const Vec& x, const Vec&) -> Vec { return -x; };
  const HistorySegment phi = HistorySegment::from_function(
      [](double s) { return Vec::Constant(1, std::exp(-s)); }, tau, 8,
      [](double s) { return Vec::Constant(1, -std::exp(-s)); });
  std::vector<double> errors;
  for (int m : {32, 64, 128, 256, 512}) {
    const double dt = tau / m;
    const DenseTrajectory traj = integrate(rhs, phi, tau, dt);
    double err = 0.0;
    for (std::size_t i = 0; i < traj.values().size(); ++i) {
      err = std::max(err, std::abs(traj.values()[i][0] - std::exp(-traj.knot(i))));
    }
    errors.push_back(err);
  }
  Outcome o;
  o.pass = true;
  o.detail = "ratios";
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i - 1] / errors[i];
    o.detail += " " + fmt("%.2f", ratio);
    if (std::abs(ratio - kOrderRatio) > kOrderSlack * kOrderRatio) o.pass = false;
  }
  o.detail += ", finest error " + fmt("%.2e", errors.back());
  return o;
}

Outcome stability_index(const ExampleRun& run) {
  const double T = 2 * kPi;
  const FloquetReport stable = floquet_report({-Mat::Identity(2, 2), Mat::Zero(2, 2), 0.01, T}, 16);
  const FloquetReport unstable = floquet_report({Mat::Identity(1, 1), Mat::Zero(1, 1), 0.01, T}, 16);

  // Append a repelling direction w' = w to the example: det(A + B) changes sign.
  const DelaySystem& base = run.sys;
  SystemSpec spec;
  spec.dim = 3;
  spec.tau = base.tau;
  spec.period = base.period;
  spec.equilibrium = Vec::Zero(3);
  spec.g = [g = base.g](const Vec& x, const Vec& y) {
    Vec out(3);
    out.head(2) = g(x.head(2), y.head(2));
    out[2] = x[2];
    return out;
  };
  const DelaySystem flipped = make_delay_system(spec);
  const CharacteristicRoot original = positive_characteristic_root(base.linearisation());
  const CharacteristicRoot root = positive_characteristic_root(flipped.linearisation());

  Outcome o;
  o.pass = stable.index == 1 && stable.stable_hint && unstable.index == -1 && !unstable.stable_hint &&
           original.h0 > 0.0 && !original.root && root.h0 < 0.0 && root.root.has_value() &&
           std::abs(*root.root - 1.0) < 1e-6;
  o.detail = "A=-I: index " + std::to_string(stable.index) + (stable.stable_hint ? " stable" : " not stable") +
             "; A=+1: index " + std::to_string(unstable.index) +
             (unstable.stable_hint ? " stable" : " unstable") + "; flipped example h(0) " + fmt("%.3f", root.h0) +
             ", root " + (root.root ? fmt("%.9f", *root.root) : std::string("none"));
  return o;
}

}  // namespace

int main() {
  const auto guard = [](int id, const char* name, const std::function<Outcome()>& f) {
    try {
      report(id, name, f());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("exception: ") + e.what()});
    }
  };

  guard(1, "linear oracle", linear_oracle);
  guard(2, "resonance detection", resonance_detection);
  const auto draws = property_draws(12345);
  guard(3, "h_k nonnegative", [&] { return h_nonnegative(draws); });
  guard(4, "det(M_k) positive", [&] { return mk_positive(draws); });
  guard(5, "ODE degree identity", [] { return ode_degree_identity(777); });

  ExampleRun run;
  bool have_run = false;
  guard(6, "punctured-plane example", [&] {
    run = example_run();
    have_run = true;
    return example_headline(run);
  });
  guard(7, "degree audit", [&] {
    if (!have_run) return Outcome{false, "example run unavailable"};
    return example_audit(run);
  });
  guard(8, "integrator order", integrator_order);
  guard(9, "stability index", [&] {
    if (!have_run) return Outcome{false, "example run unavailable"};
    return stability_index(run);
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
