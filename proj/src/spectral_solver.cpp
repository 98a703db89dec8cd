#include "perdde/spectral_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "perdde/error.hpp"
#include "perdde/sampling.hpp"

namespace perdde {

namespace {

void require_compatible(const DelaySystem& sys, const TrigPoly& u) {
  if (u.dim() != sys.dim || u.period() != sys.period) {
    throw Error(ErrorCode::Precondition, "trig polynomial does not match the system dimension and period");
  }
}

struct DefectInfo {
  double defect = 0.0;
  double field_sup = 0.0;
};

DefectInfo defect_info(const DelaySystem& sys, const TrigPoly& u, int m) {
  const Mat U = sample(u, m);
  const Mat Ut = sample(delay_shift(u, sys.tau), m);
  const Mat dU = sample(derivative(u), m);
  const Mat P = sample(sys.forcing, m);
  DefectInfo out;
  for (int j = 0; j < m; ++j) {
    const Vec x = U.col(j);
    const Vec y = Ut.col(j);
    if (!sys.admits(x, y)) {
      throw Error(ErrorCode::DomainEscape, "g is not defined along u at t = " + std::to_string(sys.period * j / m));
    }
    const Vec gx = sys.g(x, y);
    out.field_sup = std::max(out.field_sup, gx.lpNorm<Eigen::Infinity>());
    out.defect = std::max(out.defect, (dU.col(j) - gx - P.col(j)).lpNorm<Eigen::Infinity>());
  }
  return out;
}

// Sign of det from an LU factorisation, immune to over/underflow of the product.
int lu_det_sign(const Eigen::PartialPivLU<Mat>& lu) {
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] < 0.0) sign = -sign;
    if (diag[i] == 0.0) return 0;
  }
  return sign;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

bool inside_closure(const PuncturedBall& dom, const TrigPoly& u, int m) {
  const Mat U = sample(u, m);
  for (int j = 0; j < m; ++j) {
    if (!contains(dom, U.col(j)).in_closure()) return false;
  }
  return true;
}

template <class Task>
void parallel_for(int count, int threads, Task&& task) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

int choose_degree(const DelaySystem& sys, std::optional<int> override_degree) {
  const int k0 = truncation_k0(sys.linearisation());
  return std::max({k0 + 4, 8, override_degree.value_or(0)});
}

TrigPoly nemitskii(const DelaySystem& sys, const TrigPoly& u, int degree) {
  require_compatible(sys, u);
  const int m = collocation_size(degree);
  const Mat U = sample(u, m);
  const Mat Ut = sample(delay_shift(u, sys.tau), m);
  Mat G(sys.dim, m);
  for (int j = 0; j < m; ++j) {
    const Vec x = U.col(j);
    const Vec y = Ut.col(j);
    const double t = sys.period * j / m;
    if (!sys.admits(x, y)) {
      throw Error(ErrorCode::DomainEscape, "g is not defined at the state reached at t = " + std::to_string(t));
    }
    const Vec gx = sys.g(x, y);
    if (!gx.allFinite()) {
      throw Error(ErrorCode::DomainEscape, "g is not finite at the state reached at t = " + std::to_string(t));
    }
    G.col(j) = gx;
  }
  return project(G, sys.period, degree);
}

TrigPoly fixed_point_operator(const TrigPoly& u, const TrigPoly& Nu) {
  if (u.dim() != Nu.dim() || u.period() != Nu.period()) {
    throw Error(ErrorCode::Precondition, "u and N u differ in dimension or period");
  }
  auto [INu, Nu_mean] = antiderivative_and_mean(Nu);
  // -t mean(Nu) against the linear part of I N u.
  const Vec slope = INu.slope - Nu_mean;
  if (slope.lpNorm<Eigen::Infinity>() > 1e-10 * (1.0 + Nu_mean.lpNorm<Eigen::Infinity>())) {
    throw Error(ErrorCode::Precondition, "linear parts of the fixed-point operator failed to cancel");
  }
  TrigPoly Ku = INu.periodic.with_degree(std::max(u.degree(), Nu.degree()));
  Ku.a0() += u.a0() - INu.mean();
  return Ku;
}

TrigPoly apply_K(const DelaySystem& sys, const TrigPoly& u, int degree) {
  return fixed_point_operator(u.with_degree(degree), nemitskii(sys, u, degree));
}

TrigPoly p_hat(const DelaySystem& sys, int degree) {
  auto [Ip, p_mean] = antiderivative_and_mean(sys.forcing);
  const Vec mean_Ip = Ip.mean();
  TrigPoly out = Ip.periodic;  // slope of Ip equals p_mean and cancels against -t p_mean
  out.a0() -= mean_Ip;
  return out.with_degree(degree);
}

int fine_grid_size(int degree) { return 4 * collocation_size(degree); }

double time_domain_defect(const DelaySystem& sys, const TrigPoly& u, int m) {
  require_compatible(sys, u);
  return defect_info(sys, u, m).defect;
}

ResidualResult residual(const DelaySystem& sys, const TrigPoly& u) {
  require_compatible(sys, u);
  const int K = u.degree();
  ResidualResult out;
  out.F = u - apply_K(sys, u, K) - p_hat(sys, K);
  out.coeff_norm = out.F.coeffs().lpNorm<Eigen::Infinity>();
  out.defect = time_domain_defect(sys, u, fine_grid_size(K));
  return out;
}

Mat residual_jacobian(const DelaySystem& sys, const TrigPoly& u, const SolverOptions& opts) {
  require_compatible(sys, u);
  const int K = u.degree();
  const Eigen::Index n = u.size();
  Mat J(n, n);

  if (opts.use_analytic_jacobian && sys.has_analytic_jacobian()) {
    const int m = collocation_size(K);
    const Mat U = sample(u, m);
    const Mat Ut = sample(delay_shift(u, sys.tau), m);
    std::vector<Mat> dx(static_cast<std::size_t>(m));
    std::vector<Mat> dy(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      const Vec x = U.col(j);
      const Vec y = Ut.col(j);
      if (!sys.admits(x, y)) {
        throw Error(ErrorCode::DomainEscape, "Jacobian undefined at t = " + std::to_string(sys.period * j / m));
      }
      dx[static_cast<std::size_t>(j)] = sys.dx_g(x, y);
      dy[static_cast<std::size_t>(j)] = sys.dy_g(x, y);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      TrigPoly v(u.dim(), u.period(), K);
      v.coeffs()[i] = 1.0;
      const Mat V = sample(v, m);
      const Mat Vt = sample(delay_shift(v, sys.tau), m);
      Mat DN(u.dim(), m);
      for (int j = 0; j < m; ++j) {
        DN.col(j) = dx[static_cast<std::size_t>(j)] * V.col(j) + dy[static_cast<std::size_t>(j)] * Vt.col(j);
      }
      J.col(i) = (v - fixed_point_operator(v, project(DN, u.period(), K))).coeffs();
    }
    return J;
  }

  const TrigPoly phat = p_hat(sys, K);
  const Vec F0 = (u - apply_K(sys, u, K) - phat).coeffs();
  const double h = 1e-6 * (1.0 + u.coeffs().lpNorm<Eigen::Infinity>());
  for (Eigen::Index i = 0; i < n; ++i) {
    TrigPoly w = u;
    w.coeffs()[i] += h;
    J.col(i) = ((w - apply_K(sys, w, K) - phat).coeffs() - F0) / h;
  }
  return J;
}

SolutionRecord newton_solve(const DelaySystem& sys, const TrigPoly& start, int degree, const SolverOptions& opts) {
  require_compatible(sys, start);
  TrigPoly u = start.with_degree(degree);
  const TrigPoly phat = p_hat(sys, degree);
  auto F_of = [&](const TrigPoly& w) -> Vec { return (w - apply_K(sys, w, degree) - phat).coeffs(); };
  auto noise_floor = [&](const TrigPoly& w) {
    return 64.0 * std::numeric_limits<double>::epsilon() *
           (1.0 + w.coeffs().lpNorm<Eigen::Infinity>() + phat.coeffs().lpNorm<Eigen::Infinity>());
  };

  Vec F = F_of(u);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const Mat J = residual_jacobian(sys, u, opts);
    const Eigen::PartialPivLU<Mat> lu(J);
    const double rcond = lu.rcond();
    if (!(rcond * opts.cond_limit >= 1.0)) {
      throw Error(ErrorCode::SingularJacobian,
                  "Newton Jacobian condition estimate " + std::to_string(1.0 / rcond) + " exceeds the limit");
    }
    const Vec delta = -lu.solve(F);
    if (!delta.allFinite()) throw Error(ErrorCode::SingularJacobian, "Newton step is not finite");

    const double f_norm = F.lpNorm<Eigen::Infinity>();
    double step = 1.0;
    bool accepted = false;
    TrigPoly trial = u;
    Vec F_trial;
    for (int halving = 0; halving <= opts.max_halvings; ++halving, step *= 0.5) {
      trial.coeffs() = u.coeffs() + step * delta;
      try {
        F_trial = F_of(trial);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DomainEscape) throw;
        continue;
      }
      const double t_norm = F_trial.lpNorm<Eigen::Infinity>();
      if (std::isfinite(t_norm) && (t_norm < f_norm || t_norm <= noise_floor(trial))) {
        accepted = true;
        break;
      }
    }

    double update = 0.0;
    if (accepted) {
      update = step * delta.lpNorm<Eigen::Infinity>();
      u = trial;
      F = F_trial;
    } else if (f_norm > noise_floor(u)) {
      throw Error(ErrorCode::NoConvergence, "line search failed to decrease the residual");
    }

    if (update < opts.tol_newton) {
      const DefectInfo info = defect_info(sys, u, fine_grid_size(degree));
      const double tol_res = opts.tol_res.value_or(1e-8 * (1.0 + info.field_sup));
      if (info.defect > tol_res) {
        throw Error(ErrorCode::NoConvergence, "Newton stalled with time-domain defect " +
                                                  std::to_string(info.defect) + " above tolerance");
      }
      SolutionRecord rec;
      rec.u = u;
      rec.residual_inf = info.defect;
      rec.coeff_residual = F.lpNorm<Eigen::Infinity>();
      rec.tol_res = tol_res;
      rec.local_sign = lu_det_sign(lu);
      rec.iterations = iter;
      rec.distance_to_equilibrium =
          sup_distance(u, TrigPoly::constant(sys.period, sys.equilibrium), fine_grid_size(degree));
      return rec;
    }
  }
  throw Error(ErrorCode::NoConvergence, "no convergence after " + std::to_string(opts.max_iter) + " iterations");
}

double near_equilibrium_radius(const DelaySystem& sys, const PuncturedBall& dom, std::optional<double> cap) {
  double d = distance_to_boundary(dom, sys.equilibrium);
  if (cap) d = std::min(d, *cap);
  return std::max(d, 0.0) / 4.0;
}

SolutionSet multi_start_solve(const DelaySystem& sys, const PuncturedBall& dom, const MultiStartOptions& opts) {
  if (opts.budget < 1) throw Error(ErrorCode::Precondition, "budget must be at least 1");
  if (dom.dim != sys.dim) throw Error(ErrorCode::Precondition, "domain and system dimensions differ");

  SolutionSet set;
  set.degree = choose_degree(sys, opts.degree);
  set.chi_target = opts.chi.value_or(euler_characteristic(dom));
  set.gamma_expected = nonresonance_test(sys.linearisation(), set.chi_target).gamma;
  set.rho = near_equilibrium_radius(sys, dom, opts.rho);
  set.delta_dup = 1e-4 * dom.diameter();
  const int K = set.degree;
  const int m_fine = fine_grid_size(K);

  std::vector<SolutionRecord> pool;
  auto run = [&](const std::vector<TrigPoly>& starts) {
    std::vector<std::optional<SolutionRecord>> results(starts.size());
    parallel_for(static_cast<int>(starts.size()), opts.threads, [&](int i) {
      const auto idx = static_cast<std::size_t>(i);
      try {
        SolutionRecord rec = newton_solve(sys, starts[idx], K, opts.solver);
        if (inside_closure(dom, rec.u, m_fine)) results[idx] = std::move(rec);
      } catch (const Error&) {
      }
    });
    set.starts += static_cast<int>(starts.size());
    for (auto& r : results) {
      if (!r) continue;
      ++set.converged;
      pool.push_back(std::move(*r));
    }
  };
  auto dedup = [&] {
    std::sort(pool.begin(), pool.end(), [](const SolutionRecord& l, const SolutionRecord& r) {
      if (l.distance_to_equilibrium != r.distance_to_equilibrium) {
        return l.distance_to_equilibrium < r.distance_to_equilibrium;
      }
      const Vec& a = l.u.coeffs();
      const Vec& b = r.u.coeffs();
      return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    });
    std::vector<SolutionRecord> kept;
    for (auto& rec : pool) {
      const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const SolutionRecord& k) {
        return sup_distance(k.u, rec.u, m_fine) < set.delta_dup;
      });
      if (!duplicate) kept.push_back(std::move(rec));
    }
    pool = std::move(kept);
  };

  // Equilibrium plus a Halton grid of constants inside Omega, away from the holes.
  std::vector<TrigPoly> starts{TrigPoly::constant(sys.period, sys.equilibrium)};
  const std::uint64_t max_tries = static_cast<std::uint64_t>(opts.budget) * 1000;
  for (std::uint64_t i = 0; static_cast<int>(starts.size()) < opts.budget + 1 && i < max_tries; ++i) {
    const Vec x = dom.R * (2.0 * halton(i, dom.dim).array() - 1.0);
    if (contains(dom, x).region != Region::Interior) continue;
    const bool near_hole = std::any_of(dom.holes.begin(), dom.holes.end(),
                                       [&](const Hole& h) { return (x - h.center).norm() < 1.5 * h.eta; });
    if (near_hole) continue;
    starts.push_back(TrigPoly::constant(sys.period, x));
  }
  run(starts);
  dedup();

  // Random trig-poly perturbations of each solution, seeded by the solution's
  // quantised mean so the stream does not depend on discovery order.
  if (opts.perturbations > 0) {
    std::vector<TrigPoly> restarts;
    const double sigma = opts.perturbation_scale * dom.diameter();
    const int pert_degree = std::min(K, 2);
    for (const auto& rec : pool) {
      std::uint64_t key = splitmix64(opts.seed);
      for (Eigen::Index i = 0; i < rec.u.dim(); ++i) {
        key = splitmix64(key ^ static_cast<std::uint64_t>(std::llround(rec.u.a0()[i] / set.delta_dup)));
      }
      std::mt19937_64 rng(key);
      std::uniform_real_distribution<double> dist(-sigma, sigma);
      for (int q = 0; q < opts.perturbations; ++q) {
        TrigPoly pert(sys.dim, sys.period, pert_degree);
        for (Eigen::Index i = 0; i < pert.size(); ++i) pert.coeffs()[i] = dist(rng);
        restarts.push_back(rec.u + pert);
      }
    }
    run(restarts);
    dedup();
  }

  for (auto& rec : pool) rec.near_equilibrium = rec.distance_to_equilibrium <= set.rho;
  set.records = std::move(pool);
  set.index_sum = 0;
  for (const auto& rec : set.records) set.index_sum += rec.local_sign;
  return set;
}

DegreeAudit degree_audit(const SolutionSet& set, int dim, int chi, int sign_s) {
  DegreeAudit audit;
  for (const auto& rec : set.records) {
    if (rec.local_sign == 0) throw Error(ErrorCode::Precondition, "record without a local sign");
    audit.index_sum += rec.local_sign;
  }
  audit.expected_total = (dim % 2 == 0 ? 1 : -1) * chi;
  audit.total_matches = audit.index_sum == audit.expected_total;
  audit.expected_local = sign_s;
  // Records are sorted by distance to e, so the first near-equilibrium one is the closest.
  for (const auto& rec : set.records) {
    if (rec.near_equilibrium) {
      audit.near_equilibrium_sign = rec.local_sign;
      break;
    }
  }
  audit.local_matches = audit.near_equilibrium_sign == sign_s;
  audit.missed_solutions = !audit.total_matches;
  audit.passed = audit.total_matches && audit.local_matches;
  if (audit.passed) {
    audit.message = "index sum matches (-1)^N chi and the near-equilibrium index matches s(A+B)";
  } else if (audit.missed_solutions) {
    audit.message = "index sum " + std::to_string(audit.index_sum) + " differs from (-1)^N chi = " +
                    std::to_string(audit.expected_total) + ": solutions likely missed";
  } else {
    audit.message = "near-equilibrium index does not match s(A+B)";
  }
  return audit;
}

ForcingProbe probe_forcing_threshold(const DelaySystem& sys, const PuncturedBall& dom,
                                     const MultiStartOptions& opts, int bisections) {
  ForcingProbe probe;
  const int K = choose_degree(sys, opts.degree);
  const int m_fine = fine_grid_size(K);
  const double p_norm = sup_norm(sys.forcing, m_fine);
  if (p_norm == 0.0) return probe;
  const double rho = near_equilibrium_radius(sys, dom, opts.rho);
  const TrigPoly start = TrigPoly::constant(sys.period, sys.equilibrium);

  auto succeeds = [&](double scale) {
    ++probe.evaluations;
    try {
      const SolutionRecord rec = newton_solve(sys.with_forcing(scale * sys.forcing), start, K, opts.solver);
      return rec.distance_to_equilibrium <= rho && inside_closure(dom, rec.u, m_fine);
    } catch (const Error&) {
      return false;
    }
  };

  double lo = 0.0;
  double hi = 1.0;
  if (succeeds(1.0)) {
    lo = 1.0;
    hi = 2.0;
    while (hi <= 1024.0 && succeeds(hi)) {
      lo = hi;
      hi *= 2.0;
    }
    if (hi > 1024.0) {
      probe.last_success = lo * p_norm;
      return probe;
    }
  }
  for (int i = 0; i < bisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (succeeds(mid)) lo = mid;
    else hi = mid;
  }
  probe.last_success = lo * p_norm;
  probe.first_failure = hi * p_norm;
  return probe;
}

}  // namespace perdde
