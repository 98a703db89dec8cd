#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perdde/delay_system.hpp"
#include "perdde/domain.hpp"

namespace perdde {

/// Truncation degree: max(k0 + 4, 8, override).
int choose_degree(const DelaySystem& sys, std::optional<int> override_degree = std::nullopt);

/// Degree-K projection of t -> g(u(t), u(t - tau)) on the 4K+4 collocation grid.
/// Throws DomainEscape when a grid point is not admissible for g.
TrigPoly nemitskii(const DelaySystem& sys, const TrigPoly& u, int degree);

/// K u = mean(u) - t mean(N u) + I N u - mean(I N u) for a given N u. The
/// linear-in-t parts cancel; throws if they do not (within 1e-10).
TrigPoly fixed_point_operator(const TrigPoly& u, const TrigPoly& Nu);

TrigPoly apply_K(const DelaySystem& sys, const TrigPoly& u, int degree);

/// p_hat = I p - mean(I p) - t mean(p), truncated to degree K.
TrigPoly p_hat(const DelaySystem& sys, int degree);

struct ResidualResult {
  TrigPoly F;            // u - K u - p_hat
  double coeff_norm = 0.0;  // max |coefficient of F|
  double defect = 0.0;      // max_t |u' - g(u, u_tau) - p| on the fine grid
};

/// Fine grid size used for time-domain defects: 4x the collocation grid.
int fine_grid_size(int degree);

ResidualResult residual(const DelaySystem& sys, const TrigPoly& u);

/// Time-domain defect max_t |u'(t) - g(u(t), u(t - tau)) - p(t)| over m equispaced nodes.
double time_domain_defect(const DelaySystem& sys, const TrigPoly& u, int m);

struct SolverOptions {
  double tol_newton = 1e-10;
  std::optional<double> tol_res;  // default 1e-8 (1 + field scale at the iterate)
  int max_iter = 50;
  int max_halvings = 12;
  double cond_limit = 1e14;
  bool use_analytic_jacobian = true;  // when the system supplies D_x g, D_y g
};

struct SolutionRecord {
  TrigPoly u;
  double residual_inf = 0.0;   // time-domain defect on the fine grid
  double coeff_residual = 0.0; // max |u - K u - p_hat| coefficient
  double tol_res = 0.0;
  int local_sign = 0;
  bool near_equilibrium = false;
  double distance_to_equilibrium = 0.0;
  int iterations = 0;
  std::optional<std::vector<std::complex<double>>> floquet;
};

/// Jacobian of u -> u - K u - p_hat in coefficient space, by forward
/// differences or via the analytic hook.
Mat residual_jacobian(const DelaySystem& sys, const TrigPoly& u, const SolverOptions& opts = {});

/// Damped Newton on the N(2K+1) coefficients. Throws NoConvergence,
/// SingularJacobian or DomainEscape.
SolutionRecord newton_solve(const DelaySystem& sys, const TrigPoly& start, int degree,
                            const SolverOptions& opts = {});

struct MultiStartOptions {
  std::optional<int> degree;
  int budget = 128;
  int perturbations = 2;            // perturbed restarts per found solution
  double perturbation_scale = 0.05;  // relative to diam(Omega)
  std::optional<double> rho;        // user cap on the near-equilibrium radius
  std::optional<int> chi;           // overrides the domain's Euler characteristic
  std::uint64_t seed = 0;
  int threads = 1;
  SolverOptions solver;
};

struct SolutionSet {
  std::vector<SolutionRecord> records;
  std::optional<int> gamma_expected;
  int index_sum = 0;
  int chi_target = 0;
  int degree = 0;
  double rho = 0.0;
  double delta_dup = 0.0;
  int starts = 0;
  int converged = 0;
};

SolutionSet multi_start_solve(const DelaySystem& sys, const PuncturedBall& dom, const MultiStartOptions& opts = {});

struct DegreeAudit {
  int index_sum = 0;
  int expected_total = 0;  // (-1)^N chi
  bool total_matches = false;
  std::optional<int> near_equilibrium_sign;
  int expected_local = 0;  // s(A + B)
  bool local_matches = false;
  bool missed_solutions = false;
  bool passed = false;
  std::string message;
};

DegreeAudit degree_audit(const SolutionSet& set, int dim, int chi, int sign_s);

struct ForcingProbe {
  double last_success = 0.0;   // largest probed |p|_inf with a near-equilibrium solution
  double first_failure = 0.0;  // smallest probed failing |p|_inf (0 if none failed)
  int evaluations = 0;
};

/// Bisection on the forcing amplitude for the continuation of the equilibrium
/// branch: success means Newton from e converges to a solution inside
/// closure(Omega) within the near-equilibrium radius.
ForcingProbe probe_forcing_threshold(const DelaySystem& sys, const PuncturedBall& dom,
                                     const MultiStartOptions& opts = {}, int bisections = 20);

/// Near-equilibrium radius: min(dist(e, boundary), user cap) / 4.
double near_equilibrium_radius(const DelaySystem& sys, const PuncturedBall& dom, std::optional<double> cap);

}  // namespace perdde
