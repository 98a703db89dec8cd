#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "perdde/delay_system.hpp"

namespace perdde {

/// f(t, x, y) with x = u(t), y = u(t - tau).
using DelayRhs = std::function<Vec(double t, const Vec& x, const Vec& y)>;

/// History u_t(theta) on m + 1 equispaced nodes theta_j = -tau + j tau / m.
/// With tau = 0 the segment is the single node theta = 0.
struct HistorySegment {
  double tau = 0.0;
  std::vector<Vec> values;
  std::vector<Vec> slopes;  // optional; estimated by finite differences when empty

  int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
  int intervals() const { return static_cast<int>(values.size()) - 1; }
  double node(int j) const;
  void validate() const;

  static HistorySegment constant(const Vec& value, double tau, int m);
  static HistorySegment from_function(const std::function<Vec(double)>& f, double tau, int m,
                                      const std::function<Vec(double)>& df = {});
  /// u restricted to [t_end - tau, t_end], shifted to [-tau, 0], with exact slopes.
  static HistorySegment from_trig(const TrigPoly& u, double t_end, double tau, int m);
};

/// Max-norm distance between two histories on the same node grid.
double history_distance(const HistorySegment& a, const HistorySegment& b);

/// Piecewise cubic Hermite trajectory on knots t_i = i dt, plus the initial history.
class DenseTrajectory {
 public:
  DenseTrajectory(HistorySegment history, double dt);

  double dt() const noexcept { return dt_; }
  const HistorySegment& history() const noexcept { return history_; }
  const std::vector<Vec>& values() const noexcept { return values_; }
  const std::vector<Vec>& slopes() const noexcept { return slopes_; }
  double knot(std::size_t i) const noexcept { return dt_ * static_cast<double>(i); }
  double end_time() const noexcept { return knot(values_.size() - 1); }

  Vec operator()(double t) const;
  Vec derivative(double t) const;

  void push(Vec value, Vec slope);
  void set_slope(std::size_t i, Vec slope) { slopes_[i] = std::move(slope); }

 private:
  Vec history_value(double s, bool want_derivative) const;

  HistorySegment history_;
  std::vector<Vec> history_slopes_;
  double dt_;
  std::vector<Vec> values_;
  std::vector<Vec> slopes_;
};

struct IntegrateOptions {
  double blowup_bound = 1e8;
};

/// Classical RK4 by the method of steps. For tau > 0, dt must divide tau.
DenseTrajectory integrate(const DelayRhs& rhs, const HistorySegment& phi, double t_end, double dt,
                          const IntegrateOptions& opts = {});

/// Same, for u' = g(u, u_tau) + p(t).
DenseTrajectory integrate(const DelaySystem& sys, const HistorySegment& phi, double t_end, double dt,
                          const IntegrateOptions& opts = {});

struct PoincareOptions {
  int ode_steps = 2048;  // steps per period when tau = 0
  IntegrateOptions integrate;
};

/// P phi(s) = u(T + s) on the node grid of phi. Requires tau <= T.
HistorySegment poincare_map(const DelaySystem& sys, const HistorySegment& phi, const PoincareOptions& opts = {});

/// Time-dependent coefficients (A(t), B(t)) of a linear delay system.
using LinearCoefficients = std::function<std::pair<Mat, Mat>(double t)>;

/// Discretised linear Poincare operator: column c is the image of the c-th
/// unit history vector. Size N(m+1) for tau > 0, N for tau = 0.
Mat monodromy(const LinearCoefficients& coeffs, int dim, double tau, double period, int m,
              const PoincareOptions& opts = {});
Mat monodromy(const LinearPair& lp, int m, const PoincareOptions& opts = {});

/// Monodromy of the variational equation along a periodic solution u.
Mat solution_monodromy(const DelaySystem& sys, const TrigPoly& u, int m, const PoincareOptions& opts = {});

/// Eigenvalues sorted by modulus, descending.
std::vector<std::complex<double>> floquet_multipliers(const Mat& monodromy);

struct FloquetReport {
  std::vector<std::complex<double>> multipliers;
  int alpha = 0;
  int index = 1;
  bool stable_hint = false;
};

constexpr double kFloquetTol = 1e-6;

/// Classifies multipliers of a monodromy matrix. Throws ResonantLinearisation
/// when a multiplier lies within tol_fl of 1.
FloquetReport classify_multipliers(std::vector<std::complex<double>> multipliers);

FloquetReport floquet_report(const LinearPair& lp, int m, const PoincareOptions& opts = {});

struct OdeDegree {
  int sign = 0;           // sgn det(I - e^{TM})
  int expected = 0;       // (-1)^N s(M)
  bool consistent = false;
  double determinant = 0.0;
};

/// Degree of I - P_M for u' = M u. Throws FloquetOne when 1 is a multiplier.
OdeDegree ode_poincare_degree(const Mat& M, double period);

struct CharacteristicRoot {
  double h0 = 0.0;              // h(0) = det(-A - B)
  std::optional<double> root;   // positive real root, when h(0) < 0
  double upper = 0.0;           // bracket end with h > 0
};

/// h(l) = det(l I - A - B e^{-l tau}).
double characteristic_function(const LinearPair& lp, double l);

/// If h(0) < 0, locates a positive real characteristic root by bisection on [0, |A| + |B| + 1].
CharacteristicRoot positive_characteristic_root(const LinearPair& lp);

struct EquicontinuityResult {
  double modulus = 0.0;    // sampled Lipschitz modulus of P phi over all phis
  double offset = 0.0;     // C = sup_t |g(0,0) + p(t)|
  double lipschitz = 0.0;  // L, sampled over the R-ball
  double bound = 0.0;      // C + L R
  bool pass = false;
};

/// Empirical check of |P phi(t2) - P phi(t1)| <= (C + L R)(t2 - t1). Diagnostic only.
EquicontinuityResult equicontinuity_check(const DelaySystem& sys, const std::vector<HistorySegment>& phis, double R,
                                          int lipschitz_samples = 512, const PoincareOptions& opts = {});

/// CSV with header t,u1,...,uN and 17 significant digits.
void write_trajectory_csv(std::ostream& os, const std::vector<double>& t, const std::vector<Vec>& u);
void write_trajectory_csv(std::ostream& os, const DenseTrajectory& traj);

}  // namespace perdde
