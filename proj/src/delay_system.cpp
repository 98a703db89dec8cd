#include "perdde/delay_system.hpp"

#include <cmath>
#include <string>

#include "perdde/error.hpp"

namespace perdde {

Vec DelaySystem::rhs(double t, const Vec& x, const Vec& y) const { return g(x, y) + forcing(t); }

DelaySystem DelaySystem::with_forcing(TrigPoly p) const {
  if (p.dim() != dim || p.period() != period) {
    throw Error(ErrorCode::Precondition, "forcing must share the system dimension and period");
  }
  DelaySystem out = *this;
  out.forcing = std::move(p);
  return out;
}

double equilibrium_tolerance(const Vec& e) { return 1e-9 * (1.0 + e.lpNorm<Eigen::Infinity>()); }

std::pair<Mat, Mat> fd_jacobians(const Field& g, const Vec& x, const Vec& y, double step) {
  const auto n = x.size();
  Mat dx(n, n);
  Mat dy(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = step * (1.0 + std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    dx.col(i) = (g(xp, y) - g(xm, y)) / (2.0 * h);
    const double hy = step * (1.0 + std::abs(y[i]));
    Vec yp = y, ym = y;
    yp[i] += hy;
    ym[i] -= hy;
    dy.col(i) = (g(x, yp) - g(x, ym)) / (2.0 * hy);
  }
  return {dx, dy};
}

DelaySystem make_delay_system(SystemSpec spec) {
  if (spec.dim < 1 || spec.equilibrium.size() != spec.dim) {
    throw Error(ErrorCode::Precondition, "equilibrium must have length N >= 1");
  }
  if (!spec.g) throw Error(ErrorCode::Precondition, "right-hand side g is required");
  if (!(spec.tau >= 0.0) || !(spec.period > 0.0)) {
    throw Error(ErrorCode::Precondition, "need tau >= 0 and T > 0");
  }
  DelaySystem sys;
  sys.dim = spec.dim;
  sys.g = std::move(spec.g);
  sys.dx_g = std::move(spec.dx_g);
  sys.dy_g = std::move(spec.dy_g);
  sys.admissible = std::move(spec.admissible);
  sys.tau = spec.tau;
  sys.period = spec.period;
  sys.equilibrium = spec.equilibrium;
  sys.forcing = spec.forcing ? *spec.forcing : TrigPoly(spec.dim, spec.period, 0);
  if (sys.forcing.dim() != sys.dim || sys.forcing.period() != sys.period) {
    throw Error(ErrorCode::Precondition, "forcing must share the system dimension and period");
  }

  const Vec& e = sys.equilibrium;
  const double defect = sys.g(e, e).lpNorm<Eigen::Infinity>();
  if (!(defect <= equilibrium_tolerance(e))) {
    throw Error(ErrorCode::Precondition,
                "|g(e,e)| = " + std::to_string(defect) + " exceeds the equilibrium tolerance");
  }
  if (sys.has_analytic_jacobian()) {
    sys.A = sys.dx_g(e, e);
    sys.B = sys.dy_g(e, e);
  } else {
    std::tie(sys.A, sys.B) = fd_jacobians(sys.g, e, e);
  }
  return sys;
}

DelaySystem linear_system(const Mat& A, const Mat& B, double tau, double period,
                          std::optional<TrigPoly> forcing) {
  LinearPair{A, B, tau, period}.validate();
  SystemSpec spec;
  spec.dim = static_cast<int>(A.rows());
  spec.g = [A, B](const Vec& x, const Vec& y) -> Vec { return A * x + B * y; };
  spec.dx_g = [A](const Vec&, const Vec&) -> Mat { return A; };
  spec.dy_g = [B](const Vec&, const Vec&) -> Mat { return B; };
  spec.tau = tau;
  spec.period = period;
  spec.equilibrium = Vec::Zero(A.rows());
  spec.forcing = std::move(forcing);
  return make_delay_system(std::move(spec));
}

}  // namespace perdde
