#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "perdde/linear_analysis.hpp"
#include "perdde/trig_poly.hpp"

namespace perdde {

/// Right-hand side g(x, y) with x = u(t), y = u(t - tau).
using Field = std::function<Vec(const Vec& x, const Vec& y)>;
/// Partial Jacobian of g with respect to x or y.
using FieldJacobian = std::function<Mat(const Vec& x, const Vec& y)>;
/// Whether g may be evaluated at (x, y).
using Admissible = std::function<bool(const Vec& x, const Vec& y)>;

/// A periodically forced delay system u'(t) = g(u(t), u(t - tau)) + p(t) around
/// an equilibrium e with g(e, e) = 0. The forcing is a trig polynomial sharing
/// the period T, so its periodicity is exact.
struct DelaySystem {
  int dim = 0;
  Field g;
  FieldJacobian dx_g;  // optional
  FieldJacobian dy_g;  // optional
  Admissible admissible;  // optional; empty means everywhere
  double tau = 0.0;
  double period = 1.0;
  TrigPoly forcing;
  Vec equilibrium;
  Mat A;  // D_x g(e, e)
  Mat B;  // D_y g(e, e)

  LinearPair linearisation() const { return {A, B, tau, period}; }
  bool has_analytic_jacobian() const { return static_cast<bool>(dx_g) && static_cast<bool>(dy_g); }
  bool admits(const Vec& x, const Vec& y) const { return !admissible || admissible(x, y); }
  /// g(x, y) + p(t).
  Vec rhs(double t, const Vec& x, const Vec& y) const;
  /// Copy with the forcing replaced.
  DelaySystem with_forcing(TrigPoly p) const;
};

struct SystemSpec {
  int dim = 0;
  Field g;
  double tau = 0.0;
  double period = 1.0;
  Vec equilibrium;
  std::optional<TrigPoly> forcing;
  FieldJacobian dx_g;
  FieldJacobian dy_g;
  Admissible admissible;
};

/// Validates the instance (|g(e,e)| <= tol_eq, forcing shape) and fills A, B
/// from the analytic hooks or by central differences.
DelaySystem make_delay_system(SystemSpec spec);

/// g(x, y) = A x + B y with equilibrium 0 and exact Jacobians.
DelaySystem linear_system(const Mat& A, const Mat& B, double tau, double period,
                          std::optional<TrigPoly> forcing = std::nullopt);

/// Central-difference Jacobians (D_x g, D_y g) at (x, y).
std::pair<Mat, Mat> fd_jacobians(const Field& g, const Vec& x, const Vec& y, double step = 1e-7);

/// Tolerance on |g(e, e)|.
double equilibrium_tolerance(const Vec& e);

}  // namespace perdde
