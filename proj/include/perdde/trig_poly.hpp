#pragma once

#include <utility>

#include <Eigen/Dense>

namespace perdde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Vector-valued trigonometric polynomial of degree K and period T:
///
///   u(t) = a_0 + sum_{k=1..K} ( cos(l_k t) a_k + sin(l_k t) b_k ),  l_k = 2 k pi / T.
///
/// Coefficients are stored in one flat vector, interleaved per harmonic:
/// [a_0 | a_1 b_1 | a_2 b_2 | ...], each block of length N. The pair (a_k, b_k)
/// is therefore contiguous, matching the 2N x 2N harmonic blocks of the
/// linearised operators.
class TrigPoly {
 public:
  TrigPoly() = default;
  TrigPoly(int dim, double period, int degree);
  TrigPoly(int dim, double period, int degree, Vec coeffs);

  static TrigPoly constant(double period, const Vec& value);

  int dim() const noexcept { return dim_; }
  double period() const noexcept { return period_; }
  int degree() const noexcept { return degree_; }
  Eigen::Index size() const noexcept { return coeffs_.size(); }

  /// Angular frequency of harmonic k.
  double lambda(int k) const noexcept;

  const Vec& coeffs() const noexcept { return coeffs_; }
  Vec& coeffs() noexcept { return coeffs_; }

  auto a0() { return coeffs_.segment(0, dim_); }
  auto a0() const { return coeffs_.segment(0, dim_); }
  auto a(int k) { return coeffs_.segment(dim_ * (2 * k - 1), dim_); }
  auto a(int k) const { return coeffs_.segment(dim_ * (2 * k - 1), dim_); }
  auto b(int k) { return coeffs_.segment(dim_ * 2 * k, dim_); }
  auto b(int k) const { return coeffs_.segment(dim_ * 2 * k, dim_); }
  /// The contiguous (a_k, b_k) block, k >= 1.
  auto harmonic(int k) { return coeffs_.segment(dim_ * (2 * k - 1), 2 * dim_); }
  auto harmonic(int k) const { return coeffs_.segment(dim_ * (2 * k - 1), 2 * dim_); }

  Vec operator()(double t) const;

  /// Same function at a different degree: truncates or zero-pads.
  TrigPoly with_degree(int degree) const;

  TrigPoly& operator+=(const TrigPoly& rhs);
  TrigPoly& operator-=(const TrigPoly& rhs);
  TrigPoly& operator*=(double s);

 private:
  int dim_ = 0;
  double period_ = 1.0;
  int degree_ = 0;
  Vec coeffs_;
};

TrigPoly operator+(TrigPoly lhs, const TrigPoly& rhs);
TrigPoly operator-(TrigPoly lhs, const TrigPoly& rhs);
TrigPoly operator*(double s, TrigPoly u);

/// A trig polynomial plus an explicit linear part: f(t) = slope * t + periodic(t).
/// The linear part is never folded into Fourier coefficients.
struct AffineTrig {
  Vec slope;
  TrigPoly periodic;

  Vec operator()(double t) const;
  /// (1/T) * integral_0^T f.
  Vec mean() const;
};

Vec evaluate(const TrigPoly& u, double t);

/// v(t) = u(t - tau), by rotating each harmonic pair.
TrigPoly delay_shift(const TrigPoly& u, double tau);

TrigPoly derivative(const TrigPoly& u);

/// Returns (Iu, mean of u) with Iu(t) = integral_0^t u(s) ds.
std::pair<AffineTrig, Vec> antiderivative_and_mean(const TrigPoly& u);

/// Collocation grid size used throughout for degree K: 4K + 4.
int collocation_size(int degree) noexcept;

/// Equispaced nodes t_j = j T / m.
Vec grid_nodes(double period, int m);

/// Samples u at the m equispaced nodes; column j is u(t_j).
Mat sample(const TrigPoly& u, int m);

/// Degree-K discrete Fourier projection of equispaced samples (column j taken
/// at t_j = j T / m). Throws GridTooCoarse when m < 2K + 2.
TrigPoly project(const Mat& samples, double period, int degree);

/// Max-norm of u over m equispaced nodes (component-wise max of |u_i|).
double sup_norm(const TrigPoly& u, int m);

/// Max-norm distance between two polynomials over m equispaced nodes.
double sup_distance(const TrigPoly& u, const TrigPoly& v, int m);

}  // namespace perdde
