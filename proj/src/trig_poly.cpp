#include "perdde/trig_poly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "perdde/error.hpp"

namespace perdde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_compatible(const TrigPoly& lhs, const TrigPoly& rhs) {
  if (lhs.dim() != rhs.dim() || lhs.period() != rhs.period()) {
    throw Error(ErrorCode::Precondition, "trig polynomials differ in dimension or period");
  }
}

}  // namespace

TrigPoly::TrigPoly(int dim, double period, int degree)
    : TrigPoly(dim, period, degree, Vec::Zero(static_cast<Eigen::Index>(dim) * (2 * degree + 1))) {}

TrigPoly::TrigPoly(int dim, double period, int degree, Vec coeffs)
    : dim_(dim), period_(period), degree_(degree), coeffs_(std::move(coeffs)) {
  if (dim < 1 || degree < 0 || !(period > 0.0)) {
    throw Error(ErrorCode::Precondition, "trig polynomial needs dim >= 1, degree >= 0, period > 0");
  }
  if (coeffs_.size() != static_cast<Eigen::Index>(dim) * (2 * degree + 1)) {
    throw Error(ErrorCode::Precondition, "coefficient vector has length " +
                                             std::to_string(coeffs_.size()) + ", expected N(2K+1)");
  }
}

TrigPoly TrigPoly::constant(double period, const Vec& value) {
  return TrigPoly(static_cast<int>(value.size()), period, 0, value);
}

double TrigPoly::lambda(int k) const noexcept { return kTwoPi * k / period_; }

Vec TrigPoly::operator()(double t) const {
  // Reduce to one period first so that u(t) and u(t + T) share the same phase.
  const double phase = t - period_ * std::floor(t / period_);
  Vec out = a0();
  for (int k = 1; k <= degree_; ++k) {
    const double arg = lambda(k) * phase;
    out.noalias() += std::cos(arg) * a(k) + std::sin(arg) * b(k);
  }
  return out;
}

TrigPoly TrigPoly::with_degree(int degree) const {
  TrigPoly out(dim_, period_, degree);
  const Eigen::Index n = std::min(out.size(), size());
  out.coeffs_.head(n) = coeffs_.head(n);
  return out;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& rhs) {
  check_compatible(*this, rhs);
  if (rhs.degree_ > degree_) *this = with_degree(rhs.degree_);
  coeffs_.head(rhs.size()) += rhs.coeffs_;
  return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& rhs) {
  check_compatible(*this, rhs);
  if (rhs.degree_ > degree_) *this = with_degree(rhs.degree_);
  coeffs_.head(rhs.size()) -= rhs.coeffs_;
  return *this;
}

TrigPoly& TrigPoly::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

TrigPoly operator+(TrigPoly lhs, const TrigPoly& rhs) { return lhs += rhs; }
TrigPoly operator-(TrigPoly lhs, const TrigPoly& rhs) { return lhs -= rhs; }
TrigPoly operator*(double s, TrigPoly u) { return u *= s; }

Vec AffineTrig::operator()(double t) const { return slope * t + periodic(t); }

Vec AffineTrig::mean() const { return slope * (periodic.period() / 2.0) + periodic.a0(); }

Vec evaluate(const TrigPoly& u, double t) { return u(t); }

TrigPoly delay_shift(const TrigPoly& u, double tau) {
  TrigPoly v = u;
  for (int k = 1; k <= u.degree(); ++k) {
    const double c = std::cos(u.lambda(k) * tau);
    const double s = std::sin(u.lambda(k) * tau);
    v.a(k) = c * u.a(k) - s * u.b(k);
    v.b(k) = s * u.a(k) + c * u.b(k);
  }
  return v;
}

TrigPoly derivative(const TrigPoly& u) {
  TrigPoly v(u.dim(), u.period(), u.degree());
  for (int k = 1; k <= u.degree(); ++k) {
    const double l = u.lambda(k);
    v.a(k) = l * u.b(k);
    v.b(k) = -l * u.a(k);
  }
  return v;
}

std::pair<AffineTrig, Vec> antiderivative_and_mean(const TrigPoly& u) {
  // integral_0^t (cos(l s) a + sin(l s) b) ds = sin(l t) a / l + (1 - cos(l t)) b / l
  TrigPoly periodic(u.dim(), u.period(), u.degree());
  for (int k = 1; k <= u.degree(); ++k) {
    const double l = u.lambda(k);
    periodic.a0() += u.b(k) / l;
    periodic.a(k) = -u.b(k) / l;
    periodic.b(k) = u.a(k) / l;
  }
  Vec mean = u.a0();
  return {AffineTrig{u.a0(), std::move(periodic)}, std::move(mean)};
}

int collocation_size(int degree) noexcept { return 4 * degree + 4; }

Vec grid_nodes(double period, int m) {
  Vec t(m);
  for (int j = 0; j < m; ++j) t[j] = period * j / m;
  return t;
}

Mat sample(const TrigPoly& u, int m) {
  Mat out(u.dim(), m);
  for (int j = 0; j < m; ++j) {
    // Phase computed exactly as 2 pi (k j mod m) / m to keep the grid aligned.
    Vec col = u.a0();
    for (int k = 1; k <= u.degree(); ++k) {
      const double arg = kTwoPi * static_cast<double>((static_cast<long long>(k) * j) % m) / m;
      col.noalias() += std::cos(arg) * u.a(k) + std::sin(arg) * u.b(k);
    }
    out.col(j) = col;
  }
  return out;
}

TrigPoly project(const Mat& samples, double period, int degree) {
  const auto m = static_cast<int>(samples.cols());
  if (m < 2 * degree + 2) {
    throw Error(ErrorCode::GridTooCoarse, "m = " + std::to_string(m) + " samples cannot resolve degree " +
                                              std::to_string(degree) + " (need m >= 2K+2)");
  }
  const auto dim = static_cast<int>(samples.rows());
  TrigPoly u(dim, period, degree);
  u.a0() = samples.rowwise().sum() / m;
  for (int k = 1; k <= degree; ++k) {
    Vec ca = Vec::Zero(dim);
    Vec sb = Vec::Zero(dim);
    for (int j = 0; j < m; ++j) {
      const double arg = kTwoPi * static_cast<double>((static_cast<long long>(k) * j) % m) / m;
      ca.noalias() += std::cos(arg) * samples.col(j);
      sb.noalias() += std::sin(arg) * samples.col(j);
    }
    u.a(k) = 2.0 * ca / m;
    u.b(k) = 2.0 * sb / m;
  }
  return u;
}

double sup_norm(const TrigPoly& u, int m) { return sample(u, m).cwiseAbs().maxCoeff(); }

double sup_distance(const TrigPoly& u, const TrigPoly& v, int m) {
  return sample(u - v, m).cwiseAbs().maxCoeff();
}

}  // namespace perdde
