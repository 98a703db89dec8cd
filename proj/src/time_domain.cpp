#include "perdde/time_domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "perdde/error.hpp"
#include "perdde/sampling.hpp"

namespace perdde {

namespace {

struct Hermite {
  double h00, h10, h01, h11;
};

Hermite hermite_basis(double th) {
  const double th2 = th * th;
  const double th3 = th2 * th;
  return {2 * th3 - 3 * th2 + 1, th3 - 2 * th2 + th, -2 * th3 + 3 * th2, th3 - th2};
}

Hermite hermite_basis_derivative(double th) {
  const double th2 = th * th;
  return {6 * th2 - 6 * th, 3 * th2 - 4 * th + 1, -6 * th2 + 6 * th, 3 * th2 - 2 * th};
}

Vec hermite(const Vec& y0, const Vec& m0, const Vec& y1, const Vec& m1, double h, double th, bool derivative) {
  if (derivative) {
    const Hermite b = hermite_basis_derivative(th);
    return (b.h00 * y0 + b.h01 * y1) / h + b.h10 * m0 + b.h11 * m1;
  }
  const Hermite b = hermite_basis(th);
  return b.h00 * y0 + b.h10 * h * m0 + b.h01 * y1 + b.h11 * h * m1;
}

std::vector<Vec> estimate_slopes(const HistorySegment& phi) {
  const int m = phi.intervals();
  std::vector<Vec> out(phi.values.size(), Vec::Zero(phi.dim()));
  if (m < 1) return out;
  const double h = phi.tau / m;
  const auto& v = phi.values;
  if (m == 1) {
    out[0] = out[1] = (v[1] - v[0]) / h;
    return out;
  }
  const auto last = static_cast<std::size_t>(m);
  out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  out[last] = (3.0 * v[last] - 4.0 * v[last - 1] + v[last - 2]) / (2.0 * h);
  for (std::size_t j = 1; j < last; ++j) out[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
  return out;
}

int parity_sign(Eigen::Index dim) { return dim % 2 == 0 ? 1 : -1; }

int lu_sign(const Eigen::PartialPivLU<Mat>& lu) {
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] == 0.0) return 0;
    if (diag[i] < 0.0) sign = -sign;
  }
  return sign;
}

}  // namespace

double HistorySegment::node(int j) const {
  const int m = intervals();
  return m == 0 ? 0.0 : -tau + tau * j / m;
}

void HistorySegment::validate() const {
  if (!(tau >= 0.0)) throw Error(ErrorCode::Precondition, "history delay must be non-negative");
  if (values.empty()) throw Error(ErrorCode::Precondition, "history has no nodes");
  if (tau > 0.0 && values.size() < 2) throw Error(ErrorCode::Precondition, "history on [-tau, 0] needs m >= 1");
  if (tau == 0.0 && values.size() != 1) throw Error(ErrorCode::Precondition, "history with tau = 0 has one node");
  for (const auto& v : values) {
    if (v.size() != values.front().size()) throw Error(ErrorCode::Precondition, "history values differ in length");
    if (!v.allFinite()) throw Error(ErrorCode::Precondition, "history values must be finite");
  }
  if (!slopes.empty() && slopes.size() != values.size()) {
    throw Error(ErrorCode::Precondition, "history slopes must match the node count");
  }
}

HistorySegment HistorySegment::constant(const Vec& value, double tau, int m) {
  const int nodes = tau > 0.0 ? m + 1 : 1;
  HistorySegment h;
  h.tau = tau;
  h.values.assign(static_cast<std::size_t>(nodes), value);
  h.slopes.assign(static_cast<std::size_t>(nodes), Vec::Zero(value.size()));
  return h;
}

HistorySegment HistorySegment::from_function(const std::function<Vec(double)>& f, double tau, int m,
                                             const std::function<Vec(double)>& df) {
  HistorySegment h;
  h.tau = tau;
  const int nodes = tau > 0.0 ? m + 1 : 1;
  for (int j = 0; j < nodes; ++j) {
    const double s = nodes == 1 ? 0.0 : -tau + tau * j / m;
    h.values.push_back(f(s));
    if (df) h.slopes.push_back(df(s));
  }
  return h;
}

HistorySegment HistorySegment::from_trig(const TrigPoly& u, double t_end, double tau, int m) {
  const TrigPoly du = derivative(u);
  return from_function([&](double s) { return u(t_end + s); }, tau, m, [&](double s) { return du(t_end + s); });
}

double history_distance(const HistorySegment& a, const HistorySegment& b) {
  if (a.values.size() != b.values.size()) throw Error(ErrorCode::Precondition, "histories differ in node count");
  double d = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    d = std::max(d, (a.values[j] - b.values[j]).lpNorm<Eigen::Infinity>());
  }
  return d;
}

DenseTrajectory::DenseTrajectory(HistorySegment history, double dt) : history_(std::move(history)), dt_(dt) {
  history_.validate();
  history_slopes_ = history_.slopes.empty() ? estimate_slopes(history_) : history_.slopes;
}

void DenseTrajectory::push(Vec value, Vec slope) {
  values_.push_back(std::move(value));
  slopes_.push_back(std::move(slope));
}

Vec DenseTrajectory::history_value(double s, bool want_derivative) const {
  const int m = history_.intervals();
  if (m == 0) return want_derivative ? history_slopes_[0] : history_.values[0];
  const double h = history_.tau / m;
  s = std::clamp(s, -history_.tau, 0.0);
  const int j = std::clamp(static_cast<int>(std::floor((s + history_.tau) / h)), 0, m - 1);
  const auto i = static_cast<std::size_t>(j);
  const double th = (s - history_.node(j)) / h;
  return hermite(history_.values[i], history_slopes_[i], history_.values[i + 1], history_slopes_[i + 1], h, th,
                 want_derivative);
}

Vec DenseTrajectory::operator()(double t) const {
  if (values_.empty() || (t < 0.0 && history_.tau > 0.0)) return history_value(t, false);
  if (values_.size() == 1) return values_[0];
  const auto last = values_.size() - 2;
  const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(t / dt_))), last);
  const double th = (t - knot(i)) / dt_;
  if (th == 0.0) return values_[i];
  return hermite(values_[i], slopes_[i], values_[i + 1], slopes_[i + 1], dt_, th, false);
}

Vec DenseTrajectory::derivative(double t) const {
  if (values_.empty() || (t < 0.0 && history_.tau > 0.0)) return history_value(t, true);
  if (values_.size() == 1) return slopes_[0];
  const auto last = values_.size() - 2;
  const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(t / dt_))), last);
  const double th = (t - knot(i)) / dt_;
  return hermite(values_[i], slopes_[i], values_[i + 1], slopes_[i + 1], dt_, th, true);
}

DenseTrajectory integrate(const DelayRhs& rhs, const HistorySegment& phi, double t_end, double dt,
                          const IntegrateOptions& opts) {
  phi.validate();
  if (!(dt > 0.0)) throw Error(ErrorCode::StepMisfit, "step must be positive");
  if (!(t_end >= 0.0)) throw Error(ErrorCode::Precondition, "t_end must be non-negative");
  const double tau = phi.tau;
  if (tau > 0.0) {
    const double ratio = tau / dt;
    const double steps_per_delay = std::round(ratio);
    if (steps_per_delay < 1.0 || std::abs(ratio - steps_per_delay) > 1e-9 * ratio) {
      throw Error(ErrorCode::StepMisfit, "dt = " + std::to_string(dt) + " does not divide tau = " + std::to_string(tau));
    }
  }

  DenseTrajectory traj(phi, dt);
  auto delayed = [&](double s, const Vec& stage) -> Vec { return tau > 0.0 ? traj(s) : stage; };
  auto check = [&](const Vec& v, double t) {
    if (!v.allFinite() || v.lpNorm<Eigen::Infinity>() > opts.blowup_bound) {
      throw Error(ErrorCode::BlowUp, "solution left the bound " + std::to_string(opts.blowup_bound) +
                                         " at t = " + std::to_string(t));
    }
  };

  const Vec u0 = phi.values.back();
  traj.push(u0, rhs(0.0, u0, delayed(-tau, u0)));
  const auto n_steps = static_cast<std::size_t>(std::max(0.0, std::ceil(t_end / dt - 1e-9)));
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = traj.knot(i);
    const Vec u = traj.values()[i];
    const Vec k1 = traj.slopes()[i];
    const Vec s2 = u + 0.5 * dt * k1;
    const Vec k2 = rhs(t + 0.5 * dt, s2, delayed(t + 0.5 * dt - tau, s2));
    const Vec s3 = u + 0.5 * dt * k2;
    const Vec k3 = rhs(t + 0.5 * dt, s3, delayed(t + 0.5 * dt - tau, s3));
    const Vec s4 = u + dt * k3;
    const Vec k4 = rhs(t + dt, s4, delayed(t + dt - tau, s4));
    Vec next = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check(next, t + dt);
    // The delayed value at the new knot lies at or before t, already stored.
    Vec slope = rhs(t + dt, next, delayed(t + dt - tau, next));
    check(slope, t + dt);
    traj.push(std::move(next), std::move(slope));
  }
  return traj;
}

DenseTrajectory integrate(const DelaySystem& sys, const HistorySegment& phi, double t_end, double dt,
                          const IntegrateOptions& opts) {
  if (phi.dim() != sys.dim || phi.tau != sys.tau) {
    throw Error(ErrorCode::Precondition, "history does not match the system dimension and delay");
  }
  const DelayRhs rhs = [&sys](double t, const Vec& x, const Vec& y) -> Vec {
    if (!sys.admits(x, y)) {
      throw Error(ErrorCode::BlowUp, "trajectory reached a singularity of g at t = " + std::to_string(t));
    }
    return sys.rhs(t, x, y);
  };
  return integrate(rhs, phi, t_end, dt, opts);
}

namespace {

double step_for(double tau, int intervals, double period, const PoincareOptions& opts) {
  return tau > 0.0 ? tau / intervals : period / opts.ode_steps;
}

HistorySegment read_segment(const DenseTrajectory& traj, const HistorySegment& grid, double t_end) {
  HistorySegment out;
  out.tau = grid.tau;
  for (int j = 0; j <= grid.intervals(); ++j) {
    out.values.push_back(traj(t_end + grid.node(j)));
    out.slopes.push_back(traj.derivative(t_end + grid.node(j)));
  }
  return out;
}

}  // namespace

HistorySegment poincare_map(const DelaySystem& sys, const HistorySegment& phi, const PoincareOptions& opts) {
  if (sys.tau > sys.period) throw Error(ErrorCode::Precondition, "the Poincare operator needs tau <= T");
  phi.validate();
  const double dt = step_for(sys.tau, phi.intervals(), sys.period, opts);
  const DenseTrajectory traj = integrate(sys, phi, sys.period, dt, opts.integrate);
  return read_segment(traj, phi, sys.period);
}

Mat monodromy(const LinearCoefficients& coeffs, int dim, double tau, double period, int m,
              const PoincareOptions& opts) {
  if (tau > period) throw Error(ErrorCode::Precondition, "the Poincare operator needs tau <= T");
  if (tau > 0.0 && m < 1) throw Error(ErrorCode::Precondition, "monodromy needs m >= 1");
  const int nodes = tau > 0.0 ? m + 1 : 1;
  const int ncols = dim * nodes;
  const Eigen::Index state = static_cast<Eigen::Index>(dim) * ncols;

  // All unit histories are integrated at once as the columns of a dim x ncols state.
  HistorySegment phi;
  phi.tau = tau;
  for (int j = 0; j < nodes; ++j) {
    Mat H = Mat::Zero(dim, ncols);
    for (int i = 0; i < dim; ++i) H(i, j * dim + i) = 1.0;
    phi.values.push_back(Eigen::Map<const Vec>(H.data(), state));
  }

  const DelayRhs rhs = [&](double t, const Vec& x, const Vec& y) -> Vec {
    const auto [A, B] = coeffs(t);
    const Eigen::Map<const Mat> X(x.data(), dim, ncols);
    const Eigen::Map<const Mat> Y(y.data(), dim, ncols);
    Mat out = A * X + B * Y;
    return Eigen::Map<const Vec>(out.data(), state);
  };
  const double dt = step_for(tau, m, period, opts);
  IntegrateOptions iopts = opts.integrate;
  iopts.blowup_bound = std::numeric_limits<double>::infinity();
  const DenseTrajectory traj = integrate(rhs, phi, period, dt, iopts);

  Mat M(ncols, ncols);
  for (int j = 0; j < nodes; ++j) {
    const Vec x = traj(period + phi.node(j));
    M.block(static_cast<Eigen::Index>(j) * dim, 0, dim, ncols) = Eigen::Map<const Mat>(x.data(), dim, ncols);
  }
  return M;
}

Mat monodromy(const LinearPair& lp, int m, const PoincareOptions& opts) {
  lp.validate();
  const LinearCoefficients coeffs = [&lp](double) { return std::make_pair(lp.A, lp.B); };
  return monodromy(coeffs, lp.dim(), lp.tau, lp.period, m, opts);
}

Mat solution_monodromy(const DelaySystem& sys, const TrigPoly& u, int m, const PoincareOptions& opts) {
  const TrigPoly ut = delay_shift(u, sys.tau);
  const LinearCoefficients coeffs = [&](double t) {
    const Vec x = u(t);
    const Vec y = ut(t);
    if (sys.has_analytic_jacobian()) return std::make_pair(sys.dx_g(x, y), sys.dy_g(x, y));
    return fd_jacobians(sys.g, x, y);
  };
  return monodromy(coeffs, sys.dim, sys.tau, sys.period, m, opts);
}

std::vector<std::complex<double>> floquet_multipliers(const Mat& monodromy) {
  const Eigen::EigenSolver<Mat> es(monodromy, false);
  const auto ev = es.eigenvalues();
  std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
    if (std::abs(l) != std::abs(r)) return std::abs(l) > std::abs(r);
    if (l.real() != r.real()) return l.real() > r.real();
    return l.imag() > r.imag();
  });
  return out;
}

FloquetReport classify_multipliers(std::vector<std::complex<double>> multipliers) {
  FloquetReport rep;
  rep.multipliers = std::move(multipliers);
  rep.stable_hint = true;
  for (const auto& s : rep.multipliers) {
    if (std::abs(s - 1.0) <= kFloquetTol) {
      throw Error(ErrorCode::ResonantLinearisation, "a Floquet multiplier lies within tol_fl of 1");
    }
    if (std::abs(s) >= 1.0 - kFloquetTol) rep.stable_hint = false;
    // Near-zero modes are artifacts of the history discretisation.
    if (std::abs(s) < 1e-10) continue;
    const bool real = std::abs(s.imag()) <= 1e-8 * std::abs(s);
    if (real && s.real() > 1.0 + kFloquetTol) ++rep.alpha;
  }
  rep.index = rep.alpha % 2 == 0 ? 1 : -1;
  return rep;
}

FloquetReport floquet_report(const LinearPair& lp, int m, const PoincareOptions& opts) {
  return classify_multipliers(floquet_multipliers(monodromy(lp, m, opts)));
}

OdeDegree ode_poincare_degree(const Mat& M, double period) {
  if (!small_delay_eigentest(M, period).pass) {
    throw Error(ErrorCode::FloquetOne, "1 is a Floquet multiplier of u' = M u");
  }
  const auto n = M.rows();
  const Mat E = (period * M).exp();
  const Mat D = Mat::Identity(n, n) - E;
  const Eigen::PartialPivLU<Mat> lu(D);
  OdeDegree out;
  out.determinant = lu.determinant();
  const double scale = std::max(1.0, spectral_norm(D));
  if (std::abs(out.determinant) <= 1e-12 * std::pow(scale, static_cast<double>(n))) {
    throw Error(ErrorCode::FloquetOne, "det(I - exp(TM)) is numerically zero");
  }
  out.sign = lu_sign(lu);
  out.expected = parity_sign(n) * sign_of_det(M);
  out.consistent = out.sign == out.expected;
  return out;
}

double characteristic_function(const LinearPair& lp, double l) {
  const auto n = lp.A.rows();
  const Mat C = l * Mat::Identity(n, n) - lp.A - std::exp(-l * lp.tau) * lp.B;
  return C.partialPivLu().determinant();
}

CharacteristicRoot positive_characteristic_root(const LinearPair& lp) {
  lp.validate();
  CharacteristicRoot out;
  out.h0 = characteristic_function(lp, 0.0);
  out.upper = spectral_norm(lp.A) + spectral_norm(lp.B) + 1.0;
  if (!(out.h0 < 0.0)) return out;
  double lo = 0.0;
  double hi = out.upper;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * out.upper; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (characteristic_function(lp, mid) < 0.0) lo = mid;
    else hi = mid;
  }
  out.root = 0.5 * (lo + hi);
  return out;
}

EquicontinuityResult equicontinuity_check(const DelaySystem& sys, const std::vector<HistorySegment>& phis, double R,
                                          int lipschitz_samples, const PoincareOptions& opts) {
  EquicontinuityResult out;
  const int n = sys.dim;
  const Vec zero = Vec::Zero(n);
  const Vec g0 = sys.g(zero, zero);
  const int m_p = 64 * (sys.forcing.degree() + 1);
  for (int j = 0; j < m_p; ++j) {
    out.offset = std::max(out.offset, (g0 + sys.forcing(sys.period * j / m_p)).norm());
  }

  int accepted = 0;
  for (std::uint64_t i = 0; accepted < lipschitz_samples && i < static_cast<std::uint64_t>(lipschitz_samples) * 100;
       ++i) {
    const Vec h = halton(i, 2 * n);
    const Vec x = R * (2.0 * h.head(n).array() - 1.0);
    const Vec y = R * (2.0 * h.tail(n).array() - 1.0);
    if (x.norm() > R || y.norm() > R || !sys.admits(x, y)) continue;
    ++accepted;
    const auto [dx, dy] = sys.has_analytic_jacobian() ? std::make_pair(sys.dx_g(x, y), sys.dy_g(x, y))
                                                      : fd_jacobians(sys.g, x, y);
    const double l = spectral_norm(dx) + spectral_norm(dy);
    if (std::isfinite(l)) out.lipschitz = std::max(out.lipschitz, l);
  }
  out.bound = out.offset + out.lipschitz * R;

  for (const auto& phi : phis) {
    const double dt = step_for(sys.tau, phi.intervals(), sys.period, opts);
    const DenseTrajectory traj = integrate(sys, phi, sys.period, dt, opts.integrate);
    for (const auto& v : traj.values()) {
      if (v.norm() > R) throw Error(ErrorCode::Precondition, "trajectory left the R-ball");
    }
    const double t0 = sys.period - sys.tau;
    for (std::size_t i = 0; i + 1 < traj.values().size(); ++i) {
      if (traj.knot(i) < t0 - 1e-12 * sys.period) continue;
      out.modulus = std::max(out.modulus, (traj.values()[i + 1] - traj.values()[i]).norm() / dt);
    }
  }
  out.pass = out.modulus <= out.bound * (1.0 + 1e-9) + 1e-12;
  return out;
}

void write_trajectory_csv(std::ostream& os, const std::vector<double>& t, const std::vector<Vec>& u) {
  if (t.size() != u.size()) throw Error(ErrorCode::Precondition, "time and value counts differ");
  const Eigen::Index n = u.empty() ? 0 : u.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",u" << (i + 1);
  os << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < t.size(); ++r) {
    os << t[r];
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << u[r][i];
    os << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const DenseTrajectory& traj) {
  std::vector<double> t;
  for (std::size_t i = 0; i < traj.values().size(); ++i) t.push_back(traj.knot(i));
  write_trajectory_csv(os, t, traj.values());
}

}  // namespace perdde
