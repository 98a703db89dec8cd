#include "perdde/linear_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <numbers>

#include "perdde/error.hpp"

namespace perdde {

namespace {

constexpr double kDetRelTol = 1e-9;

double det_scale(const Mat& A, const Mat& B, double lambda) {
  return 1.0 + spectral_norm(A) + spectral_norm(B) + lambda;
}

double det_tolerance(double scale, int dim) { return kDetRelTol * std::pow(scale, 2 * dim); }

int parity_sign(int dim) { return dim % 2 == 0 ? 1 : -1; }

}  // namespace

void LinearPair::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != A.cols()) {
    throw Error(ErrorCode::Precondition, "A and B must be square matrices of the same size");
  }
  if (!(tau >= 0.0) || !(period > 0.0)) {
    throw Error(ErrorCode::Precondition, "need tau >= 0 and T > 0");
  }
}

double BlockPair::normalized_h() const {
  return std::abs(h) / std::pow(scale, static_cast<double>(2 * X.rows()));
}

double lambda_k(int k, double period) { return 2.0 * std::numbers::pi * k / period; }

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

Mat complex_block(const Mat& X, const Mat& Y) {
  const auto n = X.rows();
  Mat out(2 * n, 2 * n);
  out << X, -Y, Y, X;
  return out;
}

BlockPair block_pair(const LinearPair& lp, int k) {
  lp.validate();
  const int n = lp.dim();
  const double l = lambda_k(k, lp.period);
  BlockPair bp;
  bp.k = k;
  bp.X = lp.A + std::cos(l * lp.tau) * lp.B;
  bp.Y = l * Mat::Identity(n, n) + std::sin(l * lp.tau) * lp.B;
  if (k == 0) bp.Y.setZero();
  bp.h = complex_block(bp.X, bp.Y).partialPivLu().determinant();
  if (k >= 1) {
    Mat mk(2 * n, 2 * n);
    mk << bp.Y, bp.X, -bp.X, bp.Y;
    bp.Mk = mk / l;
  }
  bp.scale = det_scale(lp.A, lp.B, l);
  bp.tolerance = det_tolerance(bp.scale, n);
  return bp;
}

int truncation_k0(const LinearPair& lp) {
  lp.validate();
  const double bound = spectral_norm(lp.A) + 2.0 * spectral_norm(lp.B);
  int k0 = 0;
  while (lambda_k(k0 + 1, lp.period) <= bound) ++k0;
  return k0;
}

Certificate nonresonance_test(const LinearPair& lp, int chi) {
  lp.validate();
  Certificate cert;
  cert.dim = lp.dim();
  cert.chi = chi;
  cert.k0 = truncation_k0(lp);
  cert.margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= cert.k0; ++k) {
    const BlockPair bp = block_pair(lp, k);
    cert.h_values.push_back(bp.h);
    cert.normalized_h.push_back(bp.normalized_h());
    cert.margin = std::min(cert.margin, bp.normalized_h());
    if (std::abs(bp.h) <= bp.tolerance && !cert.failing_k) cert.failing_k = k;
  }
  cert.nonresonant = !cert.failing_k.has_value();
  cert.degenerate = cert.failing_k == 0;
  if (!cert.degenerate) {
    const double det = (lp.A + lp.B).partialPivLu().determinant();
    cert.sign_s = det > 0.0 ? 1 : -1;
    cert.gamma = std::abs(chi - parity_sign(cert.dim) * *cert.sign_s) + 1;
  }
  return cert;
}

std::vector<ScanPoint> resonance_scan(const Mat& A, const Mat& B, double tau, double period_lo,
                                      double period_hi, int steps) {
  if (!(period_lo > 0.0) || !(period_hi > period_lo) || steps < 2) {
    throw Error(ErrorCode::Precondition, "resonance scan needs 0 < T_lo < T_hi and steps >= 2");
  }
  std::vector<ScanPoint> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double period = period_lo + (period_hi - period_lo) * i / (steps - 1);
    const LinearPair lp{A, B, tau, period};
    const int k0 = truncation_k0(lp);
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= k0; ++k) margin = std::min(margin, block_pair(lp, k).normalized_h());
    out.push_back({period, margin});
  }
  return out;
}

EigenTestResult small_delay_eigentest(const Mat& M, double period) {
  if (!(period > 0.0)) throw Error(ErrorCode::Precondition, "T must be positive");
  const double norm = spectral_norm(M);
  const double tol = 1e-8 * (1.0 + norm);
  const auto eig = M.eigenvalues();
  const int k_max = static_cast<int>(std::ceil((norm + 1.0) * period / (2.0 * std::numbers::pi)));
  for (int k = 0; k <= k_max; ++k) {
    const double l = lambda_k(k, period);
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
      if (std::abs(eig[i] - std::complex<double>(0.0, l)) <= tol ||
          std::abs(eig[i] + std::complex<double>(0.0, l)) <= tol) {
        return {false, k};
      }
    }
  }
  return {true, std::nullopt};
}

int sign_of_det(const Mat& M) {
  if (M.rows() < 1 || M.rows() != M.cols()) throw Error(ErrorCode::Precondition, "matrix must be square");
  const double det = M.partialPivLu().determinant();
  const double tol = det_tolerance(1.0 + spectral_norm(M), static_cast<int>(M.rows()));
  if (det * det <= tol) throw Error(ErrorCode::SingularMatrix, "det(M) is numerically zero");
  return det > 0.0 ? 1 : -1;
}

int gamma_bound(int chi, const Mat& M) {
  const int s = sign_of_det(M);
  return std::abs(chi - parity_sign(static_cast<int>(M.rows())) * s) + 1;
}

}  // namespace perdde
