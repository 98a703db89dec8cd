#pragma once

#include <optional>
#include <vector>

#include "perdde/trig_poly.hpp"

namespace perdde {

/// Linearisation u'(t) = A u(t) + B u(t - tau) at the equilibrium, with period T.
struct LinearPair {
  Mat A;
  Mat B;
  double tau = 0.0;
  double period = 1.0;

  int dim() const noexcept { return static_cast<int>(A.rows()); }
  /// Throws Precondition unless A, B are square of equal size, tau >= 0, T > 0.
  void validate() const;
};

/// Harmonic-k data: X_k = A + cos(l_k tau) B, Y_k = l_k I + sin(l_k tau) B,
/// h_k = det [[X, -Y], [Y, X]] and, for k >= 1, M_k = (1/l_k) [[Y, X], [-X, Y]].
struct BlockPair {
  int k = 0;
  Mat X;
  Mat Y;
  double h = 0.0;
  Mat Mk;  // empty for k = 0
  double scale = 1.0;      // 1 + |A|_2 + |B|_2 + l_k
  double tolerance = 0.0;  // 1e-9 * scale^(2N)

  /// |h| / scale^(2N).
  double normalized_h() const;
};

struct Certificate {
  int dim = 0;
  bool nonresonant = false;
  /// det(A + B) too close to zero: s(A + B) and Gamma are not emitted.
  bool degenerate = false;
  std::optional<int> failing_k;
  int k0 = 0;
  std::vector<double> h_values;
  std::vector<double> normalized_h;
  std::optional<int> sign_s;
  std::optional<int> gamma;
  int chi = 1;
  double margin = 0.0;  // min_k normalized |h_k|
};

struct ScanPoint {
  double period;
  double margin;
};

struct EigenTestResult {
  bool pass = true;
  std::optional<int> offending_k;
};

double lambda_k(int k, double period);

double spectral_norm(const Mat& M);

/// [[X, -Y], [Y, X]].
Mat complex_block(const Mat& X, const Mat& Y);

BlockPair block_pair(const LinearPair& lp, int k);

/// Smallest k0 with l_{k0+1} > |A|_2 + 2 |B|_2. Beyond k0 every h_k is nonzero.
int truncation_k0(const LinearPair& lp);

/// Scans h_0 .. h_{k0}. A near-singular A + B yields a degenerate certificate
/// (resonant at k = 0, no sign or Gamma) rather than an exception.
Certificate nonresonance_test(const LinearPair& lp, int chi);

/// Resonance margin min_k |h_k| / scale^(2N) at `steps` equispaced periods,
/// ordered by period.
std::vector<ScanPoint> resonance_scan(const Mat& A, const Mat& B, double tau, double period_lo,
                                      double period_hi, int steps);

/// Checks that no eigenvalue of M equals +-i l_k, i.e. that 1 is not a Floquet
/// multiplier of u' = M u.
EigenTestResult small_delay_eigentest(const Mat& M, double period);

/// sgn det(M), throwing SingularMatrix when det(M)^2 is within the harmonic-0
/// determinant tolerance.
int sign_of_det(const Mat& M);

/// |chi - (-1)^N s(M)| + 1.
int gamma_bound(int chi, const Mat& M);

}  // namespace perdde
