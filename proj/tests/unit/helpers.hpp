#pragma once

#include <random>

#include "perdde/trig_poly.hpp"

namespace testutil {

constexpr double kPi = 3.14159265358979323846;

inline perdde::Mat random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  perdde::Mat M(rows, cols);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = d(rng);
  return M;
}

inline perdde::TrigPoly random_trig(std::mt19937_64& rng, int dim, double period, int degree, double scale = 1.0) {
  perdde::TrigPoly u(dim, period, degree);
  std::uniform_real_distribution<double> d(-scale, scale);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.coeffs()[i] = d(rng);
  return u;
}

inline perdde::Vec unit(int dim, int i) { return perdde::Vec::Unit(dim, i); }

inline double max_abs(const perdde::Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace testutil
