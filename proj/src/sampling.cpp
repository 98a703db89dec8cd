#include "perdde/sampling.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "perdde/error.hpp"

namespace perdde {

namespace {

constexpr std::array<int, 64> kPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

}  // namespace

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

Vec halton(std::uint64_t index, int dim) {
  if (dim < 1 || dim > static_cast<int>(kPrimes.size())) {
    throw Error(ErrorCode::Precondition, "Halton dimension out of range");
  }
  Vec p(dim);
  for (int i = 0; i < dim; ++i) p[i] = radical_inverse(index + 1, kPrimes[static_cast<std::size_t>(i)]);
  return p;
}

std::vector<Vec> sphere_points(int dim, int count) {
  std::vector<Vec> out;
  if (count < 1) return out;
  out.reserve(static_cast<std::size_t>(count));
  if (dim == 1) {
    for (int i = 0; i < count; ++i) out.push_back(Vec::Constant(1, i % 2 == 0 ? 1.0 : -1.0));
  } else if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * i / count;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      out.push_back(v);
    }
  } else if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      Vec v(3);
      v << r * std::cos(golden * i), r * std::sin(golden * i), z;
      out.push_back(v);
    }
  } else {
    for (std::uint64_t i = 0; static_cast<int>(out.size()) < count; ++i) {
      Vec v = 2.0 * halton(i, dim).array() - 1.0;
      const double n = v.norm();
      if (n < 1e-3 || n > 1.0) continue;
      out.push_back(v / n);
    }
  }
  return out;
}

}  // namespace perdde
