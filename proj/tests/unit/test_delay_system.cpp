#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "perdde/delay_system.hpp"
#include "perdde/error.hpp"
#include "perdde/sampling.hpp"

using namespace perdde;
using namespace testutil;

TEST_CASE("make_delay_system fills A and B by central differences") {
  SystemSpec spec;
  spec.dim = 2;
  spec.g = [](const Vec& x, const Vec& y) -> Vec {
    Vec out(2);
    out << -x[0] + std::sin(y[1]), x[0] * x[1] - 2.0 * y[0] + y[1] * y[1];
    return out;
  };
  spec.tau = 0.3;
  spec.period = 2.0;
  spec.equilibrium = Vec::Zero(2);
  const DelaySystem sys = make_delay_system(spec);
  Mat A(2, 2), B(2, 2);
  A << -1, 0, 0, 0;
  B << 0, 1, -2, 0;
  CHECK((sys.A - A).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK((sys.B - B).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(sys.forcing.degree() == 0);
  CHECK(max_abs(sys.forcing.coeffs()) == 0.0);
  CHECK_FALSE(sys.has_analytic_jacobian());
}

TEST_CASE("make_delay_system rejects a non-equilibrium and mismatched forcing") {
  SystemSpec spec;
  spec.dim = 1;
  spec.g = [](const Vec& x, const Vec&) -> Vec { return Vec::Constant(1, 1.0) - x; };
  spec.period = 1.0;
  spec.equilibrium = Vec::Zero(1);
  CHECK_THROWS_AS(make_delay_system(spec), Error);
  spec.equilibrium = Vec::Ones(1);
  CHECK_NOTHROW(make_delay_system(spec));
  spec.forcing = TrigPoly(1, 2.0, 1);
  CHECK_THROWS_AS(make_delay_system(spec), Error);
  spec.forcing = TrigPoly(2, 1.0, 1);
  CHECK_THROWS_AS(make_delay_system(spec), Error);
}

TEST_CASE("linear_system and rhs") {
  Mat A(1, 1), B(1, 1);
  A << -1.0;
  B << 0.5;
  TrigPoly p(1, 2.0, 1);
  p.b(1)[0] = 1.0;
  const DelaySystem sys = linear_system(A, B, 0.1, 2.0, p);
  CHECK(sys.has_analytic_jacobian());
  const Vec x = Vec::Constant(1, 2.0), y = Vec::Constant(1, 4.0);
  CHECK(std::abs(sys.rhs(0.5, x, y)[0] - (-2.0 + 2.0 + 1.0)) < 1e-15);
  const DelaySystem unforced = sys.with_forcing(TrigPoly(1, 2.0, 0));
  CHECK(std::abs(unforced.rhs(0.5, x, y)[0]) < 1e-15);
}

TEST_CASE("fd_jacobians on a quadratic field") {
  const Field g = [](const Vec& x, const Vec& y) -> Vec { return x.cwiseProduct(y); };
  Vec x(2), y(2);
  x << 1.0, -2.0;
  y << 3.0, 0.5;
  const auto [dx, dy] = fd_jacobians(g, x, y);
  CHECK((dx - Mat(y.asDiagonal())).norm() < 1e-8);
  CHECK((dy - Mat(x.asDiagonal())).norm() < 1e-8);
}

TEST_CASE("radical inverse and Halton points") {
  CHECK(radical_inverse(1, 2) == 0.5);
  CHECK(radical_inverse(3, 2) == 0.75);
  CHECK(std::abs(radical_inverse(5, 3) - (2.0 / 3 + 1.0 / 9)) < 1e-15);
  std::set<double> seen;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const Vec h = halton(i, 5);
    CHECK(h.minCoeff() > 0.0);
    CHECK(h.maxCoeff() < 1.0);
    seen.insert(h[0]);
  }
  CHECK(seen.size() == 200);
}

TEST_CASE("sphere points are unit vectors") {
  const auto line = sphere_points(1, 7);
  bool plus = false, minus = false;
  for (const auto& p : line) {
    CHECK(std::abs(p[0]) == 1.0);
    plus = plus || p[0] > 0;
    minus = minus || p[0] < 0;
  }
  CHECK((plus && minus));
  for (int dim : {2, 3, 4, 6}) {
    const auto pts = sphere_points(dim, 100);
    CHECK(pts.size() == 100);
    for (const auto& p : pts) CHECK(std::abs(p.norm() - 1.0) < 1e-14);
  }
}
