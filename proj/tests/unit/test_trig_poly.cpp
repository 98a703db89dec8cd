#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "perdde/error.hpp"
#include "perdde/trig_poly.hpp"

using namespace perdde;
using namespace testutil;

TEST_CASE("evaluate: constant, cosine and sine terms") {
  Vec c(2);
  c << 1.5, -2.0;
  const TrigPoly k = TrigPoly::constant(3.0, c);
  CHECK(max_abs(evaluate(k, 0.7) - c) == 0.0);

  TrigPoly u(2, 2 * kPi, 1);
  u.a(1) = unit(2, 0);
  CHECK(max_abs(u(0.0) - unit(2, 0)) < 1e-15);

  TrigPoly s(2, 2 * kPi, 1);
  s.b(1) = unit(2, 0);
  CHECK(max_abs(s(kPi / 2) - unit(2, 0)) < 1e-15);
}

TEST_CASE("evaluate agrees at t and t + T") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    // Dyadic t and T: t + T is exact, so the reduced phase is identical.
    const TrigPoly u = random_trig(rng, 3, 2.5, 6);
    const double t = 0.125 * i;
    CHECK(max_abs(u(t) - u(t + u.period())) == 0.0);
    CHECK(max_abs(u(t) - u(t - 3 * u.period())) == 0.0);
    // Otherwise only the rounding of t + T itself remains.
    const double s = 0.1 * i + 1e-3;
    CHECK(max_abs(u(s) - u(s + u.period())) < 1e-13);
  }
}

TEST_CASE("delay_shift examples") {
  std::mt19937_64 rng(2);
  const TrigPoly u = random_trig(rng, 2, 2 * kPi, 4);
  CHECK(max_abs(delay_shift(u, 0.0).coeffs() - u.coeffs()) == 0.0);
  CHECK(max_abs(delay_shift(u, u.period()).coeffs() - u.coeffs()) < 1e-14);

  TrigPoly c(1, 2 * kPi, 1);
  c.a(1)[0] = 1.0;
  const TrigPoly v = delay_shift(c, kPi / 2);
  CHECK(std::abs(v.a(1)[0]) < 1e-15);
  CHECK(std::abs(v.b(1)[0] - 1.0) < 1e-15);
}

TEST_CASE("delay_shift composes and matches pointwise evaluation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const TrigPoly u = random_trig(rng, 2, 1.0 + 0.05 * i, 5);
    const double s = d(rng), t = d(rng), tau = d(rng);
    CHECK(max_abs(delay_shift(delay_shift(u, s), t).coeffs() - delay_shift(u, s + t).coeffs()) < 1e-12);
    CHECK(max_abs(evaluate(delay_shift(u, tau), t) - evaluate(u, t - tau)) < 1e-12);
  }
}

TEST_CASE("derivative examples") {
  const TrigPoly k = TrigPoly::constant(1.0, Vec::Constant(2, 3.0));
  CHECK(max_abs(derivative(k).coeffs()) == 0.0);

  TrigPoly c(1, 2 * kPi, 1);
  c.a(1)[0] = 1.0;
  const TrigPoly dc = derivative(c);
  CHECK(std::abs(dc.b(1)[0] + 1.0) < 1e-15);
  CHECK(std::abs(dc.a(1)[0]) < 1e-15);

  TrigPoly s(1, 2 * kPi, 2);
  s.b(2)[0] = 1.0;
  const TrigPoly ds = derivative(s);
  CHECK(std::abs(ds.a(2)[0] - 2.0) < 1e-14);
  CHECK(std::abs(ds.b(2)[0]) < 1e-15);
}

TEST_CASE("derivative matches central differences") {
  std::mt19937_64 rng(4);
  const TrigPoly u = random_trig(rng, 2, 3.0, 5);
  const TrigPoly du = derivative(u);
  const double h = 1e-5;
  for (double t : {0.0, 0.4, 1.7, 2.9}) {
    const Vec fd = (u(t + h) - u(t - h)) / (2 * h);
    CHECK(max_abs(fd - du(t)) < 1e-7);
  }
}

TEST_CASE("antiderivative_and_mean examples") {
  const auto [z, zm] = antiderivative_and_mean(TrigPoly(2, 1.0, 3));
  CHECK(max_abs(z(0.7)) == 0.0);
  CHECK(max_abs(zm) == 0.0);

  const Vec c = Vec::Constant(1, 2.5);
  const auto [ic, cm] = antiderivative_and_mean(TrigPoly::constant(4.0, c));
  CHECK(max_abs(ic(1.3) - 1.3 * c) < 1e-15);
  CHECK(max_abs(cm - c) == 0.0);

  TrigPoly cs(1, 2 * kPi, 1);
  cs.a(1)[0] = 1.0;
  const auto [ics, csm] = antiderivative_and_mean(cs);
  CHECK(max_abs(ics.slope) == 0.0);
  CHECK(std::abs(ics(0.9)[0] - std::sin(0.9)) < 1e-15);
  CHECK(max_abs(csm) == 0.0);
}

TEST_CASE("antiderivative: Iu(0) = 0, derivative recovers u, mean equals a0") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const TrigPoly u = random_trig(rng, 3, 0.5 + i, 6);
    const auto [Iu, mean] = antiderivative_and_mean(u);
    CHECK(max_abs(Iu(0.0)) < 1e-14);
    CHECK(max_abs(Iu.slope - u.a0()) == 0.0);
    TrigPoly back = derivative(Iu.periodic);
    back.a0() += Iu.slope;
    CHECK(max_abs(back.coeffs() - u.coeffs()) < 1e-12);
    CHECK(max_abs(mean - u.a0()) == 0.0);
    // Mean of the affine function by quadrature.
    const int m = 512;
    Vec q = Vec::Zero(3);
    for (int j = 0; j < m; ++j) q += Iu(u.period() * (j + 0.5) / m);
    CHECK(max_abs(q / m - Iu.mean()) < 1e-5 * (1.0 + max_abs(Iu.mean())));
  }
}

TEST_CASE("project examples") {
  const Vec c = Vec::Constant(2, -0.75);
  const TrigPoly pc = project(sample(TrigPoly::constant(1.0, c), 5), 1.0, 0);
  CHECK(max_abs(pc.a0() - c) < 1e-15);

  TrigPoly cs(2, 2 * kPi, 1);
  cs.a(1) = unit(2, 0);
  const TrigPoly p1 = project(sample(cs, 8), 2 * kPi, 1);
  CHECK(max_abs(p1.coeffs() - cs.coeffs()) < 1e-15);

  // cos(t)^2 = 1/2 + cos(2t)/2, sampled directly.
  Mat s(1, 8);
  for (int j = 0; j < 8; ++j) s(0, j) = std::pow(std::cos(2 * kPi * j / 8), 2);
  const TrigPoly p2 = project(s, 2 * kPi, 2);
  CHECK(std::abs(p2.a0()[0] - 0.5) < 1e-15);
  CHECK(std::abs(p2.a(2)[0] - 0.5) < 1e-15);
  CHECK(std::abs(p2.a(1)[0]) < 1e-15);
  CHECK(std::abs(p2.b(1)[0]) < 1e-15);
  CHECK(std::abs(p2.b(2)[0]) < 1e-15);
}

TEST_CASE("project rejects grids coarser than 2K + 2") {
  const Mat s = Mat::Zero(1, 5);
  try {
    (void)project(s, 1.0, 2);
    FAIL("expected grid-too-coarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
  CHECK_NOTHROW((void)project(Mat::Zero(1, 6), 1.0, 2));
}

TEST_CASE("project round-trips sampled polynomials") {
  std::mt19937_64 rng(6);
  for (int K = 0; K <= 9; ++K) {
    const TrigPoly u = random_trig(rng, 2, 1.7, K);
    for (int m : {2 * K + 2, collocation_size(K), 4 * collocation_size(K)}) {
      CHECK(max_abs(project(sample(u, m), u.period(), K).coeffs() - u.coeffs()) < 1e-13);
    }
  }
}

TEST_CASE("with_degree pads and truncates; arithmetic") {
  std::mt19937_64 rng(7);
  const TrigPoly u = random_trig(rng, 2, 1.0, 3);
  const TrigPoly up = u.with_degree(5);
  CHECK(up.degree() == 5);
  CHECK(max_abs(up(0.3) - u(0.3)) < 1e-14);
  CHECK(max_abs(up.with_degree(3).coeffs() - u.coeffs()) == 0.0);
  const TrigPoly w = random_trig(rng, 2, 1.0, 5);
  CHECK(max_abs((u + w)(0.2) - (u(0.2) + w(0.2))) < 1e-14);
  CHECK(max_abs((w - u)(0.2) - (w(0.2) - u(0.2))) < 1e-14);
  CHECK(max_abs((2.0 * u)(0.2) - 2.0 * u(0.2)) < 1e-14);
}

TEST_CASE("sup_norm and sup_distance on the grid") {
  TrigPoly u(1, 2 * kPi, 1);
  u.a(1)[0] = 3.0;
  CHECK(std::abs(sup_norm(u, 8) - 3.0) < 1e-15);
  CHECK(std::abs(sup_distance(u, TrigPoly(1, 2 * kPi, 0), 8) - 3.0) < 1e-15);
}
