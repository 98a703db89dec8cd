#include "perdde/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "perdde/error.hpp"
#include "perdde/sampling.hpp"

namespace perdde {

namespace {

// Offsets y - x for the pair condition. The set is fixed for a given
// (dim, count, diameter) and sorted by length, so the offsets retained for a
// radius r are a prefix, nested in r.
std::vector<Vec> pair_offsets(int dim, int count, double diameter) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; static_cast<int>(out.size()) < count; ++i) {
    const Vec h = halton(i, dim + 1);
    Vec w(dim);
    if (dim == 1) {
      w[0] = h[1] < 0.5 ? -1.0 : 1.0;
    } else {
      w = 2.0 * h.tail(dim).array() - 1.0;
      const double n = w.norm();
      if (n < 1e-3 || n > 1.0) continue;
      w /= n;
    }
    // Log-uniform radii between diam * 2^-40 and diam.
    out.push_back(diameter * std::exp2(-40.0 * h[0]) * w);
  }
  std::sort(out.begin(), out.end(), [](const Vec& l, const Vec& r) { return l.norm() < r.norm(); });
  return out;
}

}  // namespace

PuncturedBall PuncturedBall::with_common_radius(int dim, double R, const std::vector<Vec>& centers, double eta) {
  PuncturedBall dom;
  dom.dim = dim;
  dom.R = R;
  for (const auto& c : centers) dom.holes.push_back({c, eta});
  dom.validate();
  return dom;
}

void PuncturedBall::validate() const {
  if (dim < 1 || !(R > 0.0)) throw Error(ErrorCode::ParameterViolation, "domain needs N >= 1 and R > 0");
  for (std::size_t i = 0; i < holes.size(); ++i) {
    const Hole& h = holes[i];
    if (h.center.size() != dim || !(h.eta > 0.0)) {
      throw Error(ErrorCode::ParameterViolation, "hole " + std::to_string(i + 1) + " has wrong dimension or radius");
    }
    if (!(h.center.norm() + h.eta < R)) {
      throw Error(ErrorCode::ParameterViolation, "hole " + std::to_string(i + 1) + " is not strictly inside B_R");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (!((h.center - holes[j].center).norm() > h.eta + holes[j].eta)) {
        throw Error(ErrorCode::ParameterViolation,
                    "holes " + std::to_string(j + 1) + " and " + std::to_string(i + 1) + " overlap");
      }
    }
  }
}

Classification contains(const PuncturedBall& dom, const Vec& x) {
  const double tol = dom.geometric_tolerance();
  const double r = x.norm();
  if (r > dom.R + tol) return {Region::Exterior, -1};
  if (std::abs(r - dom.R) <= tol) return {Region::OuterBoundary, -1};
  for (int j = 0; j < dom.hole_count(); ++j) {
    const Hole& h = dom.holes[static_cast<std::size_t>(j)];
    const double d = (x - h.center).norm() - h.eta;
    if (std::abs(d) <= tol) return {Region::HoleBoundary, j};
    if (d < 0.0) return {Region::Exterior, j};
  }
  return {Region::Interior, -1};
}

Vec normal(const PuncturedBall& dom, const Vec& x) {
  const Classification c = contains(dom, x);
  if (c.region == Region::OuterBoundary) return x / x.norm();
  if (c.region == Region::HoleBoundary) {
    const Vec r = x - dom.holes[static_cast<std::size_t>(c.hole)].center;
    return -r / r.norm();
  }
  throw Error(ErrorCode::NotOnBoundary, "point is not on the boundary of the domain");
}

int euler_characteristic(const PuncturedBall& dom) {
  const int parity = dom.dim % 2 == 0 ? 1 : -1;
  return 1 - dom.hole_count() * parity;
}

double distance_to_boundary(const PuncturedBall& dom, const Vec& x) {
  double d = dom.R - x.norm();
  for (const auto& h : dom.holes) d = std::min(d, (x - h.center).norm() - h.eta);
  return d;
}

std::vector<BoundarySample> boundary_samples(const PuncturedBall& dom, int per_component) {
  std::vector<BoundarySample> out;
  const auto dirs = sphere_points(dom.dim, per_component);
  for (const auto& s : dirs) out.push_back({dom.R * s, s, 0});
  for (int j = 0; j < dom.hole_count(); ++j) {
    const Hole& h = dom.holes[static_cast<std::size_t>(j)];
    for (const auto& s : dirs) out.push_back({h.center + h.eta * s, -s, j + 1});
  }
  return out;
}

double sup_norm_estimate(const Field& g, const PuncturedBall& dom, int samples) {
  if (samples < 1) throw Error(ErrorCode::Precondition, "sup estimate needs at least one sample");
  const double clip = dom.geometric_tolerance();
  auto clipped_inside = [&](const Vec& x) {
    if (x.norm() > dom.R) return false;
    for (const auto& h : dom.holes) {
      if ((x - h.center).norm() < h.eta + clip) return false;
    }
    return true;
  };
  double sup = 0.0;
  auto visit = [&](const Vec& x, const Vec& y) {
    const double v = g(x, y).norm();
    if (std::isfinite(v)) sup = std::max(sup, v);
  };

  const int n = dom.dim;
  int accepted = 0;
  const std::uint64_t max_tries = static_cast<std::uint64_t>(samples) * 1000;
  for (std::uint64_t i = 0; accepted < samples && i < max_tries; ++i) {
    const Vec h = halton(i, 2 * n);
    const Vec x = dom.R * (2.0 * h.head(n).array() - 1.0);
    const Vec y = dom.R * (2.0 * h.tail(n).array() - 1.0);
    if (!clipped_inside(x) || !clipped_inside(y)) continue;
    visit(x, y);
    ++accepted;
  }

  // Boundary-to-boundary pairs, where sup |g| typically sits. Points are pushed
  // inward by the clip distance.
  auto bnd = boundary_samples(dom, std::max(8, samples / 16));
  for (auto& b : bnd) b.point -= clip * b.normal;
  const std::size_t m = bnd.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t shift : {std::size_t{0}, m / 3, m / 2, (2 * m) / 3}) {
      visit(bnd[i].point, bnd[(i + shift) % m].point);
    }
  }
  return 1.1 * sup;
}

InwardReport inward_margins(const Field& g, const PuncturedBall& dom, double pair_radius, double sup_norm,
                            const InwardOptions& opts) {
  InwardReport rep;
  rep.sup_norm = sup_norm;
  rep.pair_radius = pair_radius;
  rep.tol_margin = 1e-6 * sup_norm;
  rep.weak_margin = -std::numeric_limits<double>::infinity();
  rep.strong_margin = -std::numeric_limits<double>::infinity();
  rep.component_margins.assign(static_cast<std::size_t>(dom.hole_count() + 1),
                               -std::numeric_limits<double>::infinity());

  const auto offsets = pair_offsets(dom.dim, opts.pair_samples, dom.diameter());
  const auto retained = static_cast<std::size_t>(
      std::upper_bound(offsets.begin(), offsets.end(), pair_radius,
                       [](double r, const Vec& o) { return r < o.norm(); }) -
      offsets.begin());

  const auto bnd = boundary_samples(dom, opts.boundary_samples);
  rep.boundary_points = bnd.size();
  for (const auto& b : bnd) {
    auto& comp = rep.component_margins[static_cast<std::size_t>(b.component)];
    const double weak = g(b.point, b.point).dot(b.normal);
    if (weak > rep.weak_margin) {
      rep.weak_margin = weak;
      rep.weak_worst_x = b.point;
    }
    auto strong_visit = [&](const Vec& y, double m) {
      ++rep.pairs_checked;
      comp = std::max(comp, m);
      if (m > rep.strong_margin) {
        rep.strong_margin = m;
        rep.strong_worst_x = b.point;
        rep.strong_worst_y = y;
      }
    };
    strong_visit(b.point, weak);
    for (std::size_t i = 0; i < retained; ++i) {
      const Vec y = b.point + offsets[i];
      if (!contains(dom, y).in_closure()) continue;
      const Vec gy = g(b.point, y);
      if (!gy.allFinite()) continue;
      strong_visit(y, gy.dot(b.normal));
    }
  }
  rep.weak_pass = rep.weak_margin < -rep.tol_margin;
  rep.strong_pass = rep.strong_margin < -rep.tol_margin;
  rep.pass = rep.weak_pass && rep.strong_pass;
  return rep;
}

InwardReport verify_inward(const DelaySystem& sys, const PuncturedBall& dom, const InwardOptions& opts) {
  const double sup = sup_norm_estimate(sys.g, dom, opts.sup_samples);
  return inward_margins(sys.g, dom, sys.tau * sup, sup, opts);
}

TauStar tau_star(const DelaySystem& sys, const PuncturedBall& dom, double epsilon_probe, const InwardOptions& opts) {
  TauStar out;
  out.sup_norm = sup_norm_estimate(sys.g, dom, opts.sup_samples);
  if (!inward_margins(sys.g, dom, 0.0, out.sup_norm, opts).weak_pass) {
    throw Error(ErrorCode::WeakConditionFails, "the field g(x,x) is not inward pointing on the sampled boundary");
  }
  double lo = 0.0;
  double hi = dom.diameter();
  if (inward_margins(sys.g, dom, hi, out.sup_norm, opts).strong_pass) {
    lo = hi;
  } else {
    while (hi - lo > epsilon_probe * dom.diameter()) {
      const double mid = 0.5 * (lo + hi);
      if (inward_margins(sys.g, dom, mid, out.sup_norm, opts).strong_pass) lo = mid;
      else hi = mid;
    }
  }
  out.epsilon = lo;
  out.tau_star = out.sup_norm > 0.0 ? lo / out.sup_norm : std::numeric_limits<double>::infinity();
  return out;
}

void ExampleParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ParameterViolation, msg); };
  if (N < 1) fail("N must be positive");
  if (J < 1) fail("J must be nonzero");
  if (J0 < 0 || J0 > J) fail("need 0 <= J0 <= J");
  if (!(d > 0.0)) fail("d must be positive");
  if (a.size() != static_cast<std::size_t>(J) || alpha.size() != static_cast<std::size_t>(J) ||
      v.size() != static_cast<std::size_t>(J)) {
    fail("a, alpha and v need exactly J entries");
  }
  for (int j = 0; j < J; ++j) {
    const auto i = static_cast<std::size_t>(j);
    if (!(a[i] > 0.0)) fail("a_" + std::to_string(j + 1) + " must be positive");
    if (!(alpha[i] > 2.0)) fail("alpha_" + std::to_string(j + 1) + " must exceed 2");
    if (v[i].size() != N) fail("v_" + std::to_string(j + 1) + " has wrong dimension");
    if (v[i].norm() == 0.0) fail("v_" + std::to_string(j + 1) + " must be nonzero");
    for (int k = 0; k < j; ++k) {
      if ((v[i] - v[static_cast<std::size_t>(k)]).norm() == 0.0) fail("centers v_j must be pairwise different");
    }
  }
}

namespace {

Vec singular_term(const Vec& z, double alpha) { return z / std::pow(z.norm(), alpha); }

Mat singular_term_jacobian(const Vec& z, double alpha) {
  const double r = z.norm();
  const auto n = z.size();
  return Mat::Identity(n, n) / std::pow(r, alpha) - alpha * (z * z.transpose()) / std::pow(r, alpha + 2.0);
}

}  // namespace

Field example_field(const ExampleParams& p) {
  p.validate();
  return [p](const Vec& x, const Vec& y) -> Vec {
    Vec sum = Vec::Zero(p.N);
    for (int j = 0; j < p.J; ++j) {
      const auto i = static_cast<std::size_t>(j);
      const Vec& arg = j < p.J0 ? x : y;
      sum += p.a[i] * singular_term(arg - p.v[i], p.alpha[i]);
    }
    return -p.d * x + y.squaredNorm() * sum;
  };
}

DelaySystem example_system(const ExampleParams& params, const PuncturedBall& dom, double tau, double period,
                           std::optional<TrigPoly> forcing) {
  params.validate();
  dom.validate();
  if (dom.dim != params.N || dom.hole_count() != params.J) {
    throw Error(ErrorCode::ParameterViolation, "domain must have one hole per center v_j");
  }
  for (int j = 0; j < params.J; ++j) {
    const auto i = static_cast<std::size_t>(j);
    if ((dom.holes[i].center - params.v[i]).norm() > 1e-12 * (1.0 + params.v[i].norm())) {
      throw Error(ErrorCode::ParameterViolation, "hole " + std::to_string(j + 1) + " is not centered at v_j");
    }
  }

  const ExampleParams p = params;
  SystemSpec spec;
  spec.dim = p.N;
  spec.g = example_field(p);
  spec.dx_g = [p](const Vec& x, const Vec& y) -> Mat {
    Mat out = -p.d * Mat::Identity(p.N, p.N);
    for (int j = 0; j < p.J0; ++j) {
      const auto i = static_cast<std::size_t>(j);
      out += y.squaredNorm() * p.a[i] * singular_term_jacobian(x - p.v[i], p.alpha[i]);
    }
    return out;
  };
  spec.dy_g = [p](const Vec& x, const Vec& y) -> Mat {
    Vec sum = Vec::Zero(p.N);
    Mat out = Mat::Zero(p.N, p.N);
    for (int j = 0; j < p.J; ++j) {
      const auto i = static_cast<std::size_t>(j);
      const Vec& arg = j < p.J0 ? x : y;
      sum += p.a[i] * singular_term(arg - p.v[i], p.alpha[i]);
      if (j >= p.J0) out += y.squaredNorm() * p.a[i] * singular_term_jacobian(y - p.v[i], p.alpha[i]);
    }
    return out + 2.0 * sum * y.transpose();
  };
  spec.admissible = [p](const Vec& x, const Vec& y) {
    for (int j = 0; j < p.J; ++j) {
      const Vec& arg = j < p.J0 ? x : y;
      if ((arg - p.v[static_cast<std::size_t>(j)]).norm() <= 1e-12) return false;
    }
    return true;
  };
  spec.tau = tau;
  spec.period = period;
  spec.equilibrium = Vec::Zero(p.N);
  spec.forcing = std::move(forcing);

  const Vec zero = Vec::Zero(p.N);
  if ((spec.g(zero, zero).array() != 0.0).any()) {
    throw Error(ErrorCode::ParameterViolation, "g(0,0) is not exactly zero");
  }
  const auto [dx, dy] = fd_jacobians(spec.g, zero, zero);
  if ((dx + p.d * Mat::Identity(p.N, p.N)).cwiseAbs().maxCoeff() > 1e-6 || dy.cwiseAbs().maxCoeff() > 1e-6) {
    throw Error(ErrorCode::ParameterViolation, "finite-difference Jacobians at 0 differ from (-dI, 0)");
  }
  return make_delay_system(std::move(spec));
}

}  // namespace perdde
