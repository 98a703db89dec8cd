#pragma once

#include <cstddef>
#include <vector>

#include "perdde/delay_system.hpp"

namespace perdde {

struct Hole {
  Vec center;
  double eta = 0.0;
};

/// Omega = B_R(0) minus the closed balls B_eta_j(v_j).
struct PuncturedBall {
  int dim = 0;
  double R = 1.0;
  std::vector<Hole> holes;

  /// Builds a domain whose holes share one radius.
  static PuncturedBall with_common_radius(int dim, double R, const std::vector<Vec>& centers, double eta);

  int hole_count() const noexcept { return static_cast<int>(holes.size()); }
  double diameter() const noexcept { return 2.0 * R; }
  double geometric_tolerance() const noexcept { return 1e-9 * R; }
  /// Throws ParameterViolation unless the holes are pairwise disjoint and strictly inside B_R.
  void validate() const;
};

enum class Region { Interior, Exterior, OuterBoundary, HoleBoundary };

struct Classification {
  Region region = Region::Interior;
  int hole = -1;  // set for HoleBoundary (and for Exterior points inside a hole)

  bool in_closure() const noexcept { return region != Region::Exterior; }
};

Classification contains(const PuncturedBall& dom, const Vec& x);

/// Outer unit normal of Omega at a boundary point; throws NotOnBoundary.
Vec normal(const PuncturedBall& dom, const Vec& x);

/// Euler characteristic of the ball minus J disjoint balls: 1 - J (-1)^N.
int euler_characteristic(const PuncturedBall& dom);

/// Signed distance from x to the boundary (positive inside).
double distance_to_boundary(const PuncturedBall& dom, const Vec& x);

struct BoundarySample {
  Vec point;
  Vec normal;
  int component = 0;  // 0 = outer sphere, j + 1 = hole j
};

/// `per_component` deterministic points on each boundary component.
std::vector<BoundarySample> boundary_samples(const PuncturedBall& dom, int per_component);

/// Sampled sup of |g| over closure(Omega) x closure(Omega) plus a 10% margin.
double sup_norm_estimate(const Field& g, const PuncturedBall& dom, int samples);

struct InwardOptions {
  int boundary_samples = 2048;  // per boundary component
  int pair_samples = 128;       // offsets y - x tried per boundary point
  int sup_samples = 4096;
};

struct InwardReport {
  double sup_norm = 0.0;
  double pair_radius = 0.0;  // tau * sup_norm
  double tol_margin = 0.0;
  double weak_margin = 0.0;    // worst <G(x), nu(x)>
  double strong_margin = 0.0;  // worst <g(x, y), nu(x)> over sampled pairs
  std::vector<double> component_margins;  // strong margin per boundary component
  Vec weak_worst_x;
  Vec strong_worst_x;
  Vec strong_worst_y;
  bool weak_pass = false;
  bool strong_pass = false;
  bool pass = false;
  std::size_t boundary_points = 0;
  std::size_t pairs_checked = 0;
};

/// Sampled check of the inward-pointing conditions: <g(x,x), nu(x)> < 0 on the
/// boundary, and <g(x,y), nu(x)> < 0 for boundary x and y in closure(Omega)
/// with |y - x| <= tau * sup|g|. Evidence, not proof.
InwardReport verify_inward(const DelaySystem& sys, const PuncturedBall& dom, const InwardOptions& opts = {});

/// Same check with an explicit pair radius, and a precomputed sup estimate.
InwardReport inward_margins(const Field& g, const PuncturedBall& dom, double pair_radius, double sup_norm,
                            const InwardOptions& opts = {});

struct TauStar {
  double epsilon = 0.0;
  double sup_norm = 0.0;
  double tau_star = 0.0;
};

/// Largest sampled epsilon for which the pair condition holds, found by
/// bisection to relative resolution `epsilon_probe`, divided by the sup estimate.
/// Throws WeakConditionFails when the boundary condition itself fails.
TauStar tau_star(const DelaySystem& sys, const PuncturedBall& dom, double epsilon_probe = 1e-3,
                 const InwardOptions& opts = {});

struct ExampleParams {
  int N = 2;
  int J = 2;
  int J0 = 2;
  double d = 1.0;
  std::vector<double> a;
  std::vector<double> alpha;
  std::vector<Vec> v;

  /// Throws ParameterViolation on any constraint failure.
  void validate() const;
};

/// g(x,y) = -d x + |y|^2 ( sum_{j<=J0} a_j (x-v_j)/|x-v_j|^alpha_j + sum_{j>J0} a_j (y-v_j)/|y-v_j|^alpha_j ).
Field example_field(const ExampleParams& params);

/// Builds the singular example system around the equilibrium 0 and checks
/// g(0,0) = 0 and the Jacobians -dI, 0 by finite differences.
DelaySystem example_system(const ExampleParams& params, const PuncturedBall& dom, double tau, double period,
                           std::optional<TrigPoly> forcing = std::nullopt);

}  // namespace perdde
