#pragma once

#include <cstdint>
#include <vector>

#include "perdde/trig_poly.hpp"

namespace perdde {

/// Radical inverse of `index` in the given prime base.
double radical_inverse(std::uint64_t index, int base);

/// Point `index` of the Halton sequence in [0,1)^dim (dim <= 64). Index 0 is skipped.
Vec halton(std::uint64_t index, int dim);

/// `count` deterministic unit vectors in R^dim: both signs for dim 1, equispaced
/// angles for dim 2, a Fibonacci lattice for dim 3, normalised Halton points beyond.
std::vector<Vec> sphere_points(int dim, int count);

}  // namespace perdde
