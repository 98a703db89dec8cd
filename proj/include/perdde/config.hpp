#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "perdde/domain.hpp"
#include "perdde/spectral_solver.hpp"
#include "perdde/time_domain.hpp"

namespace perdde {

enum class SystemKind { Linear, Example };

struct ForcingSpec {
  double amplitude = 1.0;
  Vec a0;
  std::vector<Vec> cos_coeffs;
  std::vector<Vec> sin_coeffs;
};

struct DomainSpec {
  double R = 1.0;
  std::optional<double> eta;  // common hole radius
  std::vector<Hole> holes;    // explicit holes; for the example, defaults to B_eta(v_j)
  std::optional<int> chi;     // manual Euler characteristic
};

struct IntegratorSpec {
  int m = 128;
  int ode_steps = 2048;
  double blowup_bound = 1e8;
  int poincare_nodes = 8;
};

struct SamplingSpec {
  int boundary = 2048;
  int pairs = 128;
  int sup = 4096;
  double epsilon_probe = 1e-3;
};

struct RunConfig {
  SystemKind kind = SystemKind::Example;
  Mat A;
  Mat B;
  ExampleParams example;
  DomainSpec domain;
  double tau = 0.0;
  double period = 1.0;
  ForcingSpec forcing;
  MultiStartOptions solver;
  bool probe_forcing = false;
  IntegratorSpec integrator;
  SamplingSpec sampling;
  std::uint64_t seed = 0;
  int threads = 1;

  int dim() const;
};

/// Parses a JSON config; throws ConfigInvalid with the offending field path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// The config with all defaults filled in, as JSON.
nlohmann::json to_json(const RunConfig& cfg);

TrigPoly build_forcing(const RunConfig& cfg);
PuncturedBall build_domain(const RunConfig& cfg);
DelaySystem build_system(const RunConfig& cfg);
int domain_chi(const RunConfig& cfg, const PuncturedBall& dom);

}  // namespace perdde
