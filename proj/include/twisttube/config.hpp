#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twisttube/geometry.hpp"

namespace twisttube {

enum class SweepAxis { ellipse_eps, ribbon_k, resolution, amplitude };

struct RunConfig {
  ShapeSpec shape = shape::Disc{};
  double h = 1.0 / 32.0;
  BoundaryTreatment boundary = BoundaryTreatment::fitted;
  // Convergence-gate spacings; empty: {2h, h}.
  std::vector<double> resolutions;

  double beta0 = 1.0;
  double amplitude = 0.0;
  double half_width = 1.0;

  double sigma = 1.5;
  std::optional<double> c;
  int n_q = 33;
  int cap = 256;

  double tol = 1e-10;
  int max_iterations = 5000;
  std::uint64_t seed = 42;

  bool direct_enabled = false;
  double direct_half_length = 0.0;  // 0: 3 s0
  int direct_n_s = 0;               // 0: ceil(2 L / h)
  int direct_cap = 64;
  double memory_budget_gib = 4.0;

  std::optional<SweepAxis> sweep_axis;
  std::vector<double> sweep_values;

  std::string output_dir = "out";
  int workers = 1;
  int verbosity = 0;

  // Harness self-test only: multiplies the computed bound.
  double test_bound_scale = 1.0;
};

// Parses YAML text; throws ConfigError with line and column on unknown keys,
// type errors and invariant violations.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::optional<SweepAxis> parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

}  // namespace twisttube
