#pragma once

#include <string>
#include <vector>

#include "twisttube/bound.hpp"
#include "twisttube/eigensolve.hpp"
#include "twisttube/geometry.hpp"
#include "twisttube/profiles.hpp"

namespace twisttube {

struct DirectConfig {
  double half_length = 0.0;  // 0: 3 s0
  int n_s = 0;               // 0: ceil(2 L / h)
  int cap = 64;
  double sigma = 1.5;
  double memory_budget_bytes = 4.0 * 1024 * 1024 * 1024;
  EigenOptions eigen;
};

struct DirectResult {
  double h = 0.0;
  double half_length = 0.0;
  int n_s = 0;
  int dimension = 0;
  double threshold = 0.0;  // discrete E of h_beta0 at the same h
  double buffer = 0.0;     // states count only below threshold - buffer
  double sigma = 0.0;
  double lowest = 0.0;     // lowest computed eigenvalue of the 3D operator
  std::vector<double> eigenvalues;  // below threshold - buffer, ascending
  double moment = 0.0;              // sum (E - lambda)^sigma
  std::vector<std::string> caveats;
};

// Spectrum of the truncated straightened operator below E. Dirichlet ends
// raise eigenvalues, so the moment underestimates the infinite-tube value.
// Throws TruncationTooSmall (L < 2 s0), MemoryBudgetExceeded, CapExceeded.
DirectResult direct_spectrum(const CrossSection& cs, const TwistProfile& profile,
                             const DirectConfig& config);

// Peak bytes of assembly plus the eigensolver block.
double estimate_direct_memory(const CrossSection& cs, int n_s, int cap);

struct Verdict {
  bool passed = false;
  double moment = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  // moment / bound, 0 when the moment vanishes
  double floor = 0.0;
  std::string note;
};

// PASS when moment <= bound, or when both are below `floor`.
Verdict verify_inequality(const DirectResult& direct, const BoundReport& report,
                          double floor = 1e-12);

}  // namespace twisttube
