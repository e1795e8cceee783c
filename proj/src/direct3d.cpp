#include "twisttube/direct3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "twisttube/discretize.hpp"
#include "twisttube/errors.hpp"

namespace twisttube {

double estimate_direct_memory(const CrossSection& cs, int n_s, int cap) {
  const double n = static_cast<double>(n_s) * static_cast<double>(cs.size());
  // LOBPCG keeps about ten n-by-b blocks; b is at most 2 (cap + 1).
  const double block = std::max(8.0, 2.0 * (cap + 1));
  return estimate_3d_memory(cs, n_s) + n * block * 8.0 * 10.0;
}

DirectResult direct_spectrum(const CrossSection& cs, const TwistProfile& profile,
                             const DirectConfig& config) {
  const double s0 = profile.half_width();
  DirectResult out;
  out.h = cs.spacing();
  out.sigma = config.sigma;
  out.half_length = config.half_length > 0.0 ? config.half_length : 3.0 * s0;
  if (out.half_length < 2.0 * s0) {
    throw TruncationTooSmall(fmt::format(
        "truncation half-length {} is below 2 s0 = {}", out.half_length, 2.0 * s0));
  }
  out.n_s = config.n_s > 0 ? config.n_s
                           : static_cast<int>(std::ceil(2.0 * out.half_length / cs.spacing()));

  const double need = estimate_direct_memory(cs, out.n_s, config.cap);
  if (need > config.memory_budget_bytes) {
    throw MemoryBudgetExceeded(
        fmt::format("the 3D solve needs about {:.2f} GiB, budget is {:.2f} GiB",
                    need / (1024.0 * 1024 * 1024),
                    config.memory_budget_bytes / (1024.0 * 1024 * 1024)),
        need);
  }

  const GroundState gs = ground_state(assemble_h_beta0(cs, profile.beta0()), config.eigen);
  out.threshold = gs.energy;
  out.buffer = 10.0 * config.eigen.tol * std::max(1.0, std::abs(gs.energy));

  const SparseSymOperator h3 = assemble_3d(cs, profile, out.half_length, out.n_s);
  out.dimension = h3.dim();
  const Spectrum below = eigs_below(h3, out.threshold - out.buffer, config.cap, config.eigen);
  out.eigenvalues = below.eigenvalues;
  if (!below.empty()) {
    out.lowest = below.eigenvalues.front();
  } else {
    out.lowest = smallest_eigs(h3, 1, config.eigen).eigenvalues.front();
  }
  for (double v : out.eigenvalues) out.moment += std::pow(out.threshold - v, config.sigma);

  out.caveats.push_back(
      "truncation: Dirichlet ends raise eigenvalues, so the moment is a lower estimate");
  const double ds = 2.0 * out.half_length / (out.n_s + 1);
  if (ds > cs.spacing()) {
    out.caveats.push_back(fmt::format(
        "resolution: axial spacing {:.4g} exceeds the cross-section spacing {:.4g}", ds,
        cs.spacing()));
  }
  return out;
}

Verdict verify_inequality(const DirectResult& direct, const BoundReport& report, double floor) {
  Verdict v;
  v.moment = direct.moment;
  v.bound = report.bound;
  v.floor = floor;
  if (v.moment == 0.0) {
    v.ratio = 0.0;
  } else if (v.bound > 0.0) {
    v.ratio = v.moment / v.bound;
  } else {
    v.ratio = std::numeric_limits<double>::infinity();
  }
  if (v.moment <= v.bound) {
    v.passed = true;
    v.note = "moment does not exceed the bound";
  } else if (v.moment <= floor && v.bound <= floor) {
    v.passed = true;
    v.note = fmt::format("both sides below the floor {:.1e}", floor);
  } else {
    v.passed = false;
    v.note = "moment exceeds the bound";
  }
  return v;
}

}  // namespace twisttube
