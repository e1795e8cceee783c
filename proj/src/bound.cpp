#include "twisttube/bound.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <fmt/format.h>

#include "twisttube/errors.hpp"
#include "twisttube/parallel.hpp"

namespace twisttube {

double gamma_beta0(double beta0, double d) {
  if (!(beta0 > 0.0) || !(d > 0.0)) {
    throw InvalidSpec(fmt::format("gamma needs beta0 > 0 and d > 0, got {} and {}", beta0, d));
  }
  return std::min(1.0 / 3.0, 1.0 / (48.0 * beta0 * beta0 * d * d));
}

double alpha_sq(double gamma, double c) {
  if (!(c > 0.0 && c < gamma / 3.0)) {
    throw InvalidC(fmt::format("c must lie in (0, gamma/3) = (0, {:.6g}), got {:.6g}",
                               gamma / 3.0, c));
  }
  return gamma - 3.0 * c;
}

double lt_constant(double sigma) {
  if (!(sigma >= 0.5)) {
    throw SigmaOutOfRange(fmt::format("sigma must be >= 1/2, got {}", sigma));
  }
  double base = 0.0;
  const double shifted = sigma - 0.5;
  if (shifted == std::floor(shifted) && shifted < 64.0) {
    // Half-integers are rational: 1/4 at sigma = 1/2, then
    // L(s+1) = L(s) (s+1)/(s+3/2). Keeps 3/16 and 5/32 exact.
    base = 0.25;
    for (double s = 0.5; s < sigma; s += 1.0) base = base * (s + 1.0) / (s + 1.5);
  } else {
    base = std::exp(std::lgamma(sigma + 1.0) - std::lgamma(sigma + 1.5)) /
           std::sqrt(4.0 * std::numbers::pi);
  }
  return sigma < 1.5 ? 2.0 * base : base;
}

double trace_neg_power(const std::vector<double>& eigenvalues, double p) {
  double sum = 0.0;
  for (double v : eigenvalues) {
    if (v < 0.0) sum += std::pow(-v, p);
  }
  return sum;
}

double trace_neg_power(const Spectrum& spectrum, double p) {
  return trace_neg_power(spectrum.eigenvalues, p);
}

std::vector<double> simpson_nodes(double a, double b, int n) {
  if (n < 3 || n % 2 == 0) {
    throw InvalidSpec(fmt::format("Simpson node count must be odd and >= 3, got {}", n));
  }
  std::vector<double> s(static_cast<std::size_t>(n));
  const double step = (b - a) / (n - 1);
  for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(j)] = a + j * step;
  s.back() = b;
  return s;
}

double simpson(const std::vector<double>& values, double a, double b) {
  const auto n = static_cast<int>(values.size());
  if (n < 3 || n % 2 == 0) {
    throw InvalidSpec(fmt::format("Simpson node count must be odd and >= 3, got {}", n));
  }
  double sum = values.front() + values.back();
  for (int j = 1; j < n - 1; ++j) sum += (j % 2 == 1 ? 4.0 : 2.0) * values[j];
  return sum * (b - a) / (3.0 * (n - 1));
}

int curvature_sign_changes(const std::vector<double>& g) {
  int changes = 0;
  int last = 0;
  for (std::size_t j = 1; j + 1 < g.size(); ++j) {
    const double d2 = g[j - 1] - 2.0 * g[j] + g[j + 1];
    const int sign = d2 > 0.0 ? 1 : (d2 < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (last != 0 && sign != last) ++changes;
    last = sign;
  }
  return changes;
}

double angular_energy_ratio(const SparseOperator& angular, const Eigen::VectorXd& f) {
  const double ff = f.squaredNorm();
  if (!(ff > 0.0)) throw InvalidSpec("angular energy ratio of a zero vector");
  return (angular.matrix * f).squaredNorm() / ff;
}

double angular_energy_ratio(const CrossSection& cs, const Eigen::VectorXd& f) {
  return angular_energy_ratio(skew_part(assemble_angular(cs)), f);
}

double ribbon_lower_bound(int k, double sigma, const TwistProfile& profile, double alpha_sq,
                          int n_q) {
  if (k < 1) throw InvalidSpec(fmt::format("ribbon level must be >= 1, got {}", k));
  if (!(alpha_sq > 0.0)) throw InvalidC(fmt::format("alpha^2 must be positive, got {}", alpha_sq));
  const double p = sigma + 0.5;
  const double s0 = profile.half_width();
  std::vector<double> g;
  for (double s : simpson_nodes(-s0, s0, n_q)) {
    const double m = profile.mu(s);
    const double k2 = m * (2.0 * profile.beta0() - m);
    g.push_back(k2 > 0.0 ? std::pow(k2, p) : 0.0);
  }
  const double geometric = std::pow(std::pow(4.0, k + 1) / (std::numbers::pi * std::numbers::pi), p);
  return geometric * simpson(g, -s0, s0) / std::sqrt(alpha_sq);
}

ConvergenceGate convergence_gate(double h_coarse, double bound_coarse, double h_fine,
                                 double bound_fine, double floor) {
  ConvergenceGate gate;
  gate.evaluated = true;
  gate.h_coarse = h_coarse;
  gate.h_fine = h_fine;
  gate.bound_coarse = bound_coarse;
  gate.bound_fine = bound_fine;
  const double r2 = (h_coarse / h_fine) * (h_coarse / h_fine);
  gate.extrapolated = bound_fine + (bound_fine - bound_coarse) / (r2 - 1.0);
  if (std::abs(bound_fine) <= floor && std::abs(bound_coarse) <= floor) {
    gate.relative_difference = 0.0;
    gate.passed = true;
    gate.note = fmt::format("both bounds below the floor {:.1e}", floor);
    return gate;
  }
  gate.relative_difference =
      std::abs(bound_fine - gate.extrapolated) / std::max(std::abs(gate.extrapolated), floor);
  gate.passed = gate.relative_difference < 0.05;
  gate.note = gate.passed ? "Richardson difference below 5%"
                          : "Richardson difference exceeds 5%; refine the grid";
  return gate;
}

BoundReport compute_bound(const CrossSection& cs, const TwistProfile& profile,
                          const BoundConfig& config) {
  BoundReport rep;
  rep.h = cs.spacing();
  rep.sigma = config.sigma;
  rep.nodes = static_cast<int>(cs.size());
  rep.lt_constant = lt_constant(config.sigma);
  rep.d = radius(cs);
  rep.gamma = gamma_beta0(profile.beta0(), rep.d);
  rep.c = config.c.value_or(rep.gamma / 6.0);
  rep.alpha_sq = alpha_sq(rep.gamma, rep.c);
  rep.admissibility = check_admissibility(profile, rep.c, rep.gamma, rep.alpha_sq);
  rep.rigorous = rep.admissibility.theorem1_ok;
  if (!rep.rigorous) {
    rep.warnings.push_back("NON-RIGOROUS: the profile and c lie outside the admissible window");
  }
  rep.warnings.push_back(
      "boundary values of Af/f are clamped (implementation policy); see the convergence gate");

  const CrossSectionOperators ops = assemble_cross_section_operators(cs, profile.beta0());
  EigenOptions eig = config.eigen;
  const GroundState gs = ground_state(ops.h_beta0, eig);
  rep.energy = gs.energy;
  rep.ground_state_min = gs.min_value;
  rep.ground_cluster = gs.cluster_size;
  rep.underflow_nodes = gs.underflow_count;
  if (gs.cluster_size > 1) {
    rep.warnings.push_back(fmt::format(
        "ground level is a cluster of {} near-degenerate states; f is their symmetric combination",
        gs.cluster_size));
  }
  rep.angular_energy_ratio = angular_energy_ratio(ops.angular_skew, gs.f);
  rep.potential_scale = potential_scale(cs, ops.angular_skew, gs.f);

  const double s0 = profile.half_width();
  const std::vector<double> nodes = simpson_nodes(-s0, s0, config.n_q);
  rep.per_s.resize(nodes.size());
  eig.initial_guess = gs.low.eigenvectors;
  const double power = config.sigma + 0.5;

  parallel_for(static_cast<int>(nodes.size()), config.workers, [&](int j) {
    PerSRow row;
    row.s = nodes[static_cast<std::size_t>(j)];
    const PotentialField v = effective_potential(cs, ops.angular_skew, gs.f, profile, rep.alpha_sq,
                                                 row.s, rep.potential_scale);
    row.clamp_count = v.clamp_count;
    row.cap = v.cap;
    if (v.values.isZero(0.0)) {
      // H(s) = h - E exactly: no negative spectrum by definition of E.
      rep.per_s[static_cast<std::size_t>(j)] = row;
      return;
    }
    const SparseSymOperator h_s = assemble_H_of_s(ops.h_beta0, v.values, rep.energy);
    const Spectrum neg = negative_eigs(h_s, config.cap, eig);
    row.n_neg = static_cast<int>(neg.size());
    row.trace_power = trace_neg_power(neg, power);
    row.lowest = neg.empty() ? 0.0 : neg.eigenvalues.front();
    rep.per_s[static_cast<std::size_t>(j)] = row;
  });

  std::vector<double> g;
  g.reserve(rep.per_s.size());
  for (const auto& row : rep.per_s) {
    g.push_back(row.trace_power);
    rep.clamp_total += row.clamp_count;
    rep.cap_max = std::max(rep.cap_max, row.cap);
  }
  rep.integral = simpson(g, -s0, s0);
  rep.bound = std::pow(rep.alpha_sq, config.sigma) * rep.lt_constant * rep.integral *
              config.bound_scale;
  rep.curvature_changes = curvature_sign_changes(g);
  rep.quadrature_too_coarse = rep.curvature_changes > config.n_q / 2;
  if (rep.quadrature_too_coarse) {
    rep.warnings.push_back(fmt::format(
        "quadrature may be under-resolved: {} curvature sign changes over {} nodes",
        rep.curvature_changes, config.n_q));
  }
  rep.gate.note = "not evaluated";
  return rep;
}

BoundReport compute_bound(const ShapeSpec& spec, double h, const TwistProfile& profile,
                          const BoundConfig& config, BoundaryTreatment treatment) {
  BoundReport rep = compute_bound(build_cross_section(spec, h, treatment), profile, config);
  if (const auto* ribbon = std::get_if<shape::Ribbon>(&spec)) {
    rep.ribbon_lower_bound =
        ribbon_lower_bound(ribbon->level, config.sigma, profile, rep.alpha_sq, config.n_q);
  }

  std::vector<double> hs = config.resolutions;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  if (hs.size() < 2) {
    rep.gate.note = "not evaluated: fewer than two resolutions configured";
    return rep;
  }
  const double h_coarse = hs[hs.size() - 2];
  const double h_fine = hs.back();
  // c is pinned so that every resolution uses the same alpha^2 window.
  BoundConfig sub = config;
  sub.c = rep.c;
  const auto bound_at = [&](double hh) {
    if (hh == h) return rep.bound;
    return compute_bound(build_cross_section(spec, hh, treatment), profile, sub).bound;
  };
  const double b_coarse = bound_at(h_coarse);
  const double b_fine = bound_at(h_fine);
  rep.gate = convergence_gate(h_coarse, b_coarse, h_fine, b_fine);
  if (!rep.gate.passed) rep.warnings.push_back("convergence gate failed: " + rep.gate.note);
  return rep;
}

}  // namespace twisttube
