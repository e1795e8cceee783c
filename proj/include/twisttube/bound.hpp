#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twisttube/discretize.hpp"
#include "twisttube/eigensolve.hpp"
#include "twisttube/geometry.hpp"
#include "twisttube/profiles.hpp"

namespace twisttube {

// min{1/3, 1/(48 beta0^2 d^2)}
double gamma_beta0(double beta0, double d);

// gamma - 3c; throws InvalidC unless 0 < c < gamma/3.
double alpha_sq(double gamma, double c);

// Semiclassical constant Gamma(s+1)/(sqrt(4 pi) Gamma(s+3/2)), doubled for
// 1/2 <= sigma < 3/2. Throws SigmaOutOfRange below 1/2.
double lt_constant(double sigma);

// Sum of |lambda|^p over the negative eigenvalues.
double trace_neg_power(const std::vector<double>& eigenvalues, double p);
double trace_neg_power(const Spectrum& spectrum, double p);

// Equally spaced nodes of the composite Simpson rule; n must be odd and >= 3.
std::vector<double> simpson_nodes(double a, double b, int n);
double simpson(const std::vector<double>& values, double a, double b);

// Number of sign changes of the second difference of g, zero differences
// skipped. Used as an under-resolution heuristic.
int curvature_sign_changes(const std::vector<double>& g);

struct BoundConfig {
  double sigma = 1.5;
  std::optional<double> c;  // default gamma/6
  int n_q = 33;
  EigenOptions eigen;       // tolerance, iteration limit, seed
  int cap = 256;            // maximum negative eigenvalues per s
  // Grid spacings for the convergence gate; the two finest are compared.
  std::vector<double> resolutions;
  int workers = 1;
  // Test hook: multiplies the final bound (harness self-test only).
  double bound_scale = 1.0;
};

struct PerSRow {
  double s = 0.0;
  int n_neg = 0;
  double trace_power = 0.0;
  double lowest = 0.0;  // lowest negative eigenvalue of H(s), 0 if none
  int clamp_count = 0;
  double cap = 0.0;
};

struct ConvergenceGate {
  bool evaluated = false;
  double h_coarse = 0.0;
  double h_fine = 0.0;
  double bound_coarse = 0.0;
  double bound_fine = 0.0;
  double extrapolated = 0.0;
  double relative_difference = 0.0;
  bool passed = false;
  std::string note;
};

struct BoundReport {
  double h = 0.0;
  double sigma = 0.0;
  double c = 0.0;
  double gamma = 0.0;
  double alpha_sq = 0.0;
  double energy = 0.0;  // E, discrete threshold
  double d = 0.0;
  double lt_constant = 0.0;
  int nodes = 0;
  double ground_state_min = 0.0;
  int ground_cluster = 1;  // near-degenerate ground levels (separate wells)
  int underflow_nodes = 0; // nodes where f is numerically zero
  double angular_energy_ratio = 0.0;
  std::vector<PerSRow> per_s;
  double integral = 0.0;
  double bound = 0.0;
  Admissibility admissibility;
  bool rigorous = false;  // false: NON-RIGOROUS label
  PotentialScale potential_scale;
  int clamp_total = 0;
  double cap_max = 0.0;
  int curvature_changes = 0;
  bool quadrature_too_coarse = false;
  ConvergenceGate gate;
  std::optional<double> ribbon_lower_bound;
  std::vector<std::string> warnings;
};

// Lieb-Thirring bound on one cross section. The convergence gate is left
// unevaluated; the ShapeSpec overload below runs it.
BoundReport compute_bound(const CrossSection& cs, const TwistProfile& profile,
                          const BoundConfig& config);

// Computes at spacing h and runs the convergence gate over config.resolutions
// (reusing the h result when it appears there). Fills ribbon_lower_bound for
// ribbons.
BoundReport compute_bound(const ShapeSpec& spec, double h, const TwistProfile& profile,
                          const BoundConfig& config,
                          BoundaryTreatment treatment = BoundaryTreatment::fitted);

// Richardson comparison of two bounds with spacing ratio h_coarse/h_fine,
// assuming second order. Values both below `floor` pass trivially.
ConvergenceGate convergence_gate(double h_coarse, double bound_coarse, double h_fine,
                                 double bound_fine, double floor = 1e-12);

// (1/alpha) (4^{k+1}/pi^2)^{sigma+1/2} int mu^{sigma+1/2} (2 beta0 - mu)^{sigma+1/2} ds,
// Simpson with n_q nodes on the support.
double ribbon_lower_bound(int k, double sigma, const TwistProfile& profile, double alpha_sq,
                          int n_q = 33);

// ||A f||^2 / ||f||^2
double angular_energy_ratio(const SparseOperator& angular, const Eigen::VectorXd& f);
double angular_energy_ratio(const CrossSection& cs, const Eigen::VectorXd& f);

}  // namespace twisttube
