#pragma once

#include <Eigen/Core>

#include "twisttube/geometry.hpp"
#include "twisttube/profiles.hpp"
#include "twisttube/sparse.hpp"

namespace twisttube {

// Boundary fractions below this are raised to it in the Laplacian closure,
// bounding the diagonal by (4 + 4/kMinBoundaryFraction)/h^2.
inline constexpr double kMinBoundaryFraction = 0.01;

// 5-point Dirichlet Laplacian. A link leaving the mask contributes
// (1/theta - 1)/h^2 to the diagonal instead of a neighbour entry, theta
// being the boundary fraction of the link. Symmetric by construction.
SparseSymOperator assemble_laplacian(const CrossSection& cs);

// Angular derivative t2 d/dt3 - t3 d/dt2. Central differences on interior
// links, so A is antisymmetric away from the boundary; an exterior neighbour
// is replaced by the zero boundary value at distance theta h.
SparseOperator assemble_angular(const CrossSection& cs);

// (A - A^T)/2. Equal to A on rows away from the boundary. Used wherever the
// continuum argument integrates by parts (the potential and the angular
// energy), since f^T S S f = -||S f||^2 holds exactly for skew S.
SparseOperator skew_part(const SparseOperator& angular);

// L + beta0^2 A^T A
SparseSymOperator assemble_h_beta0(const CrossSection& cs, double beta0);
SparseSymOperator assemble_h_beta0(const SparseSymOperator& laplacian,
                                   const SparseOperator& angular, double beta0);

// Cross-section operators reused across every s of a sweep.
struct CrossSectionOperators {
  SparseSymOperator laplacian;
  SparseOperator angular;
  SparseOperator angular_skew;
  SparseSymOperator h_beta0;
  double beta0 = 0.0;
};

CrossSectionOperators assemble_cross_section_operators(const CrossSection& cs, double beta0);

// Regularisation statistics shared by every s of a sweep: 99th percentiles
// of |Af|/f and |A(Af)|/f over nodes at least 2h inside the boundary
// (numerically zero entries of f skipped).
struct PotentialScale {
  double ratio_q99 = 0.0;
  double second_ratio_q99 = 0.0;
  int sample_count = 0;
  // Fewer than max(100, 10%) deep nodes (thin shapes): all nodes sampled.
  bool used_all_nodes = false;
};

PotentialScale potential_scale(const CrossSection& cs, const SparseOperator& angular,
                               const Eigen::VectorXd& f);

struct PotentialField {
  Eigen::VectorXd values;
  double cap = 0.0;
  int clamp_count = 0;
  int underflow_count = 0;  // nodes where f is numerically zero; V = 0 there
};

// V(s,t) = -(1/alpha^2) (mu'(s) (Af)/f - mu(s)(2 beta0 - mu(s)) (A(Af))/f),
// with each ratio clamped at its own 99th percentile, so |V| never exceeds
// cap = (|mu'| q1 + mu(2 beta0 - mu) q2) / alpha^2. `angular` is normally the
// skew part of A.
// Throws NonPositiveGroundState when f has an entry below -t (see
// underflow_threshold); entries in [-t, t] get V = 0.
PotentialField effective_potential(const CrossSection& cs, const SparseOperator& angular,
                                   const Eigen::VectorXd& f, const TwistProfile& profile,
                                   double alpha_sq, double s, const PotentialScale& scale);
PotentialField effective_potential(const CrossSection& cs, const Eigen::VectorXd& f,
                                   const TwistProfile& profile, double alpha_sq, double s);

// h_beta0 + diag(V) - E I
SparseSymOperator assemble_H_of_s(const SparseSymOperator& h_beta0, const Eigen::VectorXd& potential,
                                  double threshold);
SparseSymOperator assemble_H_of_s(const CrossSection& cs, double beta0, const Eigen::VectorXd& f,
                                  double threshold, const TwistProfile& profile, double alpha_sq,
                                  double s);

// Axial grid of the truncated tube: n_s interior nodes on (-L, L) with
// Dirichlet ends, spacing 2L/(n_s+1).
struct AxialGrid {
  double half_length = 0.0;
  int nodes = 0;
  double spacing() const { return 2.0 * half_length / (nodes + 1); }
  double position(int m) const { return -half_length + (m + 1) * spacing(); }
};

// Rough peak memory of assemble_3d in bytes.
double estimate_3d_memory(const CrossSection& cs, int n_s);

// I_s (x) L + B^T B with B = D_s (x) I + diag(beta0 - mu(s_m)) (x) A and D_s
// the forward difference with Dirichlet ends. Index = m * n_omega + k.
// Throws TruncationTooSmall if half_length <= s0, InvalidSpec if n_s < 16.
SparseSymOperator assemble_3d(const CrossSection& cs, const TwistProfile& profile,
                              double half_length, int n_s);

namespace detail {
// Same form with a constant twist velocity (including zero), which a
// TwistProfile cannot express.
SparseSymOperator assemble_3d_constant_twist(const CrossSection& cs, double velocity,
                                             double half_length, int n_s);
}  // namespace detail

}  // namespace twisttube
