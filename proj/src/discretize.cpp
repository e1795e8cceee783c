#include "twisttube/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "twisttube/eigensolve.hpp"
#include "twisttube/errors.hpp"

namespace twisttube {

namespace {

// Returns the underflow threshold t; entries of f in [-t, t] are numerically zero.
double require_positive(const CrossSection& cs, const Eigen::VectorXd& f) {
  if (f.size() != static_cast<Eigen::Index>(cs.size())) {
    throw InvalidSpec("ground state length does not match the cross section");
  }
  const double t = underflow_threshold(f);
  const double min_f = f.minCoeff();
  if (!(t > 0.0) || min_f < -t) {
    throw NonPositiveGroundState(
        fmt::format("ground state has a negative node value (min f = {:.3e})", min_f), min_f);
  }
  return t;
}

SparseSymOperator assemble_3d_impl(const CrossSection& cs,
                                   const std::function<double(double)>& twist_velocity,
                                   double half_length, int n_s) {
  if (n_s < 16) throw InvalidSpec(fmt::format("n_s must be at least 16, got {}", n_s));
  const AxialGrid axis{half_length, n_s};
  const double ds = axis.spacing();
  const int n_omega = static_cast<int>(cs.size());
  const SparseSymOperator lap = assemble_laplacian(cs);
  const SparseOperator ang = assemble_angular(cs);
  const auto& aptr = ang.matrix.row_ptr();
  const auto& aidx = ang.matrix.col_idx();
  const auto& aval = ang.matrix.values();

  // B has one row block per axial edge e = 0..n_s, between nodes e-1 and e.
  const int n = n_s * n_omega;
  TripletAccumulator b((n_s + 1) * n_omega, n);
  b.reserve(static_cast<std::size_t>(n_s + 1) * n_omega * 6);
  for (int e = 0; e <= n_s; ++e) {
    const double velocity = e >= 1 ? twist_velocity(axis.position(e - 1)) : 0.0;
    for (int k = 0; k < n_omega; ++k) {
      const int row = e * n_omega + k;
      if (e >= 1) {
        b.add(row, (e - 1) * n_omega + k, -1.0 / ds);
        if (velocity != 0.0) {
          for (std::int64_t q = aptr[k]; q < aptr[k + 1]; ++q) {
            b.add(row, (e - 1) * n_omega + aidx[q], velocity * aval[q]);
          }
        }
      }
      if (e < n_s) b.add(row, e * n_omega + k, 1.0 / ds);
    }
  }
  const CsrMatrix btb = gram(b.build());

  TripletAccumulator blocks(n, n);
  blocks.reserve(static_cast<std::size_t>(n_s) * lap.matrix().nonzeros());
  const auto& lptr = lap.matrix().row_ptr();
  const auto& lidx = lap.matrix().col_idx();
  const auto& lval = lap.matrix().values();
  for (int m = 0; m < n_s; ++m) {
    for (int k = 0; k < n_omega; ++k) {
      for (std::int64_t q = lptr[k]; q < lptr[k + 1]; ++q) {
        blocks.add(m * n_omega + k, m * n_omega + lidx[q], lval[q]);
      }
    }
  }
  return SparseSymOperator(add(blocks.build(), btb), Provenance::H_3d);
}

}  // namespace

SparseSymOperator assemble_laplacian(const CrossSection& cs) {
  const double h = cs.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const int n = static_cast<int>(cs.size());
  TripletAccumulator acc(n, n);
  acc.reserve(static_cast<std::size_t>(n) * 5);
  for (int k = 0; k < n; ++k) {
    double diag = 4.0 * inv_h2;
    for (int d = 0; d < 4; ++d) {
      const auto link = static_cast<Link>(d);
      const int nb = cs.neighbor(k, link);
      if (nb >= 0) {
        acc.add(k, nb, -inv_h2);
      } else {
        // Ghost value -(1-theta)/theta u_k: linear extrapolation through the
        // boundary point. Symmetric, and second order in the eigenvalue.
        const double theta = std::max(cs.boundary_fraction(k, link), kMinBoundaryFraction);
        diag += (1.0 / theta - 1.0) * inv_h2;
      }
    }
    acc.add(k, k, diag);
  }
  return SparseSymOperator(acc.build(), Provenance::laplacian);
}

SparseOperator assemble_angular(const CrossSection& cs) {
  const double h = cs.spacing();
  const int n = static_cast<int>(cs.size());
  TripletAccumulator acc(n, n);
  acc.reserve(static_cast<std::size_t>(n) * 4);
  // One axis at a time: difference quotient across the two neighbours, where an
  // exterior neighbour is replaced by the zero boundary value at distance theta h.
  const auto axis = [&](int k, double coeff, Link plus, Link minus) {
    if (coeff == 0.0) return;
    const int np = cs.neighbor(k, plus);
    const int nm = cs.neighbor(k, minus);
    const double hp = np >= 0 ? h : cs.boundary_fraction(k, plus) * h;
    const double hm = nm >= 0 ? h : cs.boundary_fraction(k, minus) * h;
    const double w = coeff / (hp + hm);
    if (nm >= 0) acc.add(k, nm, -w);
    if (np >= 0) acc.add(k, np, w);
  };
  for (int k = 0; k < n; ++k) {
    const auto& node = cs.node(k);
    axis(k, -node.t3, Link::east, Link::west);
    axis(k, node.t2, Link::north, Link::south);
  }
  return SparseOperator{acc.build()};
}

SparseSymOperator assemble_h_beta0(const SparseSymOperator& laplacian,
                                   const SparseOperator& angular, double beta0) {
  if (beta0 == 0.0) return SparseSymOperator(laplacian.matrix(), Provenance::h_beta0);
  return SparseSymOperator(add(laplacian.matrix(), gram(angular.matrix), beta0 * beta0),
                           Provenance::h_beta0);
}

SparseSymOperator assemble_h_beta0(const CrossSection& cs, double beta0) {
  return assemble_h_beta0(assemble_laplacian(cs), assemble_angular(cs), beta0);
}

SparseOperator skew_part(const SparseOperator& angular) {
  CsrMatrix diff = add(angular.matrix, angular.matrix.transpose(), -1.0);
  std::vector<double> half = diff.values();
  for (double& v : half) v *= 0.5;
  return SparseOperator{CsrMatrix(diff.rows(), diff.cols(), diff.row_ptr(), diff.col_idx(),
                                  std::move(half))};
}

CrossSectionOperators assemble_cross_section_operators(const CrossSection& cs, double beta0) {
  CrossSectionOperators ops;
  ops.laplacian = assemble_laplacian(cs);
  ops.angular = assemble_angular(cs);
  ops.angular_skew = skew_part(ops.angular);
  ops.h_beta0 = assemble_h_beta0(ops.laplacian, ops.angular, beta0);
  ops.beta0 = beta0;
  return ops;
}

namespace {

double percentile99(std::vector<double>& sample) {
  if (sample.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(std::floor(0.99 * static_cast<double>(sample.size() - 1)));
  std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(rank), sample.end());
  return sample[rank];
}

}  // namespace

PotentialScale potential_scale(const CrossSection& cs, const SparseOperator& angular,
                               const Eigen::VectorXd& f) {
  const double t = require_positive(cs, f);
  const Eigen::VectorXd af = angular.matrix * f;
  const Eigen::VectorXd aaf = angular.matrix * af;
  std::vector<double> deep1;
  std::vector<double> deep2;
  std::vector<double> all1;
  std::vector<double> all2;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (f[k] <= t) continue;
    const double r1 = std::abs(af[k]) / f[k];
    const double r2 = std::abs(aaf[k]) / f[k];
    all1.push_back(r1);
    all2.push_back(r2);
    if (cs.is_deep(k)) {
      deep1.push_back(r1);
      deep2.push_back(r2);
    }
  }
  PotentialScale out;
  // A handful of deep nodes (corners of thin shapes) is not representative.
  const std::size_t min_deep = std::max<std::size_t>(100, all1.size() / 10);
  out.used_all_nodes = deep1.size() < min_deep;
  std::vector<double>& s1 = out.used_all_nodes ? all1 : deep1;
  std::vector<double>& s2 = out.used_all_nodes ? all2 : deep2;
  out.sample_count = static_cast<int>(s1.size());
  out.ratio_q99 = percentile99(s1);
  out.second_ratio_q99 = percentile99(s2);
  return out;
}

PotentialField effective_potential(const CrossSection& cs, const SparseOperator& angular,
                                   const Eigen::VectorXd& f, const TwistProfile& profile,
                                   double alpha_sq, double s, const PotentialScale& scale) {
  const double t = require_positive(cs, f);
  if (!(alpha_sq > 0.0)) throw InvalidC(fmt::format("alpha^2 must be positive, got {}", alpha_sq));

  PotentialField out;
  out.values = Eigen::VectorXd::Zero(f.size());
  const double m = profile.mu(s);
  const double mdot = profile.mu_dot(s);
  const double k2 = m * (2.0 * profile.beta0() - m);
  if (mdot == 0.0 && k2 == 0.0) return out;

  const Eigen::VectorXd af = angular.matrix * f;
  const Eigen::VectorXd aaf = angular.matrix * af;
  const double q1 = scale.ratio_q99;
  const double q2 = scale.second_ratio_q99;
  out.cap = (std::abs(mdot) * q1 + std::abs(k2) * q2) / alpha_sq;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (f[k] <= t) {
      ++out.underflow_count;
      continue;
    }
    double r1 = af[k] / f[k];
    double r2 = aaf[k] / f[k];
    bool clamped = false;
    if (mdot != 0.0 && std::abs(r1) > q1) {
      r1 = std::copysign(q1, r1);
      clamped = true;
    }
    if (k2 != 0.0 && std::abs(r2) > q2) {
      r2 = std::copysign(q2, r2);
      clamped = true;
    }
    if (clamped) ++out.clamp_count;
    out.values[k] = -(mdot * r1 - k2 * r2) / alpha_sq;
  }
  return out;
}

PotentialField effective_potential(const CrossSection& cs, const Eigen::VectorXd& f,
                                   const TwistProfile& profile, double alpha_sq, double s) {
  const SparseOperator angular = skew_part(assemble_angular(cs));
  return effective_potential(cs, angular, f, profile, alpha_sq, s,
                             potential_scale(cs, angular, f));
}

SparseSymOperator assemble_H_of_s(const SparseSymOperator& h_beta0,
                                  const Eigen::VectorXd& potential, double threshold) {
  const Eigen::VectorXd shift = potential.array() - threshold;
  return SparseSymOperator(add_diagonal(h_beta0.matrix(), shift), Provenance::H_of_s);
}

SparseSymOperator assemble_H_of_s(const CrossSection& cs, double beta0, const Eigen::VectorXd& f,
                                  double threshold, const TwistProfile& profile, double alpha_sq,
                                  double s) {
  const CrossSectionOperators ops = assemble_cross_section_operators(cs, beta0);
  const PotentialField v = effective_potential(cs, ops.angular_skew, f, profile, alpha_sq, s,
                                               potential_scale(cs, ops.angular_skew, f));
  return assemble_H_of_s(ops.h_beta0, v.values, threshold);
}

double estimate_3d_memory(const CrossSection& cs, int n_s) {
  // Triplets of B^T B (about 36 per row of B, 16 bytes, sorted copy) plus the
  // final CSR (about 40 entries per row, 12 bytes).
  const double rows = static_cast<double>(n_s + 1) * static_cast<double>(cs.size());
  return rows * (36.0 * 16.0 * 2.0 + 40.0 * 12.0);
}

SparseSymOperator assemble_3d(const CrossSection& cs, const TwistProfile& profile,
                              double half_length, int n_s) {
  if (!(half_length > profile.half_width())) {
    throw TruncationTooSmall(fmt::format(
        "truncation half-length {} must exceed the support half-width {}", half_length,
        profile.half_width()));
  }
  return assemble_3d_impl(
      cs, [&profile](double s) { return profile.twist_velocity(s); }, half_length, n_s);
}

namespace detail {

SparseSymOperator assemble_3d_constant_twist(const CrossSection& cs, double velocity,
                                             double half_length, int n_s) {
  return assemble_3d_impl(
      cs, [velocity](double) { return velocity; }, half_length, n_s);
}

}  // namespace detail

}  // namespace twisttube
