#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "twisttube/bound.hpp"
#include "twisttube/discretize.hpp"
#include "twisttube/eigensolve.hpp"
#include "twisttube/errors.hpp"

using namespace twisttube;

namespace {

constexpr double kBesselSq = 5.783185962946784;  // j_{0,1}^2

bool interior_stencil(const CrossSection& cs, std::size_t k) {
  for (int d = 0; d < 4; ++d) {
    if (cs.neighbor(k, static_cast<Link>(d)) < 0) return false;
  }
  return true;
}

Eigen::VectorXd sample(const CrossSection& cs, double (*fn)(double, double)) {
  Eigen::VectorXd u(cs.size());
  for (std::size_t k = 0; k < cs.size(); ++k) u[k] = fn(cs.node(k).t2, cs.node(k).t3);
  return u;
}

}  // namespace

TEST_CASE("single interior node gives [4/h^2]") {
  const CrossSection cs(1.0, 2, {GridNode{0, 0, 0.0, 0.0}});
  const auto lap = assemble_laplacian(cs);
  REQUIRE(lap.dim() == 1);
  CHECK(lap.matrix().coeff(0, 0) == 4.0);
}

TEST_CASE("three-node strip") {
  const double h = 0.5;
  const CrossSection cs(h, 3,
                        {GridNode{-1, 0, -h, 0.0}, GridNode{0, 0, 0.0, 0.0}, GridNode{1, 0, h, 0.0}});
  const Eigen::MatrixXd l = assemble_laplacian(cs).matrix().to_dense();
  Eigen::MatrixXd expected(3, 3);
  expected << 4, -1, 0, -1, 4, -1, 0, -1, 4;
  expected /= h * h;
  CHECK((l - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("angular operator is exact on linear and radial fields") {
  const auto cs = build_cross_section(shape::Ellipse{0.3}, 1.0 / 16);
  const SparseOperator a = assemble_angular(cs);
  const Eigen::VectorXd t3 = sample(cs, [](double, double y) { return y; });
  const Eigen::VectorXd t2 = sample(cs, [](double x, double) { return x; });
  const Eigen::VectorXd r2 = sample(cs, [](double x, double y) { return x * x + y * y; });
  const Eigen::VectorXd a_t3 = a.matrix * t3;
  const Eigen::VectorXd a_t2 = a.matrix * t2;
  const Eigen::VectorXd a_r2 = a.matrix * r2;
  int checked = 0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (!interior_stencil(cs, k)) continue;
    ++checked;
    CHECK(a_t3[k] == doctest::Approx(cs.node(k).t2).epsilon(1e-13).scale(1.0));
    CHECK(a_t2[k] == doctest::Approx(-cs.node(k).t3).epsilon(1e-13).scale(1.0));
    CHECK(std::abs(a_r2[k]) < 1e-12);
  }
  CHECK(checked > 100);
}

TEST_CASE("assembled operators are exactly symmetric") {
  const auto cs = build_cross_section(shape::Ribbon{1, 0.1}, 1.0 / 16);
  const auto lap = assemble_laplacian(cs);
  CHECK(lap.asymmetry() == 0.0);
  const auto h = assemble_h_beta0(cs, 1.3);
  CHECK(h.asymmetry() == 0.0);
  CHECK(max_asymmetry(h.matrix()) == 0.0);
}

TEST_CASE("beta0 = 0 leaves the Laplacian") {
  const auto cs = build_cross_section(shape::Ellipse{0.2}, 0.1);
  const auto lap = assemble_laplacian(cs);
  const auto h = assemble_h_beta0(cs, 0.0);
  const Eigen::MatrixXd diff = lap.matrix().to_dense() - h.matrix().to_dense();
  CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("h_beta0 dominates L in the form sense") {
  const auto cs = build_cross_section(shape::Ellipse{0.4}, 0.1);
  const auto lap = assemble_laplacian(cs);
  const auto h = assemble_h_beta0(cs, 1.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd x(cs.size());
    for (auto& v : x) v = nd(rng);
    CHECK(x.dot(h.apply(x)) - x.dot(lap.apply(x)) >= 0.0);
  }
}

TEST_CASE("Gram term is positive semidefinite") {
  const auto cs = build_cross_section(shape::Ellipse{0.4}, 0.1);
  const SparseSymOperator g(gram(assemble_angular(cs).matrix), Provenance::angular_gram);
  const Spectrum s = dense_smallest_eigs(g, 1);
  CHECK(s.eigenvalues[0] >= -1e-9);
}

TEST_CASE("disc Laplacian converges to the Bessel value at second order") {
  double prev_err = 0.0;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const auto cs = build_cross_section(shape::Disc{}, h);
    const double e = smallest_eigs(assemble_laplacian(cs), 1).eigenvalues[0];
    const double err = std::abs(e - kBesselSq);
    if (h == 1.0 / 32) CHECK(err < 0.01 * kBesselSq);
    if (prev_err > 0.0) {
      CHECK(prev_err / err > 3.0);
      CHECK(prev_err / err < 5.5);
    }
    prev_err = err;
  }
}

TEST_CASE("staircase closure reproduces the plain five-point stencil") {
  const auto cs = build_cross_section(shape::Disc{}, 0.25, BoundaryTreatment::staircase);
  const auto lap = assemble_laplacian(cs);
  for (int k = 0; k < lap.dim(); ++k) CHECK(lap.matrix().coeff(k, k) == 64.0);
}

TEST_CASE("disc ground state is nearly invariant under rotation") {
  const auto cs = build_cross_section(shape::Disc{}, 1.0 / 32);
  const auto lap = assemble_laplacian(cs);
  const auto h = assemble_h_beta0(cs, 1.0);
  const double el = smallest_eigs(lap, 1).eigenvalues[0];
  const GroundState gs = ground_state(h);
  const Eigen::VectorXd af = skew_part(assemble_angular(cs)).matrix * gs.f;
  CHECK(gs.energy >= el);
  CHECK(gs.energy - el <= 2.0 * af.squaredNorm() + 1e-9);
  CHECK(angular_energy_ratio(cs, gs.f) < 1e-3);
}

TEST_CASE("ellipse threshold exceeds the disc threshold") {
  const double h = 1.0 / 32;
  const double e_disc = ground_state(assemble_h_beta0(build_cross_section(shape::Disc{}, h), 1.0)).energy;
  double prev = e_disc;
  for (double eps : {0.1, 0.2}) {
    const double e = ground_state(assemble_h_beta0(build_cross_section(shape::Ellipse{eps}, h), 1.0)).energy;
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("skew part integrates by parts exactly") {
  const auto cs = build_cross_section(shape::Ellipse{0.3}, 1.0 / 16);
  const SparseOperator s = skew_part(assemble_angular(cs));
  const Eigen::MatrixXd d = s.matrix.to_dense();
  CHECK((d + d.transpose()).cwiseAbs().maxCoeff() == 0.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::VectorXd f(cs.size());
  for (auto& v : f) v = nd(rng);
  const Eigen::VectorXd sf = s.matrix * f;
  const Eigen::VectorXd ssf = s.matrix * sf;
  CHECK(f.dot(ssf) == doctest::Approx(-sf.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("effective potential") {
  const auto cs = build_cross_section(shape::Ellipse{0.1}, 1.0 / 16);
  const auto ops = assemble_cross_section_operators(cs, 1.0);
  const GroundState gs = ground_state(ops.h_beta0);
  const TwistProfile p(1.0, 0.005, 1.0);
  const double a2 = 0.01;

  SUBCASE("vanishes off the support") {
    const auto scale = potential_scale(cs, ops.angular_skew, gs.f);
    for (double s : {-1.0, 1.0, 1.5}) {
      const auto v = effective_potential(cs, ops.angular_skew, gs.f, p, a2, s, scale);
      CHECK(v.values.isZero(0.0));
      const auto hs = assemble_H_of_s(ops.h_beta0, v.values, gs.energy);
      CHECK(negative_eigs(hs, 8).empty());
    }
  }

  SUBCASE("matches the closed form at s = 0 without clamping") {
    PotentialScale loose;
    loose.ratio_q99 = 1e100;
    loose.second_ratio_q99 = 1e100;
    const auto v = effective_potential(cs, ops.angular_skew, gs.f, p, a2, 0.0, loose);
    CHECK(v.clamp_count == 0);
    const Eigen::VectorXd af = ops.angular_skew.matrix * gs.f;
    const Eigen::VectorXd aaf = ops.angular_skew.matrix * af;
    const double k2 = p.mu(0.0) * (2.0 - p.mu(0.0));
    const double t = underflow_threshold(gs.f);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      REQUIRE(std::isfinite(v.values[k]));
      if (gs.f[k] <= t) continue;
      CHECK(v.values[k] == doctest::Approx(k2 * aaf[k] / gs.f[k] / a2).epsilon(1e-12));
    }
  }

  SUBCASE("clamping bounds the potential by its cap") {
    const auto scale = potential_scale(cs, ops.angular_skew, gs.f);
    CHECK(scale.ratio_q99 > 0.0);
    for (double s : {-0.5, 0.0, 0.3}) {
      const auto v = effective_potential(cs, ops.angular_skew, gs.f, p, a2, s, scale);
      CHECK(v.values.cwiseAbs().maxCoeff() <= v.cap * (1.0 + 1e-12));
    }
  }

  SUBCASE("sign-changing f is rejected") {
    Eigen::VectorXd f = gs.f;
    f[f.size() / 2] = -0.5;
    CHECK_THROWS_AS(effective_potential(cs, f, p, a2, 0.0), NonPositiveGroundState);
  }
}

TEST_CASE("3D operator without twist is a tensor sum") {
  const auto cs = build_cross_section(shape::Disc{}, 0.25);
  const double half = 1.5;
  const int n_s = 20;
  const auto h3 = detail::assemble_3d_constant_twist(cs, 0.0, half, n_s);
  CHECK(h3.asymmetry() == 0.0);
  const Spectrum s3 = dense_smallest_eigs(h3, h3.dim());
  const Spectrum s2 = dense_smallest_eigs(assemble_laplacian(cs), static_cast<int>(cs.size()));
  const double ds = 2.0 * half / (n_s + 1);
  std::vector<double> sums;
  for (int m = 1; m <= n_s; ++m) {
    const double lam = (2.0 - 2.0 * std::cos(m * std::numbers::pi / (n_s + 1))) / (ds * ds);
    for (double mu : s2.eigenvalues) sums.push_back(lam + mu);
  }
  std::sort(sums.begin(), sums.end());
  REQUIRE(sums.size() == s3.size());
  const double scale = h3.scale();
  for (std::size_t k = 0; k < sums.size(); ++k) {
    CHECK(std::abs(s3.eigenvalues[k] - sums[k]) <= 1e-8 * scale);
  }
}

TEST_CASE("untwisted-perturbation 3D spectrum stays above E") {
  const auto cs = build_cross_section(shape::Ellipse{0.3}, 0.125);
  const TwistProfile flat(1.0, 0.0, 1.0);
  const double e = ground_state(assemble_h_beta0(cs, 1.0)).energy;
  const auto h3 = assemble_3d(cs, flat, 3.0, 48);
  CHECK(h3.asymmetry() == 0.0);
  const double lowest = smallest_eigs(h3, 1).eigenvalues[0];
  CHECK(lowest >= e - 1e-8 * h3.scale());

  const TwistProfile slow(1.0, 0.3, 1.0);
  const double lowest_slow = smallest_eigs(assemble_3d(cs, slow, 3.0, 48), 1).eigenvalues[0];
  CHECK(lowest_slow < lowest);
}

TEST_CASE("3D assembly preconditions") {
  const auto cs = build_cross_section(shape::Disc{}, 0.25);
  const TwistProfile p(1.0, 0.01, 1.0);
  CHECK_THROWS_AS(assemble_3d(cs, p, 0.9, 32), TruncationTooSmall);
  CHECK_THROWS_AS(assemble_3d(cs, p, 3.0, 8), InvalidSpec);
  CHECK(estimate_3d_memory(cs, 32) > 0.0);
}
