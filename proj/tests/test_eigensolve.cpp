#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "twisttube/discretize.hpp"
#include "twisttube/eigensolve.hpp"
#include "twisttube/errors.hpp"

using namespace twisttube;

namespace {

SparseSymOperator from_triplets(int n, const std::vector<std::tuple<int, int, double>>& t) {
  TripletAccumulator acc(n, n);
  for (const auto& [r, c, v] : t) acc.add(r, c, v);
  return SparseSymOperator(acc.build(), Provenance::generic);
}

SparseSymOperator laplacian_1d(int n, double h) {
  std::vector<std::tuple<int, int, double>> t;
  for (int k = 0; k < n; ++k) {
    t.emplace_back(k, k, 2.0 / (h * h));
    if (k > 0) t.emplace_back(k, k - 1, -1.0 / (h * h));
    if (k + 1 < n) t.emplace_back(k, k + 1, -1.0 / (h * h));
  }
  return from_triplets(n, t);
}

// Sparse symmetric matrix with a few random off-diagonals per row.
SparseSymOperator random_symmetric(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> col(0, n - 1);
  std::vector<std::tuple<int, int, double>> t;
  for (int k = 0; k < n; ++k) {
    t.emplace_back(k, k, 4.0 * u(rng));
    for (int e = 0; e < 3; ++e) {
      const int c = col(rng);
      if (c == k) continue;
      const double v = u(rng);
      t.emplace_back(k, c, v);
      t.emplace_back(c, k, v);
    }
  }
  return from_triplets(n, t);
}

}  // namespace

TEST_CASE("diagonal matrix") {
  const auto m = from_triplets(3, {{0, 0, 7.0}, {1, 1, 1.0}, {2, 2, 3.0}});
  const Spectrum s = smallest_eigs(m, 2);
  REQUIRE(s.size() == 2);
  CHECK(s.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(s.eigenvalues[1] == doctest::Approx(3.0));
}

TEST_CASE("1D Dirichlet Laplacian, iterative path") {
  const int n = 300;
  const double h = 1.0 / (n + 1);
  const auto m = laplacian_1d(n, h);
  const Spectrum s = lobpcg(m, 4);
  REQUIRE(s.converged);
  for (int k = 1; k <= 4; ++k) {
    const double exact = (2.0 - 2.0 * std::cos(k * std::numbers::pi / (n + 1))) / (h * h);
    CHECK(std::abs(s.eigenvalues[k - 1] - exact) <= 1e-8 * m.scale());
  }
}

TEST_CASE("iterative solver matches the dense oracle") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto m = random_symmetric(200, seed);
    const Spectrum it = lobpcg(m, 5);
    const Spectrum de = dense_smallest_eigs(m, 5);
    for (int k = 0; k < 5; ++k) {
      CHECK(std::abs(it.eigenvalues[k] - de.eigenvalues[k]) <= 1e-8 * m.scale());
    }
    // residual and orthogonality invariants
    for (std::size_t k = 0; k < it.size(); ++k) {
      CHECK(it.residuals[k] <= 1e-10 * (1.0 + std::abs(it.eigenvalues[k])) * m.scale() * 1.0001);
    }
    const Eigen::MatrixXd g = it.eigenvectors.transpose() * it.eigenvectors;
    CHECK((g - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("fixed seed gives bitwise identical spectra") {
  const auto m = random_symmetric(250, 11);
  const Spectrum a = lobpcg(m, 3);
  const Spectrum b = lobpcg(m, 3);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK((a.eigenvectors - b.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ground state sign and norm") {
  const auto cs = build_cross_section(shape::Ellipse{0.2}, 1.0 / 16);
  const GroundState gs = ground_state(assemble_h_beta0(cs, 1.0));
  CHECK(gs.f.norm() == doctest::Approx(1.0));
  CHECK(gs.f.sum() > 0.0);
  CHECK(gs.min_value > 0.0);
  CHECK(gs.cluster_size == 1);
}

TEST_CASE("beta0 = 0 ground state is the Laplacian ground state") {
  const auto cs = build_cross_section(shape::Ellipse{0.5}, 1.0 / 16);
  const double e_lap = dense_smallest_eigs(assemble_laplacian(cs), 1).eigenvalues[0];
  CHECK(ground_state(assemble_h_beta0(cs, 0.0)).energy == doctest::Approx(e_lap).epsilon(1e-10));
}

TEST_CASE("separate wells form a ground cluster with a positive combination") {
  // two identical disc masks, far apart
  const auto cs = build_cross_section(shape::Disc{}, 0.125);
  std::vector<GridNode> nodes;
  for (const auto& n : cs.nodes()) nodes.push_back({n.i - 20, n.j, n.t2 - 2.5, n.t3});
  for (const auto& n : cs.nodes()) nodes.push_back({n.i + 20, n.j, n.t2 + 2.5, n.t3});
  std::sort(nodes.begin(), nodes.end(),
            [](const GridNode& a, const GridNode& b) { return a.j != b.j ? a.j < b.j : a.i < b.i; });
  const CrossSection wells(0.125, 40, nodes);
  const GroundState gs = ground_state(assemble_laplacian(wells));
  CHECK(gs.cluster_size == 2);
  CHECK(gs.min_value > 0.0);
}

TEST_CASE("negative eigenvalues") {
  const auto cs = build_cross_section(shape::Ellipse{0.3}, 1.0 / 8);
  const auto h = assemble_h_beta0(cs, 1.0);
  const GroundState gs = ground_state(h);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(cs.size());

  SUBCASE("threshold subtraction leaves nothing negative") {
    CHECK(negative_eigs(assemble_H_of_s(h, zero, gs.energy), 16).empty());
  }
  SUBCASE("spectral shift") {
    // PSD matrix with smallest eigenvalue 2, shifted by -10
    const auto m = from_triplets(4, {{0, 0, 2.0}, {1, 1, 5.0}, {2, 2, 9.0}, {3, 3, 12.0}});
    const Eigen::VectorXd shift = Eigen::VectorXd::Constant(4, -10.0);
    const SparseSymOperator shifted(add_diagonal(m.matrix(), shift), Provenance::generic);
    const Spectrum neg = negative_eigs(shifted, 8);
    REQUIRE(neg.size() == 3);
    CHECK(neg.eigenvalues[0] == doctest::Approx(-8.0));
    CHECK(neg.eigenvalues[2] == doctest::Approx(-1.0));
  }
  SUBCASE("shift above the lowest eigenvalue empties the set") {
    const Eigen::VectorXd up = Eigen::VectorXd::Constant(cs.size(), -gs.energy + 1.0);
    CHECK(negative_eigs(SparseSymOperator(add_diagonal(h.matrix(), up), Provenance::generic), 8)
              .empty());
  }
  SUBCASE("cap") {
    const Eigen::VectorXd down = Eigen::VectorXd::Constant(cs.size(), -1e4);
    const SparseSymOperator deep(add_diagonal(h.matrix(), down), Provenance::generic);
    CHECK_THROWS_AS(negative_eigs(deep, 4), CapExceeded);
  }
}

TEST_CASE("eigs_below grows the request until it passes the threshold") {
  const int n = 1200;
  const auto m = laplacian_1d(n, 1.0);
  // eigenvalues 2 - 2 cos(k pi / (n+1)) below 1e-4: k < (n+1) sqrt(1e-4) / pi
  const double thr = 1e-4;
  int expected = 0;
  for (int k = 1; k <= n; ++k) {
    if (2.0 - 2.0 * std::cos(k * std::numbers::pi / (n + 1)) < thr) ++expected;
  }
  const Spectrum s = eigs_below(m, thr, 64);
  CHECK(static_cast<int>(s.size()) == expected);
  for (double v : s.eigenvalues) CHECK(v < thr);
}
