#include <cmath>

#include "doctest.h"
#include "twisttube/bound.hpp"
#include "twisttube/errors.hpp"
#include "twisttube/profiles.hpp"

using namespace twisttube;

TEST_CASE("bump values") {
  const TwistProfile p(1.0, 0.01, 1.0);
  CHECK(mu(p, 0.0) == 0.01);
  CHECK(mu(p, 1.0) == 0.0);
  CHECK(mu(p, -1.0) == 0.0);
  CHECK(mu(p, 0.5) == doctest::Approx(0.01 * std::exp(-1.0 / 3.0)).epsilon(1e-14));
  CHECK(mu(p, 0.5) == doctest::Approx(0.007165).epsilon(1e-4));
  CHECK(mu_dot(p, 0.0) == 0.0);
  CHECK(mu_dot(p, 1.0) == 0.0);
  CHECK(mu_dot(p, 3.0) == 0.0);
  CHECK(mu(p, -7.0) == 0.0);
}

TEST_CASE("bump is maximal only at the centre") {
  const TwistProfile p(1.0, 0.02, 1.5);
  for (int k = -30; k <= 30; ++k) {
    const double s = 0.05 * k;
    CHECK(mu(p, s) >= 0.0);
    CHECK(mu(p, s) <= 0.02);
    if (k != 0) CHECK(mu(p, s) < 0.02);
  }
}

TEST_CASE("mu_dot agrees with central differences") {
  const TwistProfile p(1.0, 0.05, 1.0);
  for (double delta : {1e-3, 1e-4}) {
    for (int k = -9; k <= 9; ++k) {
      const double s = 0.1 * k;
      const double fd = (mu(p, s + delta) - mu(p, s - delta)) / (2.0 * delta);
      CHECK(std::abs(mu_dot(p, s) - fd) <= 50.0 * delta * delta);
    }
  }
}

TEST_CASE("integral of |mu_dot| is twice the amplitude") {
  const double a = 0.03;
  const TwistProfile p(1.0, a, 2.0);
  const auto nodes = simpson_nodes(-2.0, 2.0, 4001);
  std::vector<double> g;
  for (double s : nodes) g.push_back(std::abs(mu_dot(p, s)));
  CHECK(simpson(g, -2.0, 2.0) == doctest::Approx(2.0 * a).epsilon(1e-6));
}

TEST_CASE("sup of |mu_dot| is cached") {
  const TwistProfile p(1.0, 0.05, 1.0);
  double best = 0.0;
  for (int k = 0; k <= 100000; ++k) best = std::max(best, std::abs(mu_dot(p, k * 1e-5)));
  CHECK(p.mu_dot_sup() == doctest::Approx(best).epsilon(1e-6));
  CHECK(TwistProfile(1.0, 0.0, 1.0).mu_dot_sup() == 0.0);
}

TEST_CASE("admissibility") {
  const double gamma = gamma_beta0(1.0, 1.0);
  CHECK(gamma == doctest::Approx(1.0 / 48.0));
  {
    const TwistProfile p(1.0, 0.0, 1.0);
    const auto adm = check_admissibility(p, 0.001, gamma, alpha_sq(gamma, 0.001));
    CHECK(adm.theorem1_ok);
    CHECK(adm.theorem2_ok);
  }
  {
    const TwistProfile p(1.0, 0.005, 1.0);
    const auto adm = check_admissibility(p, 0.006, gamma, alpha_sq(gamma, 0.006));
    CHECK(adm.theorem1_ok);
  }
  {
    // sup mu == c beta0: the strict inequality fails
    const TwistProfile p(1.0, 0.006, 1.0);
    const auto adm = check_admissibility(p, 0.006, gamma, alpha_sq(gamma, 0.006));
    CHECK_FALSE(adm.theorem1_ok);
    CHECK_FALSE(adm.messages.empty());
  }
  {
    const TwistProfile p(1.0, 0.5, 1.0);
    const auto adm = check_admissibility(p, 0.001, gamma, alpha_sq(gamma, 0.001));
    CHECK_FALSE(adm.theorem2_ok);
  }
}

TEST_CASE("invalid profiles") {
  CHECK_THROWS_AS(TwistProfile(0.0, 0.1, 1.0), InvalidSpec);
  CHECK_THROWS_AS(TwistProfile(1.0, -0.1, 1.0), InvalidSpec);
  CHECK_THROWS_AS(TwistProfile(1.0, 0.1, 0.0), InvalidSpec);
}
