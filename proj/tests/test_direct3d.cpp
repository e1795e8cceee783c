#include <limits>

#include "doctest.h"
#include "twisttube/direct3d.hpp"
#include "twisttube/errors.hpp"

using namespace twisttube;

TEST_CASE("no slowdown, no states below E") {
  const auto cs = build_cross_section(shape::Ellipse{0.3}, 0.125);
  const DirectResult d = direct_spectrum(cs, TwistProfile(1.0, 0.0, 1.0), DirectConfig{});
  CHECK(d.eigenvalues.empty());
  CHECK(d.moment == 0.0);
  CHECK(d.lowest >= d.threshold);
  CHECK(d.half_length == 3.0);
  CHECK(d.n_s == 48);
  CHECK(d.caveats.size() == 1);
}

TEST_CASE("strong slowdown binds a state below E") {
  const auto cs = build_cross_section(shape::Ellipse{1.0}, 0.125);
  const TwistProfile p(1.0, 0.5, 2.0);
  const DirectResult d = direct_spectrum(cs, p, DirectConfig{});
  REQUIRE_FALSE(d.eigenvalues.empty());
  for (double v : d.eigenvalues) CHECK(v < d.threshold - d.buffer);
  CHECK(d.moment > 0.0);
}

TEST_CASE("longer truncation never raises eigenvalues") {
  const auto cs = build_cross_section(shape::Ellipse{1.0}, 0.125);
  const TwistProfile p(1.0, 0.5, 2.0);
  // equal axial spacing: n_s + 1 proportional to L
  DirectConfig shorter;
  shorter.half_length = 4.0;
  shorter.n_s = 63;
  DirectConfig longer;
  longer.half_length = 6.0;
  longer.n_s = 95;
  const DirectResult a = direct_spectrum(cs, p, shorter);
  const DirectResult b = direct_spectrum(cs, p, longer);
  CHECK(b.lowest <= a.lowest + 1e-10);
}

TEST_CASE("preconditions") {
  const auto cs = build_cross_section(shape::Disc{}, 0.125);
  const TwistProfile p(1.0, 0.01, 1.0);
  DirectConfig c;
  c.half_length = 1.5;
  CHECK_THROWS_AS(direct_spectrum(cs, p, c), TruncationTooSmall);
  c.half_length = 0.0;
  c.memory_budget_bytes = 1024.0;
  CHECK_THROWS_AS(direct_spectrum(cs, p, c), MemoryBudgetExceeded);
  c.memory_budget_bytes = 4e9;
  c.n_s = 24;  // ds = 6/25 > h
  const DirectResult d = direct_spectrum(cs, p, c);
  CHECK(d.caveats.size() == 2);
}

TEST_CASE("verdicts") {
  BoundReport report;
  DirectResult direct;
  report.bound = 0.5;
  SUBCASE("empty spectrum passes with ratio 0") {
    const Verdict v = verify_inequality(direct, report);
    CHECK(v.passed);
    CHECK(v.ratio == 0.0);
  }
  SUBCASE("moment above the bound fails") {
    direct.moment = 1.0;
    const Verdict v = verify_inequality(direct, report);
    CHECK_FALSE(v.passed);
    CHECK(v.ratio == doctest::Approx(2.0));
  }
  SUBCASE("both below the floor pass") {
    direct.moment = 1e-14;
    report.bound = 0.0;
    const Verdict v = verify_inequality(direct, report);
    CHECK(v.passed);
    CHECK(v.ratio == std::numeric_limits<double>::infinity());
  }
}
