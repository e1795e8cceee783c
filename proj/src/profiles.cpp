#include "twisttube/profiles.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "twisttube/errors.hpp"

namespace twisttube {

namespace {

// Maximises f on [lo, hi]; f is unimodal there.
template <class F>
double golden_section_max(F f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * (hi - lo); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace

TwistProfile::TwistProfile(double beta0, double amplitude, double half_width,
                           ProfileFamily family)
    : beta0_(beta0), amplitude_(amplitude), half_width_(half_width), family_(family) {
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) {
    throw InvalidSpec(fmt::format("beta0 must be positive, got {}", beta0));
  }
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw InvalidSpec(fmt::format("bump amplitude must be >= 0, got {}", amplitude));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidSpec(fmt::format("support half-width s0 must be positive, got {}", half_width));
  }
  if (amplitude_ > 0.0) {
    mu_dot_sup_ = golden_section_max([this](double s) { return -mu_dot(s); }, 0.0, half_width_);
  }
}

double TwistProfile::mu(double s) const {
  const double x = s / half_width_;
  if (!(std::abs(x) < 1.0)) return 0.0;
  return amplitude_ * std::exp(1.0 - 1.0 / (1.0 - x * x));
}

double TwistProfile::mu_dot(double s) const {
  const double x = s / half_width_;
  if (!(std::abs(x) < 1.0)) return 0.0;
  const double q = 1.0 - x * x;
  return mu(s) * (-2.0 * x / (q * q)) / half_width_;
}

Admissibility check_admissibility(const TwistProfile& profile, double c, double gamma,
                                  double alpha_sq) {
  Admissibility adm;
  adm.c = c;
  adm.gamma = gamma;
  adm.alpha_sq = alpha_sq;

  const double beta0 = profile.beta0();
  const double mu_inf = profile.mu_sup();
  const bool c_in_window = c > 0.0 && c < gamma / 3.0;
  const bool mu_small = mu_inf < c * beta0;
  adm.theorem1_ok = c_in_window && mu_small;
  if (!c_in_window) {
    adm.messages.push_back(
        fmt::format("c = {:.6g} lies outside the window (0, gamma/3) = (0, {:.6g})", c,
                    gamma / 3.0));
  }
  if (!mu_small) {
    adm.messages.push_back(fmt::format(
        "sup mu = {:.6g} is not below c*beta0 = {:.6g}", mu_inf, c * beta0));
  }

  const double lhs = std::max(2.0 * mu_inf / beta0, profile.mu_dot_sup() / (2.0 * beta0 * beta0));
  adm.theorem2_ok = lhs < alpha_sq;
  if (!adm.theorem2_ok) {
    adm.messages.push_back(fmt::format(
        "discreteness condition fails: max(2|mu|/beta0, |mu'|/(2 beta0^2)) = {:.6g} >= "
        "alpha^2 = {:.6g}",
        lhs, alpha_sq));
  }
  if (mu_inf >= beta0) {
    adm.messages.push_back(fmt::format(
        "warning: amplitude {:.6g} >= beta0 {:.6g}; the twist reverses direction", mu_inf,
        beta0));
  }
  return adm;
}

}  // namespace twisttube
