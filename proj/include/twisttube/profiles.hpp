#pragma once

#include <string>
#include <vector>

namespace twisttube {

enum class ProfileFamily { SmoothBump };

// Twist velocity beta0 - mu(s) with a compactly supported slowdown mu.
class TwistProfile {
 public:
  // Throws InvalidSpec unless beta0 > 0, amplitude >= 0, half_width > 0.
  TwistProfile(double beta0, double amplitude, double half_width,
               ProfileFamily family = ProfileFamily::SmoothBump);

  double beta0() const { return beta0_; }
  double amplitude() const { return amplitude_; }
  double half_width() const { return half_width_; }
  ProfileFamily family() const { return family_; }

  double mu(double s) const;
  double mu_dot(double s) const;
  double twist_velocity(double s) const { return beta0_ - mu(s); }

  double mu_sup() const { return amplitude_; }
  // Cached at construction (golden-section search on [0, s0]).
  double mu_dot_sup() const { return mu_dot_sup_; }

 private:
  double beta0_;
  double amplitude_;
  double half_width_;
  ProfileFamily family_;
  double mu_dot_sup_ = 0.0;
};

inline double mu(const TwistProfile& p, double s) { return p.mu(s); }
inline double mu_dot(const TwistProfile& p, double s) { return p.mu_dot(s); }

struct Admissibility {
  double c = 0.0;
  double gamma = 0.0;
  double alpha_sq = 0.0;
  bool theorem1_ok = false;
  bool theorem2_ok = false;
  std::vector<std::string> messages;
};

// Diagnostic only, never throws.
Admissibility check_admissibility(const TwistProfile& profile, double c, double gamma,
                                  double alpha_sq);

}  // namespace twisttube
