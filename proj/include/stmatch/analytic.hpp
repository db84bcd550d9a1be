#pragma once

#include <stmatch/common.hpp>

#include <utility>
#include <vector>

namespace stmatch {

/// Two stations at the ends of [0, 1], capacities c1 and c2, waiting cost alpha * w * t.
struct HotellingParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double w = 1.0;
  double r = 1.0;
};

void validate(const HotellingParams& params);

enum class HotellingRegime { Partial, Adjacent, Complete };

const char* to_string(HotellingRegime regime);

struct HomogeneousSolution {
  HotellingRegime regime = HotellingRegime::Partial;
  double x1 = 0.0;  // station 1 serves [0, x1]
  double x2 = 0.0;  // station 2 serves [1 - x2, 1]
  double welfare = 0.0;
  double threshold = 0.0;  // reward at which service becomes complete
};

HomogeneousSolution hotelling_homogeneous(const HotellingParams& params);

/// Boundaries for uniformly distributed sensitivity alpha in [0, 1]: station 1 serves
/// [0, f1(alpha)] and station 2 serves [1 - f2(alpha), 1].
class UniformSolution {
 public:
  explicit UniformSolution(const HotellingParams& params);

  HotellingRegime regime() const { return regime_; }
  double lambda() const { return lambda_; }
  double critical_reward() const { return r_c_; }
  /// Threshold sensitivity where the regions separate; only meaningful when Adjacent.
  double alpha_hat() const { return alpha_hat_; }
  double kappa() const { return kappa_; }

  double f1(double alpha) const;
  double f2(double alpha) const;

 private:
  HotellingParams p_;
  HotellingRegime regime_;
  double lambda_;
  double r_c_;
  double alpha_hat_ = 0.0;
  double kappa_ = 0.0;
};

UniformSolution hotelling_uniform(const HotellingParams& params);

/// Reward above which every type is served in the uniform model.
double hotelling_critical_reward(double c1, double c2, double w);
/// Right-hand side of the equation defining alpha_hat, as a function of alpha.
double hotelling_alpha_hat_rhs(double c1, double c2, double w, double alpha);

struct BoundaryLimits {
  double w_to_zero = 0.5;
  double w_to_infinity = 0.5;
  bool monotone = true;
  std::vector<std::pair<double, double>> samples;  // (w, f1(alpha))
};

/// Complete-service boundary of station 1 at the given alpha across a logarithmic w-grid.
BoundaryLimits hotelling_boundary_limits(double c1, double c2, double alpha = 1.0, int points = 81);

/// Numerically stable cosh(a) / cosh(b).
double cosh_ratio(double a, double b);
/// Numerically stable sinh(a) / sinh(b) for a, b > 0.
double sinh_ratio(double a, double b);

}  // namespace stmatch
