#include <stmatch/analytic.hpp>

#include <cmath>
#include <sstream>

namespace stmatch {

namespace {

double coth(double x) { return 1.0 / std::tanh(x); }

double csch(double x) {
  const double e = std::exp(-x);
  return 2.0 * e / (-std::expm1(-2.0 * x));
}

double complete_f1(const HotellingParams& p, double lambda, double alpha) {
  const double s = p.c1 + p.c2;
  return (p.c2 - p.c1) / (2.0 * s) * cosh_ratio(lambda * (1.0 - alpha), lambda) + p.c1 / s;
}

}  // namespace

double cosh_ratio(double a, double b) {
  a = std::abs(a);
  b = std::abs(b);
  return std::exp(a - b) * (1.0 + std::exp(-2.0 * a)) / (1.0 + std::exp(-2.0 * b));
}

double sinh_ratio(double a, double b) {
  return std::exp(a - b) * std::expm1(-2.0 * a) / std::expm1(-2.0 * b);
}

void validate(const HotellingParams& p) {
  if (!(p.c1 > 0.0) || !(p.c2 > 0.0) || !std::isfinite(p.c1) || !std::isfinite(p.c2))
    throw ValidationError("Hotelling capacities must be positive");
  if (!(p.w >= 0.0) || !std::isfinite(p.w)) throw ValidationError("Hotelling waiting cost must be nonnegative");
  if (!(p.r >= 0.0) || !std::isfinite(p.r)) throw ValidationError("Hotelling reward must be nonnegative");
}

const char* to_string(HotellingRegime regime) {
  switch (regime) {
    case HotellingRegime::Partial: return "partial";
    case HotellingRegime::Adjacent: return "adjacent";
    case HotellingRegime::Complete: return "complete";
  }
  return "partial";
}

HomogeneousSolution hotelling_homogeneous(const HotellingParams& p) {
  validate(p);
  const double c1 = p.c1, c2 = p.c2, w = p.w, r = p.r;
  const double denom = 2.0 * c1 * c2 + (c1 + c2) * w;
  HomogeneousSolution out;
  out.threshold = (w + c1) * (w + c2) / denom;
  if (r < out.threshold) {
    out.regime = HotellingRegime::Partial;
    out.x1 = r * c1 / (c1 + w);
    out.x2 = r * c2 / (c2 + w);
    out.welfare = c1 * r * r / (2.0 * (c1 + w)) + c2 * r * r / (2.0 * (c2 + w));
  } else {
    out.regime = HotellingRegime::Complete;
    out.x1 = 0.5 + (c1 - c2) * w / (2.0 * denom);
    out.x2 = 1.0 - out.x1;
    out.welfare = r - (c2 + w) * (c1 + w) / (2.0 * denom);
  }
  return out;
}

double hotelling_critical_reward(double c1, double c2, double w) {
  const double s = c1 + c2;
  const double lambda = std::sqrt(w * s / (2.0 * c1 * c2));
  const double d = c1 - c2;
  const double sech = lambda == 0.0 ? 1.0 : cosh_ratio(0.0, lambda);
  return (c1 * c1 + c2 * c2) / (s * s) + w / (2.0 * s) - d * d / (2.0 * s * s) * sech;
}

double hotelling_alpha_hat_rhs(double c1, double c2, double w, double alpha) {
  const double s = c1 + c2;
  const double lambda = std::sqrt(w * s / (2.0 * c1 * c2));
  const double k1 = std::sqrt(w / c1);
  const double k2 = std::sqrt(w / c2);
  const double a1 = coth(lambda * alpha);
  const double cs = csch(lambda * alpha);
  const double b1 = k1 * std::tanh(k1 * (1.0 - alpha));
  const double b2 = k2 * std::tanh(k2 * (1.0 - alpha));
  const double head = c2 / s + w * alpha * alpha / (2.0 * s) - w * alpha * a1 / (s * lambda) +
                      (c1 - c2) * w * alpha * cs / (2.0 * c1 * s * lambda);
  const double left = b2 * s + 2.0 * a1 * c1 * lambda - (c1 - c2) * lambda * cs;
  const double right = c1 - c2 + b1 * s * alpha + 2.0 * a1 * c2 * alpha * lambda;
  return head + left * right / (s * s * (b1 + b2 + 2.0 * a1 * lambda));
}

UniformSolution::UniformSolution(const HotellingParams& p) : p_(p) {
  validate(p);
  lambda_ = std::sqrt(p.w * (p.c1 + p.c2) / (2.0 * p.c1 * p.c2));
  r_c_ = hotelling_critical_reward(p.c1, p.c2, p.w);
  if (p.r <= 0.5) {
    regime_ = HotellingRegime::Partial;
    return;
  }
  if (p.r >= r_c_) {
    regime_ = HotellingRegime::Complete;
    return;
  }
  regime_ = HotellingRegime::Adjacent;
  auto g = [&](double a) { return hotelling_alpha_hat_rhs(p.c1, p.c2, p.w, a) - p.r; };
  double lo = 1e-8, hi = 1.0 - 1e-8;
  double glo = g(lo), ghi = g(hi);
  if (!(glo < 0.0 && ghi > 0.0) && !(glo > 0.0 && ghi < 0.0)) {
    const int steps = 10000;
    bool found = false;
    double prev_a = lo, prev_g = glo;
    for (int k = 1; k <= steps && !found; ++k) {
      const double a = lo + (hi - lo) * k / steps;
      const double ga = g(a);
      if ((prev_g < 0.0) != (ga < 0.0)) {
        lo = prev_a;
        hi = a;
        glo = prev_g;
        ghi = ga;
        found = true;
      }
      prev_a = a;
      prev_g = ga;
    }
    // Right at a regime edge the root sits inside the endpoint margin.
    if (!found && std::abs(glo) <= 1e-6 * p.r) {
      hi = lo;
      found = true;
    } else if (!found && std::abs(ghi) <= 1e-6 * p.r) {
      lo = hi;
      found = true;
    }
    if (!found) {
      std::ostringstream msg;
      msg << "alpha_hat root not bracketed on [1e-8, 1 - 1e-8]: rhs - r = " << glo << " .. " << ghi;
      throw NumericalError(msg.str());
    }
  }
  for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  alpha_hat_ = 0.5 * (lo + hi);
  const double s = p.c1 + p.c2;
  const double k1 = std::sqrt(p.w / p.c1);
  const double k2 = std::sqrt(p.w / p.c2);
  const double la = lambda_ * alpha_hat_;
  const double b1 = k1 * std::tanh(k1 * (1.0 - alpha_hat_));
  const double b2 = k2 * std::tanh(k2 * (1.0 - alpha_hat_));
  const double num = 2.0 * lambda_ * csch(la) * (p.c1 / s * std::cosh(la) - (p.c1 - p.c2) / (2.0 * s)) + b2;
  kappa_ = num / (2.0 * lambda_ * coth(la) + b2 + b1);
}

double UniformSolution::f1(double alpha) const {
  const double s = p_.c1 + p_.c2;
  const double k1 = std::sqrt(p_.w / p_.c1);
  switch (regime_) {
    case HotellingRegime::Partial: return p_.r * cosh_ratio((1.0 - alpha) * k1, k1);
    case HotellingRegime::Complete: return complete_f1(p_, lambda_, alpha);
    case HotellingRegime::Adjacent:
      if (alpha >= alpha_hat_) return kappa_ * cosh_ratio(k1 * (1.0 - alpha), k1 * (1.0 - alpha_hat_));
      return (p_.c2 - p_.c1) / (2.0 * s) * sinh_ratio(lambda_ * (alpha_hat_ - alpha), lambda_ * alpha_hat_) +
             (kappa_ - p_.c1 / s) * sinh_ratio(lambda_ * alpha, lambda_ * alpha_hat_) + p_.c1 / s;
  }
  return 0.0;
}

double UniformSolution::f2(double alpha) const {
  const double s = p_.c1 + p_.c2;
  const double k2 = std::sqrt(p_.w / p_.c2);
  switch (regime_) {
    case HotellingRegime::Partial: return p_.r * cosh_ratio((1.0 - alpha) * k2, k2);
    case HotellingRegime::Complete: return 1.0 - complete_f1(p_, lambda_, alpha);
    case HotellingRegime::Adjacent:
      if (alpha >= alpha_hat_) return (1.0 - kappa_) * cosh_ratio(k2 * (1.0 - alpha), k2 * (1.0 - alpha_hat_));
      return (p_.c1 - p_.c2) / (2.0 * s) * sinh_ratio(lambda_ * (alpha_hat_ - alpha), lambda_ * alpha_hat_) +
             (p_.c1 / s - kappa_) * sinh_ratio(lambda_ * alpha, lambda_ * alpha_hat_) + p_.c2 / s;
  }
  return 0.0;
}

UniformSolution hotelling_uniform(const HotellingParams& params) { return UniformSolution(params); }

BoundaryLimits hotelling_boundary_limits(double c1, double c2, double alpha, int points) {
  HotellingParams p{c1, c2, 0.0, 0.0};
  validate(p);
  BoundaryLimits out;
  out.w_to_zero = 0.5;
  out.w_to_infinity = c1 / (c1 + c2);
  const double direction = out.w_to_infinity - out.w_to_zero;
  double prev = out.w_to_zero;
  for (int k = 0; k < points; ++k) {
    const double w = std::pow(10.0, -4.0 + 8.0 * k / std::max(1, points - 1));
    p.w = w;
    const double lambda = std::sqrt(w * (c1 + c2) / (2.0 * c1 * c2));
    const double f = complete_f1(p, lambda, alpha);
    out.samples.emplace_back(w, f);
    if ((f - prev) * direction < -1e-14) out.monotone = false;
    const double lo = std::min(out.w_to_zero, out.w_to_infinity) - 1e-12;
    const double hi = std::max(out.w_to_zero, out.w_to_infinity) + 1e-12;
    if (f < lo || f > hi) out.monotone = false;
    prev = f;
  }
  return out;
}

}  // namespace stmatch
