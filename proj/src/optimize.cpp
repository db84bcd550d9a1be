#include <stmatch/optimize.hpp>

#include <algorithm>
#include <cmath>
#include <deque>

namespace stmatch {

namespace {

struct Memory {
  std::deque<Vector> s, y;
  std::deque<double> rho;
  int capacity = 10;

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }

  void push(const Vector& sv, const Vector& yv) {
    const double sy = sv.dot(yv);
    if (!(sy > 1e-14 * sv.norm() * yv.norm())) return;
    if (static_cast<int>(s.size()) == capacity) {
      s.pop_front();
      y.pop_front();
      rho.pop_front();
    }
    s.push_back(sv);
    y.push_back(yv);
    rho.push_back(1.0 / sy);
  }

  /// Two-loop recursion: returns -H * g, with coordinates outside mask zeroed.
  Vector direction(const Vector& g, const std::vector<char>* mask) const {
    auto apply_mask = [&](Vector& v) {
      if (!mask) return;
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!(*mask)[i]) v[i] = 0.0;
    };
    Vector q = g;
    apply_mask(q);
    const int k = static_cast<int>(s.size());
    std::vector<double> alpha(k);
    for (int i = k - 1; i >= 0; --i) {
      Vector si = s[i], yi = y[i];
      apply_mask(si);
      apply_mask(yi);
      alpha[i] = rho[i] * si.dot(q);
      q -= alpha[i] * yi;
    }
    if (k > 0) {
      Vector yl = y.back(), sl = s.back();
      apply_mask(yl);
      apply_mask(sl);
      const double yy = yl.dot(yl);
      const double sy = sl.dot(yl);
      if (yy > 0.0 && sy > 0.0) q *= sy / yy;
    }
    for (int i = 0; i < k; ++i) {
      Vector si = s[i], yi = y[i];
      apply_mask(si);
      apply_mask(yi);
      const double beta = rho[i] * yi.dot(q);
      q += (alpha[i] - beta) * si;
    }
    apply_mask(q);
    return -q;
  }
};

struct Trial {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;
  Vector x, g;
};

double cubic_step(const Trial& lo, const Trial& hi) {
  const double width = hi.a - lo.a;
  const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
  const double disc = d1 * d1 - lo.d * hi.d;
  double a = 0.5 * (lo.a + hi.a);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), width);
    const double denom = hi.d - lo.d + 2.0 * d2;
    if (denom != 0.0) a = hi.a - width * (hi.d + d2 - d1) / denom;
  }
  const double left = std::min(lo.a, hi.a);
  const double right = std::max(lo.a, hi.a);
  const double guard = 0.1 * (right - left);
  if (!(a > left + guard && a < right - guard)) a = 0.5 * (lo.a + hi.a);
  return a;
}

/// Strong Wolfe search along d, accepting the approximate Wolfe conditions when the
/// function change is below rounding level.
bool wolfe_search(const ObjectiveFn& fn, const Vector& x, double f0, const Vector& g0,
                  const Vector& d, double a0, const LbfgsOptions& opt, int& evals, Trial& out) {
  const double d0 = g0.dot(d);
  const double noise = 1e-12 * std::max(1.0, std::abs(f0));
  auto eval = [&](double a) {
    Trial t;
    t.a = a;
    t.x = x + a * d;
    t.g.resize(x.size());
    t.f = fn(t.x, t.g);
    t.d = t.g.dot(d);
    ++evals;
    return t;
  };
  auto sufficient = [&](const Trial& t) {
    if (t.f <= f0 + opt.c1 * t.a * d0) return true;
    return t.f <= f0 + noise && t.d <= (2.0 * opt.c1 - 1.0) * d0;
  };
  auto curvature = [&](const Trial& t) { return std::abs(t.d) <= -opt.c2 * d0; };

  auto zoom = [&](Trial lo, Trial hi) -> bool {
    for (int k = 0; k < opt.max_line_search; ++k) {
      Trial t = eval(cubic_step(lo, hi));
      if (!std::isfinite(t.f)) {
        hi = t;
        continue;
      }
      if (!sufficient(t) || t.f >= lo.f + noise) {
        hi = t;
      } else {
        if (curvature(t)) {
          out = t;
          return true;
        }
        if (t.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = t;
      }
      if (std::abs(hi.a - lo.a) <= 1e-16 * std::max(1.0, lo.a)) break;
    }
    if (lo.a > 0.0 && lo.f < f0) {
      out = lo;
      return true;
    }
    return false;
  };

  Trial prev;
  prev.a = 0.0;
  prev.f = f0;
  prev.d = d0;
  prev.x = x;
  prev.g = g0;
  double a = a0;
  for (int k = 0; k < opt.max_line_search; ++k) {
    Trial t = eval(a);
    if (!std::isfinite(t.f)) {
      a = 0.5 * (prev.a + a);
      continue;
    }
    if (!sufficient(t) || (k > 0 && t.f >= prev.f)) return zoom(prev, t);
    if (curvature(t)) {
      out = t;
      return true;
    }
    if (t.d >= 0.0) return zoom(t, prev);
    prev = t;
    a *= 2.0;
  }
  if (prev.a > 0.0) {
    out = prev;
    return true;
  }
  return false;
}

LbfgsResult run_unbounded(const ObjectiveFn& fn, Vector x, const LbfgsOptions& opt,
                          const StopFn& stop, const IterationFn& on_iteration) {
  LbfgsResult res;
  Vector g(x.size());
  double f = fn(x, g);
  res.evaluations = 1;
  Memory mem;
  mem.capacity = opt.memory;
  bool done = stop && stop(x, f, g);
  while (!done && res.iterations < opt.max_iterations) {
    Vector d = mem.direction(g, nullptr);
    if (!(g.dot(d) < 0.0)) {
      mem.clear();
      d = -g;
    }
    double a0 = 1.0;
    if (mem.s.empty()) a0 = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    Trial t;
    bool ok = wolfe_search(fn, x, f, g, d, a0, opt, res.evaluations, t);
    if (!ok && !mem.s.empty()) {
      mem.clear();
      d = -g;
      ok = wolfe_search(fn, x, f, g, d, 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>()), opt,
                        res.evaluations, t);
    }
    if (!ok) {
      res.message = "line search failed";
      break;
    }
    mem.push(t.x - x, t.g - g);
    x = t.x;
    f = t.f;
    g = t.g;
    ++res.iterations;
    if (on_iteration) on_iteration(x, f, g);
    done = stop && stop(x, f, g);
  }
  res.x = x;
  res.f = f;
  res.grad = g;
  res.converged = done;
  if (done) res.message = "converged";
  else if (res.message.empty()) res.message = "iteration budget exhausted";
  return res;
}

LbfgsResult run_bounded(const ObjectiveFn& fn, Vector x, const LbfgsOptions& opt,
                        const StopFn& stop, const IterationFn& on_iteration, const Vector& lower) {
  LbfgsResult res;
  x = x.cwiseMax(lower);
  Vector g(x.size());
  double f = fn(x, g);
  res.evaluations = 1;
  Memory mem;
  mem.capacity = opt.memory;
  std::vector<char> free(x.size());
  bool done = stop && stop(x, f, g);
  int stalls = 0;
  while (!done && res.iterations < opt.max_iterations) {
    for (Eigen::Index i = 0; i < x.size(); ++i) free[i] = !(x[i] <= lower[i] && g[i] >= 0.0);
    Vector d = mem.direction(g, &free);
    if (!(g.dot(d) < 0.0)) {
      mem.clear();
      d = -g;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!free[i]) d[i] = 0.0;
    }
    if (d.lpNorm<Eigen::Infinity>() == 0.0) {
      res.message = "stationary";
      break;
    }
    double a = mem.s.empty() ? 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>()) : 1.0;
    Vector xn, gn(x.size());
    double fn_val = f;
    bool accepted = false;
    for (int k = 0; k < opt.max_line_search; ++k) {
      xn = (x + a * d).cwiseMax(lower);
      fn_val = fn(xn, gn);
      ++res.evaluations;
      const double decrease = g.dot(xn - x);
      if (std::isfinite(fn_val) &&
          (fn_val <= f + opt.c1 * decrease ||
           (fn_val <= f + 1e-12 * std::max(1.0, std::abs(f)) && gn.dot(xn - x) <= 0.0))) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) {
      if (!mem.s.empty() && stalls == 0) {
        mem.clear();
        ++stalls;
        continue;
      }
      res.message = "line search failed";
      break;
    }
    stalls = 0;
    mem.push(xn - x, gn - g);
    x = xn;
    f = fn_val;
    g = gn;
    ++res.iterations;
    if (on_iteration) on_iteration(x, f, g);
    done = stop && stop(x, f, g);
  }
  res.x = x;
  res.f = f;
  res.grad = g;
  res.converged = done;
  if (done) res.message = "converged";
  else if (res.message.empty()) res.message = "iteration budget exhausted";
  return res;
}

}  // namespace

LbfgsResult minimize_lbfgs(const ObjectiveFn& f, Vector x0, const LbfgsOptions& options,
                           const StopFn& stop, const IterationFn& on_iteration,
                           const std::optional<Vector>& lower) {
  if (lower) return run_bounded(f, std::move(x0), options, stop, on_iteration, *lower);
  return run_unbounded(f, std::move(x0), options, stop, on_iteration);
}

}  // namespace stmatch
