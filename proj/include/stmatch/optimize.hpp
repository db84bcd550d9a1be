#pragma once

#include <stmatch/common.hpp>

#include <functional>
#include <optional>
#include <string>

namespace stmatch {

/// f(x) with its gradient written into grad.
using ObjectiveFn = std::function<double(const Vector& x, Vector& grad)>;
/// Returns true when (x, f, grad) is accepted as a solution.
using StopFn = std::function<bool(const Vector& x, double f, const Vector& grad)>;
/// Called once per accepted iterate.
using IterationFn = std::function<void(const Vector& x, double f, const Vector& grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 1000;
  int max_line_search = 40;
  double c1 = 1e-4;
  double c2 = 0.9;
};

struct LbfgsResult {
  Vector x;
  double f = 0.0;
  Vector grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

/// Limited-memory BFGS with a strong Wolfe line search. With lower bounds the method
/// switches to an active-set projected variant with Armijo backtracking.
LbfgsResult minimize_lbfgs(const ObjectiveFn& f, Vector x0, const LbfgsOptions& options,
                           const StopFn& stop, const IterationFn& on_iteration = {},
                           const std::optional<Vector>& lower = std::nullopt);

}  // namespace stmatch
