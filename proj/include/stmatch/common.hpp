#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace stmatch {

using Vec2 = Eigen::Vector2d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dual weights eta: one row per station, one column per demand type.
using WeightMatrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Malformed input file (syntax, missing field, wrong type).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A well-formed input that violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation called on a scenario outside its modelling assumptions.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure that must not be silently approximated.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spatial and temporal masses of a plan disagree beyond tolerance.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The envelope has an argmax tie over an interval of positive length.
class DegenerateTieError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discretized instance larger than the configured variable cap.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stmatch
