#pragma once

#include <stmatch/domain.hpp>

#include <vector>

namespace stmatch {

/// One piece of max(0, max_j [eta_j - l_j(t)]) on [t0, t1] where the capacity rate is constant.
/// winner is the type index or -1 when the station idles; value(t) = intercept + slope * t.
struct EnvelopeSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  int winner = -1;
  double slope = 0.0;
  double intercept = 0.0;
  double rate = 0.0;
  bool tied = false;

  double value(double t) const { return intercept + slope * t; }
  double length() const { return t1 - t0; }
  double capacity_mass() const { return rate * (t1 - t0); }
  /// Integral of value * rate over the segment.
  double value_integral() const { return rate * 0.5 * (value(t0) + value(t1)) * (t1 - t0); }
};

using StationEnvelope = std::vector<EnvelopeSegment>;

/// Interval of constant capacity rate on which each type's cost is affine or absent.
struct ElementaryInterval {
  double t0 = 0.0;
  double t1 = 0.0;
  double rate = 0.0;
  std::vector<char> present;        // per type: cost finite on this interval
  std::vector<double> cost_slope;   // per type
  std::vector<double> cost_offset;  // per type: l_j(t) = offset + slope * t
};

/// Exact and smoothed evaluation of the temporal plus-max term for every station.
class TemporalModel {
 public:
  TemporalModel(const std::vector<CapacityProfile>& profiles,
                const std::vector<TemporalCostSpec>& costs);
  explicit TemporalModel(const Scenario& scenario);

  int station_count() const { return static_cast<int>(intervals_.size()); }
  int type_count() const { return types_; }
  const std::vector<ElementaryInterval>& intervals(int station) const { return intervals_[station]; }

  /// Upper envelope of {0} and {eta_j - l_j}; ties go to the lowest type, types beat idling.
  StationEnvelope envelope(int station, const Vector& eta_row) const;

  /// Exact value of the station's term; gradient receives capacity mass per type.
  double value(int station, const Vector& eta_row, Vector* gradient) const;

  /// Softplus-of-softmax surrogate integrated by fixed Gauss-Legendre panels.
  double smoothed(int station, const Vector& eta_row, double eps, Vector* gradient) const;

 private:
  int types_ = 0;
  std::vector<std::vector<ElementaryInterval>> intervals_;
};

/// eps * log(1 + sum_j exp(a_j / eps)), evaluated stably.
double smooth_plus_max(const double* a, int count, double eps, double* weights = nullptr);
/// max(0, max_j a_j).
double plus_max(const double* a, int count);

}  // namespace stmatch
