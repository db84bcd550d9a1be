#pragma once

#include <stmatch/analytic.hpp>
#include <stmatch/domain.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace stmatch {

enum class CapacityShape { Constant, Hump };

struct SiteClass {
  std::string name;
  int count = 1;
  double capacity_share = 1.0;  // fraction of total capacity
};

struct GeneratorSpec {
  std::uint64_t seed = 1;
  SpatialGrid grid{0.0, 20.0, 0.0, 20.0, 30, 30};
  int blobs_per_type = 3;
  std::vector<SiteClass> site_classes{{"city", 3, 0.6}, {"hospital", 2, 0.4}};
  CapacityShape capacity_shape = CapacityShape::Hump;
  int capacity_pieces = 30;
  double hump_peak = 0.2;  // fraction of the horizon where capacity peaks
  double horizon_start = 0.0;
  double horizon_end = 300.0;
  double total_demand = 1.65;
  double capacity_ratio = 2.19 / 1.65;  // total capacity / total demand
  std::vector<double> type_weights{0.17, 0.33, 0.30, 0.20};
  std::vector<double> sensitivities;    // per type; empty means derived from ages
  std::vector<double> ages{75.0, 52.0, 30.0, 10.0};
  double cost_base = 0.1;
  SpatialCostSpec spatial_cost{1.0, 1.0};
  double reward = 0.0;  // <= 0: large enough that every agent is worth serving

  void validate() const;
};

/// Fatality rate in percent, log10 IFR% = -3.27 + 0.0524 * age.
double ifr_percent(double age);

/// Default study shape with the given seed.
GeneratorSpec vaccination_spec(std::uint64_t seed = 1);

/// Gaussian blob demand, sites in classes with shared capacity profiles, linear costs
/// cost_base * (1 + 2 IFR%) * t starting at the horizon start.
Scenario generate(const GeneratorSpec& spec);

/// Interval [0, 1] embedded as a one-row grid with stations at both ends. With uniform
/// sensitivity the types sit at alpha_j = (m - j - 0.5) / m, otherwise every type has 1.
Scenario hotelling_scenario(const HotellingParams& params, int types = 1, int cells = 400,
                            bool uniform_sensitivity = false);

/// Single station with demand masses 12, 15, 19, two-sided costs b = 2, h = 1,
/// sensitivities (1, 0.7, 0.5), rate 8 and a reward large enough to serve everyone.
Scenario three_type_scenario();

}  // namespace stmatch
