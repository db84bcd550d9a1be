#pragma once

#include <stmatch/domain.hpp>

#include <cstddef>
#include <functional>
#include <vector>

namespace stmatch {

inline constexpr std::size_t kDefaultOracleCap = 10000;

struct DemandAtom {
  int cell = 0;
  int type = 0;
  double mass = 0.0;
};

struct TimeBin {
  int station = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  double capacity = 0.0;
};

/// Flow variable from an atom to a bin with value r - delta - l(bin midpoint).
struct OracleVariable {
  int atom = 0;
  int bin = 0;
  double value = 0.0;
};

struct DiscreteInstance {
  std::vector<DemandAtom> atoms;
  std::vector<TimeBin> bins;
  std::vector<OracleVariable> variables;
};

/// One atom per positive-mass (cell, type) of the scenario grid and `bins` equal time bins
/// per station. Throws SizeLimitError when atoms x bins exceeds cap.
DiscreteInstance discretize(const Scenario& scenario, int bins, std::size_t cap = kDefaultOracleCap);

struct LpSolution {
  double value = 0.0;
  Vector flows;          // per variable
  Vector atom_duals;     // per atom, >= 0
  Vector bin_duals;      // per bin, >= 0
  double dual_value = 0.0;
  double certificate_gap = 0.0;  // (dual - primal) / max(1, |primal|)
  int pivots = 0;
};

/// Maximizes sum v * pi subject to atom masses and bin capacities with a dense simplex
/// and returns a dual certificate. Variables with v <= 0 are never used.
/// Throws SizeLimitError above cap and NumericalError if the simplex fails.
LpSolution solve_lp(const DiscreteInstance& instance, std::size_t cap = kDefaultOracleCap);

struct ParityRow {
  int level = 0;
  std::size_t variables = 0;
  double lp_value = 0.0;
  double solver_welfare = 0.0;
  double gap = 0.0;  // |lp - welfare| / max(1, lp)
  double certificate_gap = 0.0;
};

struct OracleLevel {
  int level = 0;
  int bins = 1;
};

/// Compares the LP optimum with the dual solver's welfare on scenarios built per level.
std::vector<ParityRow> oracle_parity(const std::function<Scenario(int level)>& make_scenario,
                                     const std::vector<OracleLevel>& levels,
                                     std::size_t cap = kDefaultOracleCap);

}  // namespace stmatch
