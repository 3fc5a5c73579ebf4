#pragma once

#include <string>
#include <vector>

#include "aoi/dp.hpp"
#include "aoi/sim.hpp"
#include "aoi/system.hpp"

namespace aoi {

struct StateAction {
  AgeVector state;
  SourceIndex action = 0;
};

/// Finite policy fragment with distinct states.
struct StateActionSet {
  std::vector<StateAction> pairs;

  static StateActionSet from_cycle(const Cycle& cycle);
};

/// `dominant` has a larger-or-equal age for `base.action` and smaller-or-equal
/// ages elsewhere, yet is assigned a different action.
struct SwitchViolation {
  StateAction base;
  StateAction dominant;
  SourceIndex implied_action = 0;
};

/// Exhaustive pairwise strong-switch check; one witness per violating pair.
std::vector<SwitchViolation> check_strong_switch(const StateActionSet& set);

/// Average cost of the reliable-channel cycle that serves source 1 k times
/// and then source 2 once:
/// (sum_{j<=k+1} f2(j) + k f1(1) + f1(2)) / (k+1).
double two_source_cycle_cost(const CostFunction& f1, const CostFunction& f2, std::int64_t k);

struct TwoSourceCycle {
  /// Source served k times in a row (0 or 1).
  SourceIndex leader = 0;
  std::int64_t k = 1;
  double cost = 0.0;

  /// The corresponding schedule: leader k times, then the other source.
  std::vector<SourceIndex> actions() const;
};

/// Minimises two_source_cycle_cost over both orientations and k in
/// [1, k_max]; ties prefer smaller k, then leader 0. Throws inconclusive when
/// the minimiser sits at k_max.
TwoSourceCycle best_two_source_cycle(const CostFunction& f1, const CostFunction& f2, std::int64_t k_max = 1000);

struct Theorem3Certificate {
  Cycle whittle_cycle;
  TwoSourceCycle best_cycle;
  double dp_cost = 0.0;
  Age dp_a_max = 0;
  /// Whittle cycle read as "leader k times, then the other once".
  SourceIndex whittle_leader = 0;
  std::int64_t whittle_k = 0;
  /// Whittle index values backing the switching inequalities.
  std::vector<std::pair<std::string, double>> index_values;
};

struct CertifyOptions {
  double cycle_tolerance = 1e-6;
  /// Relative tolerance for the finite-horizon DP against the cycle cost.
  double dp_relative_tolerance = 0.01;
  std::int64_t horizon = 500;
  std::int64_t k_max = 1000;
};

/// Checks, for two reliable sources, that the Whittle cycle, the best
/// enumerated cycle and the finite-horizon DP agree, that the Whittle cycle
/// has the "k then one" form, and that the index inequalities hold at the
/// realised k. Throws a certification error naming the failed check.
Theorem3Certificate certify_theorem3(const CostFunction& f1, const CostFunction& f2,
                                     const CertifyOptions& options = {});

}  // namespace aoi
