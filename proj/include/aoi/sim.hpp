#pragma once

#include <cstdint>
#include <vector>

#include "aoi/policies.hpp"
#include "aoi/system.hpp"

namespace aoi {

inline constexpr Age kSimulationAgeGuard = 1'000'000;

struct SimulationResult {
  double mean_cost = 0.0;
  /// Standard error of the per-run averages; 0 for a single run.
  double std_error = 0.0;
  std::int64_t runs = 0;
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  /// Mean time-average cost of each source; sums to mean_cost.
  std::vector<double> per_source_costs;
};

struct SimOptions {
  unsigned threads = 1;
  /// Whittle indices are tabulated up to this age; older ages are computed
  /// on demand.
  Age index_cap = 256;
};

/// Runs `runs` independent trajectories from all-ones ages. Slot t charges
/// sum_i f_i(A_i(t)) and then applies the served source's Bernoulli(p)
/// outcome. Run r draws from CounterRng(seed, r).
SimulationResult simulate(const SystemSpec& spec, const Policy& policy, std::int64_t horizon, std::int64_t runs,
                          std::uint64_t seed, const SimOptions& options = {});

/// Per-slot cost of a single run (slot 1 first).
std::vector<double> simulate_trace(const SystemSpec& spec, const Policy& policy, std::int64_t horizon,
                                   std::uint64_t seed, std::uint64_t run = 0);

/// Iterates a deterministic policy on reliable channels from all-ones until
/// (ages, schedule phase) repeats; returns the recurrent part.
Cycle detect_cycle(const SystemSpec& spec, const Policy& policy, std::size_t max_steps = 10'000'000);

struct DivergenceReport {
  std::vector<std::int64_t> horizons;
  /// Exact expected running average at each horizon; +inf once a cost
  /// leaves the representable range.
  std::vector<double> expected;
  /// Median over seeds of each seed's Monte Carlo mean running average.
  std::vector<double> median_of_means;
  /// Median over seeds of a single trajectory's running average.
  std::vector<double> median_single_path;
};

/// Running average cost at each horizon (strictly increasing horizons).
/// `runs` trajectories per seed, seeds 0..seeds-1.
DivergenceReport divergence_probe(const SystemSpec& spec, const Policy& policy,
                                  const std::vector<std::int64_t>& horizons, std::int64_t runs = 500,
                                  std::int64_t seeds = 100);

/// Exact expected running averages for a stationary randomized policy, from
/// each source's marginal age chain.
std::vector<double> expected_running_average(const SystemSpec& spec, const Policy& randomized,
                                             const std::vector<std::int64_t>& horizons);

}  // namespace aoi
