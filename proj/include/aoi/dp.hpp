#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aoi/policies.hpp"
#include "aoi/system.hpp"

namespace aoi {

/// Ages 1..a_max for each of n sources, flattened in mixed radix with
/// source 0 varying fastest.
class TruncatedBox {
 public:
  TruncatedBox(Age a_max, std::size_t n);

  Age a_max() const noexcept { return a_max_; }
  std::size_t sources() const noexcept { return n_; }
  std::size_t states() const noexcept { return states_; }
  bool contains(std::span<const Age> ages) const noexcept;
  std::size_t index(std::span<const Age> ages) const;
  AgeVector decode(std::size_t index) const;

 private:
  Age a_max_;
  std::size_t n_;
  std::size_t states_;
};

/// Per-source age cap used when none is given: 30 for up to two sources,
/// 20 for three, 15 for four, 10 beyond.
Age default_a_max(std::size_t sources);

struct DpOptions {
  std::size_t memory_budget_bytes = std::size_t{4} << 30;
  bool keep_stage_tables = false;
  unsigned threads = 1;
};

struct DpSolution {
  double optimal_average_cost = 0.0;
  std::int64_t horizon = 0;
  AgeVector initial;
  Age a_max = 0;
  /// First-slot optimal action for every box state, by TruncatedBox index.
  std::vector<std::uint8_t> first_stage_actions;
  /// stage_tables[t] holds slot t+1's actions; filled only on request.
  std::vector<std::vector<std::uint8_t>> stage_tables;
  /// Expected cost of each slot along the optimal trajectory.
  std::vector<double> expected_slot_costs;
  /// Reliable channels only: the deterministic optimal trajectory and the
  /// action taken in each slot.
  std::vector<AgeVector> optimal_path;
  std::vector<SourceIndex> optimal_actions;
  /// Largest per-slot probability that the optimal trajectory sits on a
  /// state with some age at the cap.
  double truncation_report = 0.0;
  std::optional<std::string> warning;

  TruncatedBox box() const { return TruncatedBox(a_max, initial.size()); }
  SourceIndex action(std::span<const Age> ages) const;
  /// First-slot actions as a tabular policy (Whittle fallback outside the box).
  Policy as_policy() const;
};

/// Bytes the solver would allocate for this problem.
std::size_t dp_memory_estimate(std::size_t states, std::int64_t horizon, std::size_t sources);

/// Backward induction over the box. The slot cost sum_i f_i(A_i) is charged
/// on the state at the start of each slot; ages at the cap stay there when
/// not reset.
DpSolution finite_horizon_dp(const SystemSpec& spec, std::int64_t horizon, const TruncatedBox& box,
                             const AgeVector& initial, const DpOptions& options = {});

/// finite_horizon_dp from all-ones, starting at default_a_max and doubling
/// the cap while the truncation report exceeds 1e-6 and memory allows.
DpSolution solve_dp(const SystemSpec& spec, std::int64_t horizon, std::optional<Age> a_max = {},
                    const DpOptions& options = {});

/// Recurrent cycle of the optimal trajectory, read from the middle of the
/// horizon so neither the start-up transient nor the end-of-horizon
/// behaviour leaks in. Reliable channels only.
Cycle extract_cycle_policy(const DpSolution& sol, const SystemSpec& spec);

}  // namespace aoi
