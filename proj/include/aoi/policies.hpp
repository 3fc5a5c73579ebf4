#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <variant>
#include <vector>

#include "aoi/rng.hpp"
#include "aoi/system.hpp"

namespace aoi {

/// Per-source index arrays: values[i][h - 1] is source i's index at age h.
/// Arrays may be shorter than the requested size when the cost leaves the
/// representable range first.
struct IndexTable {
  std::vector<std::vector<double>> values;

  std::size_t size() const noexcept { return values.size(); }
};

/// Whittle indices W_i(1..a_max) for every source.
IndexTable whittle_index_table(const SystemSpec& spec, Age a_max);

using StateActionTable = std::unordered_map<AgeVector, SourceIndex, AgeVectorHash>;

namespace policy {

/// argmax_i W_i(A_i); ties go to the lowest index. Ages past the table are
/// evaluated directly.
struct Whittle {
  std::shared_ptr<const IndexTable> table;
};

/// argmax_i F_i(A_i) for caller-supplied non-decreasing tables, held
/// constant past their last entry.
struct Index {
  std::shared_ptr<const IndexTable> table;
};

struct RoundRobin {
  std::vector<SourceIndex> order;
};

struct StationaryRandomized {
  std::vector<double> probs;
};

struct MaxAge {};

struct FixedCycle {
  std::vector<SourceIndex> actions;
};

struct Tabular {
  std::shared_ptr<const StateActionTable> table;
  /// Unlisted states defer to the Whittle decision when set.
  bool fallback = true;
};

}  // namespace policy

class Policy {
 public:
  using Variant = std::variant<policy::Whittle, policy::Index, policy::RoundRobin,
                               policy::StationaryRandomized, policy::MaxAge, policy::FixedCycle,
                               policy::Tabular>;

  Policy() : v_(policy::Whittle{}) {}
  template <class Alternative>
    requires std::is_constructible_v<Variant, Alternative&&>
  Policy(Alternative&& alt) : v_(std::forward<Alternative>(alt)) {}  // NOLINT(google-explicit-constructor)

  static Policy whittle() { return policy::Whittle{}; }
  static Policy whittle(const SystemSpec& spec, Age a_max);
  static Policy index(IndexTable table);
  static Policy round_robin(std::size_t n);
  static Policy round_robin(std::vector<SourceIndex> order) { return policy::RoundRobin{std::move(order)}; }
  static Policy randomized(std::vector<double> probs) {
    return policy::StationaryRandomized{std::move(probs)};
  }
  static Policy max_age() { return policy::MaxAge{}; }
  static Policy fixed_cycle(std::vector<SourceIndex> actions) { return policy::FixedCycle{std::move(actions)}; }
  static Policy tabular(StateActionTable table, bool fallback = true);

  const Variant& variant() const noexcept { return v_; }
  /// Short label used in reports: whittle, round_robin, randomized, ...
  std::string name() const;
  bool is_deterministic() const noexcept;
  /// Length of the time-periodic schedule (round robin, fixed cycle), else 1.
  std::size_t period() const noexcept;

  /// Checks the policy parameters against spec (sizes, probabilities, indices).
  void validate(const SystemSpec& spec) const;

 private:
  Variant v_;
};

/// Chooses the source to serve in slot t. rng is only consulted by the
/// stationary randomized variant and may be null otherwise.
SourceIndex decide(const Policy& policy, const SystemSpec& spec, std::span<const Age> ages,
                   std::uint64_t t, CounterRng* rng = nullptr);

/// Lowest index among the maxima.
SourceIndex argmax_lowest(std::span<const double> values);

}  // namespace aoi
