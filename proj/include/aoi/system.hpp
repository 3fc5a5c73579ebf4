#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aoi/cost.hpp"

namespace aoi {

/// Source indices are 0-based in the C++ API. Text formats (configs, CSV,
/// JSON, CLI) number sources from 1.
using SourceIndex = std::size_t;

/// One age per source, each >= 1.
using AgeVector = std::vector<Age>;

struct AgeVectorHash {
  std::size_t operator()(const AgeVector& ages) const noexcept;
};

struct Source {
  CostFunction cost;
  double p = 1.0;
  bool operator==(const Source&) const = default;
};

class SystemSpec {
 public:
  SystemSpec() = default;
  /// Rejects empty specs, p outside (0, 1] and unbounded-cost sources.
  explicit SystemSpec(std::vector<Source> sources);
  /// Same checks minus the bounded-cost test. Averages may diverge; used to
  /// demonstrate exactly that.
  static SystemSpec allow_divergent(std::vector<Source> sources);

  std::size_t size() const noexcept { return sources_.size(); }
  const Source& operator[](SourceIndex i) const { return sources_.at(i); }
  const std::vector<Source>& sources() const noexcept { return sources_; }
  bool all_reliable() const noexcept;

  /// Sum_i f_i(ages[i]).
  double cost(std::span<const Age> ages) const;
  void validate_ages(std::span<const Age> ages) const;

  bool operator==(const SystemSpec&) const = default;

 private:
  SystemSpec(std::vector<Source> sources, bool check_bounded);
  std::vector<Source> sources_;
};

/// Reliable-channel transition: the served source resets to 1, the rest age.
AgeVector step_reliable(std::span<const Age> ages, SourceIndex served);

AgeVector ones(std::size_t n);

/// Recurrent part of a deterministic trajectory. Applying actions[k] at
/// states[k] leads to states[(k + 1) % length()].
struct Cycle {
  std::vector<AgeVector> states;
  std::vector<SourceIndex> actions;
  double average_cost = 0.0;
  /// Steps before the first cycle state was reached.
  std::size_t transient_length = 0;

  std::size_t length() const noexcept { return states.size(); }
};

/// (sum over cycle states of the state cost) / length.
double cycle_average_cost(const SystemSpec& spec, std::span<const AgeVector> states);

std::string format_ages(std::span<const Age> ages);

}  // namespace aoi
