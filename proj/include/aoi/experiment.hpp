#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "aoi/dp.hpp"
#include "aoi/policies.hpp"
#include "aoi/sim.hpp"
#include "aoi/system.hpp"

namespace aoi {

/// Semantic version of the library and the `aoi` tool.
const char* version() noexcept;

/// One entry of a config's policy list. Text form:
///   whittle | round_robin | randomized(p1,...,pN) | max_age | cycle(i1,i2,...) | dp
/// Cycle entries are 1-based in text and 0-based in `actions`.
struct PolicySpec {
  enum class Kind { whittle, round_robin, randomized, max_age, cycle, dp };
  Kind kind = Kind::whittle;
  std::vector<double> probs;
  std::vector<SourceIndex> actions;

  static PolicySpec parse(std::string_view text);
  std::string to_string() const;
  /// The simulated policy; not available for `dp`.
  Policy make(const SystemSpec& spec) const;
  bool operator==(const PolicySpec&) const = default;
};

struct DpConfig {
  bool enabled = true;
  /// Fixed cap; when unset the solver picks one and doubles it as needed.
  std::optional<Age> a_max;
  std::int64_t memory_budget_mb = 4096;
  bool operator==(const DpConfig&) const = default;
};

struct ExperimentConfig {
  std::string name;
  std::vector<Source> sources;
  std::vector<PolicySpec> policies;
  std::int64_t horizon = 500;
  /// Unset means 500 when some channel is unreliable, else 1.
  std::optional<std::int64_t> runs;
  std::uint64_t seed = 1;
  std::optional<DpConfig> dp;

  std::int64_t effective_runs() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the YAML config format. Errors are config errors whose message
/// starts with the offending field path, e.g. "sources[2].p: ...".
ExperimentConfig parse_config(std::string_view yaml);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical YAML: fixed key order, shortest round-trip numbers.
std::string serialize_config(const ExperimentConfig& config);
/// Hex SHA-256 of serialize_config(config).
std::string config_hash(const ExperimentConfig& config);
/// Structural checks beyond parsing (policy arity, dp references, ranges).
void validate_config(const ExperimentConfig& config);

/// Cost function from the compact command-line form
/// "kind=linear weight=13" or "kind=table values=[1,2,7,7]".
CostFunction parse_cost_text(std::string_view text);

struct RunOptions {
  unsigned threads = 1;
  /// Skips the bounded-cost precheck; overflow then surfaces per policy.
  bool allow_divergent = false;
};

struct PolicyOutcome {
  PolicySpec spec;
  /// Monte Carlo (or exact, for reliable deterministic runs) result. For the
  /// dp entry this carries the exact optimal cost with runs = 0.
  SimulationResult result;
  std::optional<Cycle> cycle;
  std::optional<std::string> cycle_error;
  /// Strong-switch violations found on `cycle`.
  std::optional<std::size_t> switch_violations;
  std::optional<std::string> error;
};

struct ResultBundle {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<PolicyOutcome> outcomes;
  std::optional<DpSolution> dp;
  std::optional<Cycle> dp_cycle;
  std::optional<std::string> dp_cycle_error;
  std::optional<std::size_t> dp_switch_violations;
};

/// DP first (when enabled), then every non-dp policy through the simulator;
/// reliable deterministic policies also get their recurrent cycle.
ResultBundle run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Shortest decimal string that parses back to the same double; "inf",
/// "-inf" and "nan" for non-finite values.
std::string format_double(double x);

inline constexpr const char* kCsvHeader = "setting,policy,mean_cost,stderr,runs,horizon,seed";
/// Header plus one row per policy.
std::string to_csv(const ResultBundle& bundle);
nlohmann::json to_json(const ResultBundle& bundle);

/// Writes <dir>/<name>.csv and <dir>/<name>.json, each via a temporary file
/// and rename. Returns the two paths.
std::pair<std::filesystem::path, std::filesystem::path> write_bundle(const ResultBundle& bundle,
                                                                     const std::filesystem::path& dir);
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Rebuilds the config stored in a JSON sidecar's provenance block.
ExperimentConfig config_from_provenance(const nlohmann::json& sidecar);

}  // namespace aoi
