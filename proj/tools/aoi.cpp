// aoi: command-line front end for the age-of-information scheduling library.
//
// Exit codes: 0 success, 1 usage or config error, 2 verification failure,
// 3 capacity or convergence error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "aoi/decoupled.hpp"
#include "aoi/errors.hpp"
#include "aoi/experiment.hpp"
#include "aoi/structure.hpp"

namespace fs = std::filesystem;
using aoi::ErrorKind;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kVerifyFailed = 2;
constexpr int kSolverFailed = 3;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::certification:
    case ErrorKind::inconclusive:
    case ErrorKind::non_cyclic:
      return kVerifyFailed;
    case ErrorKind::capacity:
    case ErrorKind::convergence:
    case ErrorKind::consistency:
      return kSolverFailed;
    default:
      return kUsage;
  }
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("AOI_OUT_DIR"); env && *env) return env;
  return "results";
}

std::string two_decimals(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

json cycle_to_json(const aoi::Cycle& c) {
  json states = json::array();
  for (const auto& s : c.states) states.push_back(s);
  json actions = json::array();
  for (auto a : c.actions) actions.push_back(a + 1);
  return {{"length", c.length()}, {"average_cost", c.average_cost}, {"states", states}, {"actions", actions}};
}

// Accepts {"pairs": [{"state": [...], "action": k}, ...]}, a cycle object
// {"states": [...], "actions": [...]}, or a `run` sidecar (every cycle in it).
std::vector<std::pair<std::string, aoi::StateActionSet>> sets_from_json(const json& j) {
  const auto from_cycle = [](const json& c) {
    aoi::StateActionSet set;
    const auto& states = c.at("states");
    const auto& actions = c.at("actions");
    if (states.size() != actions.size()) aoi::raise(ErrorKind::config, "states and actions differ in length");
    for (std::size_t k = 0; k < states.size(); ++k) {
      const auto a = actions[k].get<std::int64_t>();
      if (a < 1) aoi::raise(ErrorKind::config, "actions count sources from 1");
      set.pairs.push_back({states[k].get<aoi::AgeVector>(), static_cast<aoi::SourceIndex>(a - 1)});
    }
    return set;
  };
  std::vector<std::pair<std::string, aoi::StateActionSet>> out;
  if (j.contains("pairs")) {
    aoi::StateActionSet set;
    for (const auto& p : j.at("pairs")) {
      const auto a = p.at("action").get<std::int64_t>();
      if (a < 1) aoi::raise(ErrorKind::config, "actions count sources from 1");
      set.pairs.push_back({p.at("state").get<aoi::AgeVector>(), static_cast<aoi::SourceIndex>(a - 1)});
    }
    out.emplace_back("pairs", std::move(set));
  } else if (j.contains("states")) {
    out.emplace_back("cycle", from_cycle(j));
  } else if (j.contains("policies")) {
    for (const auto& p : j.at("policies")) {
      if (p.contains("cycle")) out.emplace_back(p.at("policy").get<std::string>(), from_cycle(p.at("cycle")));
    }
    if (j.contains("dp") && j.at("dp").contains("cycle")) out.emplace_back("dp", from_cycle(j.at("dp").at("cycle")));
  }
  if (out.empty()) aoi::raise(ErrorKind::config, "no state-action pairs or cycles found in the input");
  return out;
}

json violation_json(const aoi::SwitchViolation& v) {
  return {{"base", {{"state", v.base.state}, {"action", v.base.action + 1}}},
          {"dominant", {{"state", v.dominant.state}, {"action", v.dominant.action + 1}}},
          {"implied_action", v.implied_action + 1}};
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      aoi::raise(ErrorKind::config, "'" + item + "' is not a number");
    }
  }
  return out;
}

std::vector<fs::path> bundled_table_configs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.path().extension() == ".yaml" && name.rfind("table", 0) == 0) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) aoi::raise(ErrorKind::config, "no table*.yaml configs in " + dir.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information scheduling: Whittle indices, optimal DP, simulation and structure checks"};
  app.set_version_flag("--version", std::string(aoi::version()));
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment config; writes <name>.csv and <name>.json");
  std::string run_config, run_out;
  std::optional<std::uint64_t> run_seed;
  unsigned run_threads = std::max(1u, std::thread::hardware_concurrency());
  bool allow_divergent = false;
  run->add_option("--config", run_config, "Experiment YAML")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output directory (default: $AOI_OUT_DIR, else ./results)");
  run->add_option("--seed", run_seed, "Override the config's seed");
  run->add_option("--threads", run_threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  run->add_flag("--allow-divergent", allow_divergent, "Simulate even when the bounded-cost condition fails");

  // index
  auto* index = app.add_subcommand("index", "Print Whittle indices as CSV: h,W_reliable,W_unreliable");
  std::string index_cost;
  double index_p = 1.0;
  std::int64_t index_from = 1, index_to = 10;
  index->add_option("--cost", index_cost, "Cost, e.g. \"kind=power weight=1 exponent=2\"")->required();
  index->add_option("--p", index_p, "Channel success probability")->check(CLI::Range(0.0, 1.0));
  index->add_option("--from", index_from, "First age")->check(CLI::PositiveNumber);
  index->add_option("--to", index_to, "Last age")->check(CLI::PositiveNumber);

  // threshold
  auto* threshold = app.add_subcommand("threshold", "Optimal threshold of the single-source problem with charge C");
  std::string threshold_cost;
  double threshold_p = 1.0, threshold_charge = 0.0;
  threshold->add_option("--cost", threshold_cost, "Cost function")->required();
  threshold->add_option("--p", threshold_p, "Channel success probability")->check(CLI::Range(0.0, 1.0));
  threshold->add_option("--charge", threshold_charge, "Activation charge C >= 0")->required();

  // dp
  auto* dp = app.add_subcommand("dp", "Finite-horizon optimal cost for a config's sources (JSON on stdout)");
  std::string dp_config;
  std::optional<std::int64_t> dp_horizon;
  std::optional<aoi::Age> dp_a_max;
  std::optional<std::int64_t> dp_memory_mb;
  unsigned dp_threads = std::max(1u, std::thread::hardware_concurrency());
  bool dp_cycle = false;
  dp->add_option("--config", dp_config, "Experiment YAML")->required()->check(CLI::ExistingFile);
  dp->add_option("--horizon", dp_horizon, "Horizon (default: the config's)");
  dp->add_option("--a-max", dp_a_max, "Per-source age cap (default: automatic)");
  dp->add_option("--memory-mb", dp_memory_mb, "Memory budget in MiB");
  dp->add_option("--threads", dp_threads, "Worker threads")->check(CLI::PositiveNumber);
  dp->add_flag("--cycle", dp_cycle, "Include the optimal recurrent cycle (reliable channels)");

  // verify
  auto* verify = app.add_subcommand("verify", "Structural checks; exit 2 on a violation");
  verify->require_subcommand(1);
  auto* strong = verify->add_subcommand("strong-switch", "Check a cycle, pair list or run sidecar");
  std::string strong_input;
  strong->add_option("--input", strong_input, "JSON file")->required()->check(CLI::ExistingFile);
  auto* thm3 = verify->add_subcommand("theorem3", "Certify that Whittle is optimal for two reliable sources");
  std::string thm3_f1, thm3_f2;
  std::int64_t thm3_k_max = 1000;
  thm3->add_option("--f1", thm3_f1, "First cost function")->required();
  thm3->add_option("--f2", thm3_f2, "Second cost function")->required();
  thm3->add_option("--k-max", thm3_k_max, "Largest run length enumerated")->check(CLI::PositiveNumber);
  auto* indexability = verify->add_subcommand("indexability", "Thresholds over increasing charges");
  std::string ix_cost, ix_charges;
  double ix_p = 1.0, ix_min = 1e-2, ix_max = 1e4;
  int ix_count = 50;
  indexability->add_option("--cost", ix_cost, "Cost function")->required();
  indexability->add_option("--p", ix_p, "Channel success probability")->check(CLI::Range(0.0, 1.0));
  indexability->add_option("--charges", ix_charges, "Comma-separated increasing charges");
  indexability->add_option("--count", ix_count, "Log-spaced charge count when --charges is absent")
      ->check(CLI::Range(2, 100000));
  indexability->add_option("--min", ix_min, "Smallest log-spaced charge")->check(CLI::PositiveNumber);
  indexability->add_option("--max", ix_max, "Largest log-spaced charge")->check(CLI::PositiveNumber);

  // tables
  auto* tables = app.add_subcommand("tables", "Run the bundled table configs and print both tables");
  std::string tables_dir = AOI_CONFIG_DIR, tables_out;
  unsigned tables_threads = std::max(1u, std::thread::hardware_concurrency());
  tables->add_option("--configs", tables_dir, "Directory holding table*.yaml")->check(CLI::ExistingDirectory);
  tables->add_option("--out", tables_out, "Output directory (default: $AOI_OUT_DIR, else ./results)");
  tables->add_option("--threads", tables_threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      auto config = aoi::load_config(run_config);
      if (run_seed) config.seed = *run_seed;
      const auto bundle = aoi::run_experiment(config, {run_threads, allow_divergent});
      const auto [csv, sidecar] = aoi::write_bundle(bundle, output_dir(run_out));
      std::cout << aoi::to_csv(bundle);
      std::cerr << "wrote " << csv.string() << " and " << sidecar.string() << "\n";
      return kOk;
    }

    if (*index) {
      const auto f = aoi::parse_cost_text(index_cost);
      if (index_p <= 0.0) aoi::raise(ErrorKind::domain, "p must be positive");
      std::cout << "h,W_reliable,W_unreliable\n";
      for (aoi::Age h = index_from; h <= index_to; ++h) {
        std::cout << h << "," << aoi::format_double(aoi::whittle_reliable(f, h)) << ","
                  << aoi::format_double(aoi::whittle_unreliable(f, index_p, h)) << "\n";
      }
      return kOk;
    }

    if (*threshold) {
      const aoi::DecoupledProblem prob{aoi::parse_cost_text(threshold_cost), threshold_p, threshold_charge};
      const auto policy = aoi::optimal_threshold(prob);
      std::cout << "threshold,average_cost\n"
                << policy.to_string() << "," << aoi::format_double(aoi::threshold_average_cost(prob, policy)) << "\n";
      return kOk;
    }

    if (*dp) {
      auto config = aoi::load_config(dp_config);
      const aoi::SystemSpec spec(config.sources);
      aoi::DpOptions options;
      options.threads = dp_threads;
      const auto memory_mb = dp_memory_mb.value_or(config.dp ? config.dp->memory_budget_mb : 4096);
      options.memory_budget_bytes = static_cast<std::size_t>(memory_mb) << 20;
      const auto a_max = dp_a_max ? dp_a_max : (config.dp ? config.dp->a_max : std::nullopt);
      const auto sol = aoi::solve_dp(spec, dp_horizon.value_or(config.horizon), a_max, options);
      json out = {{"setting", config.name},
                  {"optimal_average_cost", sol.optimal_average_cost},
                  {"horizon", sol.horizon},
                  {"a_max", sol.a_max},
                  {"truncation_report", sol.truncation_report},
                  {"warning", sol.warning ? json(*sol.warning) : json(nullptr)}};
      if (dp_cycle) out["cycle"] = cycle_to_json(aoi::extract_cycle_policy(sol, spec));
      std::cout << out.dump(2) << "\n";
      return kOk;
    }

    if (*strong) {
      std::ifstream in(strong_input);
      json input;
      try {
        input = json::parse(in);
      } catch (const json::exception& e) {
        aoi::raise(ErrorKind::config, strong_input + ": " + e.what());
      }
      json report = json::array();
      std::size_t total = 0;
      for (const auto& [label, set] : sets_from_json(input)) {
        const auto violations = aoi::check_strong_switch(set);
        json list = json::array();
        for (const auto& v : violations) list.push_back(violation_json(v));
        total += violations.size();
        report.push_back({{"source", label}, {"pairs", set.pairs.size()}, {"violations", list}});
      }
      std::cout << json{{"strong_switch", total == 0}, {"checks", report}}.dump(2) << "\n";
      return total == 0 ? kOk : kVerifyFailed;
    }

    if (*thm3) {
      const auto f1 = aoi::parse_cost_text(thm3_f1);
      const auto f2 = aoi::parse_cost_text(thm3_f2);
      aoi::CertifyOptions options;
      options.k_max = thm3_k_max;
      try {
        const auto cert = aoi::certify_theorem3(f1, f2, options);
        json indices = json::object();
        for (const auto& [name, value] : cert.index_values) indices[name] = value;
        std::cout << json{{"certified", true},
                          {"whittle_cycle", cycle_to_json(cert.whittle_cycle)},
                          {"best_cycle",
                           {{"leader", cert.best_cycle.leader + 1}, {"k", cert.best_cycle.k}, {"cost", cert.best_cycle.cost}}},
                          {"dp_cost", cert.dp_cost},
                          {"dp_a_max", cert.dp_a_max},
                          {"index_values", indices}}
                         .dump(2)
                  << "\n";
        return kOk;
      } catch (const aoi::Error& e) {
        if (e.kind() != ErrorKind::certification && e.kind() != ErrorKind::inconclusive) throw;
        std::cout << json{{"certified", false}, {"reason", e.what()}}.dump(2) << "\n";
        return kVerifyFailed;
      }
    }

    if (*indexability) {
      const auto f = aoi::parse_cost_text(ix_cost);
      std::vector<double> charges;
      if (!ix_charges.empty()) {
        charges = parse_list(ix_charges);
      } else {
        if (!(ix_min < ix_max)) aoi::raise(ErrorKind::config, "--min must be below --max");
        for (int k = 0; k < ix_count; ++k) {
          charges.push_back(ix_min * std::pow(ix_max / ix_min, static_cast<double>(k) / (ix_count - 1)));
        }
      }
      const auto thresholds = aoi::indexability_sweep(f, ix_p, charges);
      json rows = json::array();
      bool ok = true;
      for (std::size_t k = 0; k < charges.size(); ++k) {
        const bool sandwich = thresholds[k].is_never() ||
                              aoi::satisfies_threshold_condition({f, ix_p, charges[k]}, thresholds[k].value());
        const bool monotone = k == 0 || thresholds[k - 1] <= thresholds[k];
        ok = ok && sandwich && monotone;
        rows.push_back({{"charge", charges[k]}, {"threshold", thresholds[k].to_string()}, {"condition_holds", sandwich}});
      }
      std::cout << json{{"indexable", ok}, {"sweep", rows}}.dump(2) << "\n";
      return ok ? kOk : kVerifyFailed;
    }

    if (*tables) {
      const auto dir = output_dir(tables_out);
      std::string combined = std::string(aoi::kCsvHeader) + "\n";
      std::vector<std::array<std::string, 3>> rows;
      for (const auto& path : bundled_table_configs(tables_dir)) {
        const auto config = aoi::load_config(path);
        const auto bundle = aoi::run_experiment(config, {tables_threads, false});
        aoi::write_bundle(bundle, dir);
        const auto csv = aoi::to_csv(bundle);
        combined += csv.substr(csv.find('\n') + 1);
        std::string optimal = "-", whittle = "-";
        for (const auto& o : bundle.outcomes) {
          if (o.spec.kind == aoi::PolicySpec::Kind::dp) optimal = two_decimals(o.result.mean_cost);
          if (o.spec.kind == aoi::PolicySpec::Kind::whittle) whittle = two_decimals(o.result.mean_cost);
        }
        rows.push_back({config.name, optimal, whittle});
        std::cerr << "done " << config.name << "\n";
      }
      aoi::write_file_atomic(dir / "tables.csv", combined);
      std::printf("%-12s %14s %14s\n", "setting", "optimal", "whittle");
      for (const auto& r : rows) std::printf("%-12s %14s %14s\n", r[0].c_str(), r[1].c_str(), r[2].c_str());
      return kOk;
    }
  } catch (const aoi::Error& e) {
    std::cerr << "aoi: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "aoi: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
