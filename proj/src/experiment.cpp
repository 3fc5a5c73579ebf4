#include "aoi/experiment.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "aoi/errors.hpp"
#include "aoi/structure.hpp"

namespace aoi {

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  raise(ErrorKind::config, (path.empty() ? std::string() : path + ": ") + what);
}

// "config error: msg" -> "msg"
std::string without_kind(const std::string& what) {
  const auto colon = what.find(" error: ");
  return colon == std::string::npos ? what : what.substr(colon + 8);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) config_error(path, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    if constexpr (std::is_same_v<T, double>) config_error(path, "expected a number, got '" + node.Scalar() + "'");
    else if constexpr (std::is_same_v<T, bool>) config_error(path, "expected true or false, got '" + node.Scalar() + "'");
    else if constexpr (std::is_integral_v<T>) config_error(path, "expected an integer, got '" + node.Scalar() + "'");
    else config_error(path, "expected a string");
  }
}

void reject_unknown_keys(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!map.IsMap()) config_error(path, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      config_error(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

double number_field(const YAML::Node& map, const char* key, const std::string& path, std::optional<double> fallback) {
  const auto node = map[key];
  if (!node) {
    if (fallback) return *fallback;
    config_error(path + "." + key, "missing");
  }
  return scalar<double>(node, path + "." + key);
}

CostFunction cost_from_yaml(const YAML::Node& node, const std::string& path) {
  if (!node || !node.IsMap()) config_error(path, "expected a mapping with a 'kind' field");
  if (!node["kind"]) config_error(path + ".kind", "missing");
  const auto kind = scalar<std::string>(node["kind"], path + ".kind");
  try {
    if (kind == "linear") {
      reject_unknown_keys(node, path, {"kind", "weight"});
      return CostFunction::linear(number_field(node, "weight", path, 1.0));
    }
    if (kind == "power") {
      reject_unknown_keys(node, path, {"kind", "weight", "exponent"});
      return CostFunction::power(number_field(node, "weight", path, 1.0), number_field(node, "exponent", path, {}));
    }
    if (kind == "exponential") {
      reject_unknown_keys(node, path, {"kind", "base", "weight"});
      return CostFunction::exponential(number_field(node, "base", path, {}), number_field(node, "weight", path, 1.0));
    }
    if (kind == "logarithmic") {
      reject_unknown_keys(node, path, {"kind", "weight", "base"});
      std::optional<double> base;
      if (node["base"]) base = scalar<double>(node["base"], path + ".base");
      return CostFunction::logarithmic(number_field(node, "weight", path, 1.0), base);
    }
    if (kind == "indicator") {
      reject_unknown_keys(node, path, {"kind", "threshold", "weight"});
      if (!node["threshold"]) config_error(path + ".threshold", "missing");
      return CostFunction::indicator(scalar<Age>(node["threshold"], path + ".threshold"),
                                     number_field(node, "weight", path, 1.0));
    }
    if (kind == "table") {
      reject_unknown_keys(node, path, {"kind", "values"});
      const auto values = node["values"];
      if (!values || !values.IsSequence()) config_error(path + ".values", "expected a list of numbers");
      std::vector<double> v;
      for (std::size_t i = 0; i < values.size(); ++i) {
        v.push_back(scalar<double>(values[i], path + ".values[" + std::to_string(i) + "]"));
      }
      return CostFunction::table(std::move(v));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    config_error(path, without_kind(e.what()));
  }
  config_error(path + ".kind", "unknown cost kind '" + kind +
                                   "' (linear, power, exponential, logarithmic, indicator, table)");
}

std::string cost_to_yaml(const CostFunction& f) {
  std::ostringstream os;
  os << "{kind: " << f.kind();
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, cost::Linear>) {
          os << ", weight: " << format_double(c.weight);
        } else if constexpr (std::is_same_v<T, cost::Power>) {
          os << ", weight: " << format_double(c.weight) << ", exponent: " << format_double(c.exponent);
        } else if constexpr (std::is_same_v<T, cost::Exponential>) {
          os << ", base: " << format_double(c.base) << ", weight: " << format_double(c.weight);
        } else if constexpr (std::is_same_v<T, cost::Logarithmic>) {
          os << ", weight: " << format_double(c.weight);
          if (c.base) os << ", base: " << format_double(*c.base);
        } else if constexpr (std::is_same_v<T, cost::Indicator>) {
          os << ", threshold: " << c.threshold << ", weight: " << format_double(c.weight);
        } else {
          os << ", values: [";
          for (std::size_t i = 0; i < c.values.size(); ++i) os << (i ? ", " : "") << format_double(c.values[i]);
          os << "]";
        }
      },
      f.variant());
  os << "}";
  return os.str();
}

std::vector<std::string_view> split_args(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json cycle_json(const Cycle& c) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& x : c.states) states.push_back(x);
  nlohmann::json actions = nlohmann::json::array();
  for (auto a : c.actions) actions.push_back(a + 1);
  return {{"length", c.length()},
          {"average_cost", c.average_cost},
          {"transient_length", c.transient_length},
          {"states", std::move(states)},
          {"actions", std::move(actions)}};
}

constexpr std::size_t kCycleSearchSteps = 1'000'000;

}  // namespace

const char* version() noexcept { return "0.1.0"; }

// ---------------------------------------------------------------- policies

PolicySpec PolicySpec::parse(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  const auto name = trim(text.substr(0, open));
  std::optional<std::string_view> args;
  if (open != std::string_view::npos) {
    if (text.back() != ')') raise(ErrorKind::config, "policy '" + std::string(text) + "': missing ')'");
    args = text.substr(open + 1, text.size() - open - 2);
  }
  PolicySpec ps;
  const auto no_args = [&](Kind k) {
    if (args) raise(ErrorKind::config, "policy '" + std::string(name) + "' takes no arguments");
    ps.kind = k;
    return ps;
  };
  if (name == "whittle") return no_args(Kind::whittle);
  if (name == "round_robin") return no_args(Kind::round_robin);
  if (name == "max_age") return no_args(Kind::max_age);
  if (name == "dp") return no_args(Kind::dp);
  if (name == "randomized") {
    if (!args) raise(ErrorKind::config, "randomized needs one probability per source, e.g. randomized(0.5,0.5)");
    ps.kind = Kind::randomized;
    for (auto a : split_args(*args)) {
      double v = 0.0;
      if (!parse_number(a, v)) raise(ErrorKind::config, "randomized: '" + std::string(a) + "' is not a number");
      ps.probs.push_back(v);
    }
    return ps;
  }
  if (name == "cycle") {
    if (!args) raise(ErrorKind::config, "cycle needs a list of source numbers, e.g. cycle(1,1,2)");
    ps.kind = Kind::cycle;
    for (auto a : split_args(*args)) {
      std::int64_t v = 0;
      if (!parse_number(a, v) || v < 1) {
        raise(ErrorKind::config, "cycle: '" + std::string(a) + "' is not a source number (sources count from 1)");
      }
      ps.actions.push_back(static_cast<SourceIndex>(v - 1));
    }
    return ps;
  }
  raise(ErrorKind::config, "unknown policy '" + std::string(text) +
                               "' (whittle, round_robin, randomized(...), max_age, cycle(...), dp)");
}

std::string PolicySpec::to_string() const {
  switch (kind) {
    case Kind::whittle: return "whittle";
    case Kind::round_robin: return "round_robin";
    case Kind::max_age: return "max_age";
    case Kind::dp: return "dp";
    case Kind::randomized: {
      std::string s = "randomized(";
      for (std::size_t i = 0; i < probs.size(); ++i) s += (i ? "," : "") + format_double(probs[i]);
      return s + ")";
    }
    case Kind::cycle: {
      std::string s = "cycle(";
      for (std::size_t i = 0; i < actions.size(); ++i) s += (i ? "," : "") + std::to_string(actions[i] + 1);
      return s + ")";
    }
  }
  return {};
}

Policy PolicySpec::make(const SystemSpec& spec) const {
  switch (kind) {
    case Kind::whittle: return Policy::whittle();
    case Kind::round_robin: return Policy::round_robin(spec.size());
    case Kind::randomized: return Policy::randomized(probs);
    case Kind::max_age: return Policy::max_age();
    case Kind::cycle: return Policy::fixed_cycle(actions);
    case Kind::dp: break;
  }
  raise(ErrorKind::domain, "the dp entry is solved, not simulated");
}

// ------------------------------------------------------------------ config

std::int64_t ExperimentConfig::effective_runs() const {
  if (runs) return *runs;
  const bool reliable = std::all_of(sources.begin(), sources.end(), [](const Source& s) { return s.p == 1.0; });
  return reliable ? 1 : 500;
}

ExperimentConfig parse_config(std::string_view yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    config_error("", std::string("malformed YAML: ") + e.what());
  }
  if (!root || !root.IsMap()) config_error("", "config must be a mapping");
  reject_unknown_keys(root, "", {"name", "sources", "policies", "horizon", "runs", "seed", "dp"});

  ExperimentConfig c;
  if (!root["name"]) config_error("name", "missing");
  c.name = scalar<std::string>(root["name"], "name");

  const auto sources = root["sources"];
  if (!sources || !sources.IsSequence()) config_error("sources", "expected a list of sources");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string path = "sources[" + std::to_string(i + 1) + "]";
    reject_unknown_keys(sources[i], path, {"cost", "p"});
    Source s;
    s.cost = cost_from_yaml(sources[i]["cost"], path + ".cost");
    if (!sources[i]["p"]) config_error(path + ".p", "missing");
    s.p = scalar<double>(sources[i]["p"], path + ".p");
    c.sources.push_back(std::move(s));
  }

  const auto policies = root["policies"];
  if (!policies || !policies.IsSequence()) config_error("policies", "expected a list of policies");
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const std::string path = "policies[" + std::to_string(i + 1) + "]";
    const auto text = scalar<std::string>(policies[i], path);
    try {
      c.policies.push_back(PolicySpec::parse(text));
    } catch (const Error& e) {
      config_error(path, without_kind(e.what()));
    }
  }

  if (root["horizon"]) c.horizon = scalar<std::int64_t>(root["horizon"], "horizon");
  if (root["runs"]) c.runs = scalar<std::int64_t>(root["runs"], "runs");
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (const auto dp = root["dp"]) {
    reject_unknown_keys(dp, "dp", {"enabled", "a_max", "memory_budget_mb"});
    DpConfig d;
    if (dp["enabled"]) d.enabled = scalar<bool>(dp["enabled"], "dp.enabled");
    if (dp["a_max"]) d.a_max = scalar<Age>(dp["a_max"], "dp.a_max");
    if (dp["memory_budget_mb"]) d.memory_budget_mb = scalar<std::int64_t>(dp["memory_budget_mb"], "dp.memory_budget_mb");
    c.dp = d;
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::config, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
  if (c.name.empty()) config_error("name", "must not be empty");
  if (!std::all_of(c.name.begin(), c.name.end(), [](char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
      })) {
    config_error("name", "only letters, digits, '_', '-' and '.' are allowed (it names the output files)");
  }
  if (c.sources.empty()) config_error("sources", "at least one source is required");
  for (std::size_t i = 0; i < c.sources.size(); ++i) {
    const double p = c.sources[i].p;
    if (!(p > 0.0 && p <= 1.0)) config_error("sources[" + std::to_string(i + 1) + "].p", "must lie in (0, 1]");
  }
  if (c.policies.empty()) config_error("policies", "at least one policy is required");
  const std::size_t n = c.sources.size();
  for (std::size_t i = 0; i < c.policies.size(); ++i) {
    const std::string path = "policies[" + std::to_string(i + 1) + "]";
    const auto& ps = c.policies[i];
    if (ps.kind == PolicySpec::Kind::randomized) {
      if (ps.probs.size() != n) {
        config_error(path, "randomized needs " + std::to_string(n) + " probabilities, got " + std::to_string(ps.probs.size()));
      }
      double sum = 0.0;
      for (double q : ps.probs) {
        if (!(q >= 0.0 && q <= 1.0)) config_error(path, "randomized probabilities must lie in [0, 1]");
        sum += q;
      }
      if (std::abs(sum - 1.0) > 1e-9) config_error(path, "randomized probabilities must sum to 1");
    }
    if (ps.kind == PolicySpec::Kind::cycle) {
      if (ps.actions.empty()) config_error(path, "cycle needs at least one action");
      for (auto a : ps.actions) {
        if (a >= n) config_error(path, "cycle refers to source " + std::to_string(a + 1) + " of " + std::to_string(n));
      }
    }
    if (ps.kind == PolicySpec::Kind::dp && c.dp && !c.dp->enabled) {
      config_error(path, "dp is listed but the dp section disables it");
    }
  }
  if (c.horizon < 1) config_error("horizon", "must be at least 1");
  if (c.runs && *c.runs < 1) config_error("runs", "must be at least 1");
  if (c.dp) {
    if (c.dp->a_max && *c.dp->a_max < 1) config_error("dp.a_max", "must be at least 1");
    if (c.dp->memory_budget_mb < 1) config_error("dp.memory_budget_mb", "must be at least 1");
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "name: " << nlohmann::json(c.name).dump() << "\n";
  os << "sources:\n";
  for (const auto& s : c.sources) {
    os << "  - cost: " << cost_to_yaml(s.cost) << "\n";
    os << "    p: " << format_double(s.p) << "\n";
  }
  os << "policies:\n";
  for (const auto& ps : c.policies) os << "  - \"" << ps.to_string() << "\"\n";
  os << "horizon: " << c.horizon << "\n";
  if (c.runs) os << "runs: " << *c.runs << "\n";
  os << "seed: " << c.seed << "\n";
  if (c.dp) {
    os << "dp:\n";
    os << "  enabled: " << (c.dp->enabled ? "true" : "false") << "\n";
    if (c.dp->a_max) os << "  a_max: " << *c.dp->a_max << "\n";
    os << "  memory_budget_mb: " << c.dp->memory_budget_mb << "\n";
  }
  return os.str();
}

std::string config_hash(const ExperimentConfig& config) {
  const auto text = serialize_config(config);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    raise(ErrorKind::consistency, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

CostFunction parse_cost_text(std::string_view text) {
  YAML::Node node(YAML::NodeType::Map);
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      raise(ErrorKind::config, "cost: expected key=value, got '" + token + "'");
    }
    try {
      node[token.substr(0, eq)] = YAML::Load(token.substr(eq + 1));
    } catch (const YAML::Exception&) {
      raise(ErrorKind::config, "cost: cannot read '" + token + "'");
    }
  }
  return cost_from_yaml(node, "cost");
}

// -------------------------------------------------------------- experiment

ResultBundle run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate_config(config);
  const SystemSpec spec = options.allow_divergent ? SystemSpec::allow_divergent(config.sources)
                                                  : SystemSpec(config.sources);
  ResultBundle bundle;
  bundle.config = config;
  bundle.config_hash = config_hash(config);
  const auto runs = config.effective_runs();

  const bool wants_dp = std::any_of(config.policies.begin(), config.policies.end(),
                                    [](const PolicySpec& p) { return p.kind == PolicySpec::Kind::dp; });
  if ((config.dp && config.dp->enabled) || wants_dp) {
    const DpConfig d = config.dp.value_or(DpConfig{});
    DpOptions opts;
    opts.memory_budget_bytes = static_cast<std::size_t>(d.memory_budget_mb) << 20;
    opts.threads = options.threads;
    bundle.dp = solve_dp(spec, config.horizon, d.a_max, opts);
    if (spec.all_reliable()) {
      try {
        bundle.dp_cycle = extract_cycle_policy(*bundle.dp, spec);
        bundle.dp_switch_violations = check_strong_switch(StateActionSet::from_cycle(*bundle.dp_cycle)).size();
      } catch (const Error& e) {
        bundle.dp_cycle_error = e.what();
      }
    }
  }

  SimOptions sim_options;
  sim_options.threads = options.threads;
  for (const auto& ps : config.policies) {
    PolicyOutcome out;
    out.spec = ps;
    if (ps.kind == PolicySpec::Kind::dp) {
      out.result.mean_cost = bundle.dp->optimal_average_cost;
      out.result.runs = 0;
      out.result.horizon = config.horizon;
      out.result.seed = config.seed;
      bundle.outcomes.push_back(std::move(out));
      continue;
    }
    const Policy policy = ps.make(spec);
    policy.validate(spec);
    try {
      out.result = simulate(spec, policy, config.horizon, runs, config.seed, sim_options);
    } catch (const Error& e) {
      // Only reachable past the bounded-cost precheck: either a cost left the
      // representable range or the policy (Whittle) has no index to compute.
      if (e.kind() != ErrorKind::range && e.kind() != ErrorKind::admissibility) throw;
      out.error = e.what();
      out.result.mean_cost = e.kind() == ErrorKind::range ? std::numeric_limits<double>::infinity()
                                                          : std::numeric_limits<double>::quiet_NaN();
      out.result.std_error = std::numeric_limits<double>::quiet_NaN();
      out.result.runs = runs;
      out.result.horizon = config.horizon;
      out.result.seed = config.seed;
    }
    if (spec.all_reliable() && policy.is_deterministic()) {
      try {
        out.cycle = detect_cycle(spec, policy, kCycleSearchSteps);
        out.switch_violations = check_strong_switch(StateActionSet::from_cycle(*out.cycle)).size();
      } catch (const Error& e) {
        out.cycle_error = e.what();
      }
    }
    bundle.outcomes.push_back(std::move(out));
  }
  return bundle;
}

// ----------------------------------------------------------------- output

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

std::string to_csv(const ResultBundle& b) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& o : b.outcomes) {
    out += csv_field(b.config.name) + "," + csv_field(o.spec.to_string()) + "," + format_double(o.result.mean_cost) +
           "," + format_double(o.result.std_error) + "," + std::to_string(o.result.runs) + "," +
           std::to_string(o.result.horizon) + "," + std::to_string(o.result.seed) + "\n";
  }
  return out;
}

nlohmann::json to_json(const ResultBundle& b) {
  nlohmann::json j;
  j["setting"] = b.config.name;
  j["provenance"] = {{"config_hash", b.config_hash},
                     {"tool_version", version()},
                     {"seed", b.config.seed},
                     {"config", serialize_config(b.config)}};
  nlohmann::json policies = nlohmann::json::array();
  for (const auto& o : b.outcomes) {
    nlohmann::json p = {{"policy", o.spec.to_string()},
                        {"mean_cost", o.result.mean_cost},
                        {"stderr", o.result.std_error},
                        {"runs", o.result.runs},
                        {"horizon", o.result.horizon},
                        {"seed", o.result.seed}};
    if (o.spec.kind == PolicySpec::Kind::dp) {
      p["method"] = "finite_horizon_dp";
    } else {
      p["method"] = "simulation";
      p["per_source_costs"] = o.result.per_source_costs;
    }
    if (o.error) p["error"] = *o.error;
    if (o.cycle) p["cycle"] = cycle_json(*o.cycle);
    if (o.cycle_error) p["cycle_error"] = *o.cycle_error;
    if (o.switch_violations) p["strong_switch_violations"] = *o.switch_violations;
    policies.push_back(std::move(p));
  }
  j["policies"] = std::move(policies);
  if (b.dp) {
    nlohmann::json d = {{"optimal_average_cost", b.dp->optimal_average_cost},
                        {"horizon", b.dp->horizon},
                        {"a_max", b.dp->a_max},
                        {"initial", b.dp->initial},
                        {"truncation_report", b.dp->truncation_report}};
    d["warning"] = b.dp->warning ? nlohmann::json(*b.dp->warning) : nlohmann::json(nullptr);
    if (b.dp_cycle) d["cycle"] = cycle_json(*b.dp_cycle);
    if (b.dp_cycle_error) d["cycle_error"] = *b.dp_cycle_error;
    if (b.dp_switch_violations) d["strong_switch_violations"] = *b.dp_switch_violations;
    j["dp"] = std::move(d);
  }
  return j;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::config, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) raise(ErrorKind::config, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::pair<std::filesystem::path, std::filesystem::path> write_bundle(const ResultBundle& bundle,
                                                                     const std::filesystem::path& dir) {
  const auto csv = dir / (bundle.config.name + ".csv");
  const auto json = dir / (bundle.config.name + ".json");
  write_file_atomic(csv, to_csv(bundle));
  write_file_atomic(json, to_json(bundle).dump(2) + "\n");
  return {csv, json};
}

ExperimentConfig config_from_provenance(const nlohmann::json& sidecar) {
  const auto it = sidecar.find("provenance");
  if (it == sidecar.end() || !it->contains("config")) {
    raise(ErrorKind::config, "sidecar has no provenance.config block");
  }
  return parse_config((*it)["config"].get<std::string>());
}

}  // namespace aoi
