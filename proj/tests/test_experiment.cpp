#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <random>

#include "aoi/errors.hpp"
#include "aoi/experiment.hpp"
#include "support.hpp"

using namespace aoi;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = AOI_CONFIG_DIR;

std::string config_error_of(std::string_view yaml) {
  try {
    parse_config(yaml);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    return e.what();
  }
  FAIL("config accepted: " << yaml);
  return {};
}

constexpr const char* kSmall = R"yaml(
name: small
sources:
  - cost: {kind: linear, weight: 13}
    p: 0.9
  - cost: {kind: power, weight: 1, exponent: 2}
    p: 0.5
policies: [whittle, round_robin, "randomized(0.4,0.6)", "cycle(1,2,2)", dp]
horizon: 60
runs: 40
seed: 9
dp: {a_max: 20}
)yaml";

}  // namespace

TEST_CASE("bundled configs carry the published parameters") {
  const auto e2 = load_config(kConfigs / "table2_E2.yaml");
  REQUIRE(e2.sources.size() == 4);
  CHECK(e2.sources[0].p == 0.7);
  CHECK(e2.sources[1].p == 0.9);
  CHECK(e2.sources[2].p == 0.67);
  CHECK(e2.sources[3].p == 0.8);
  CHECK(e2.sources[0].cost == CostFunction::power(1, 3));
  CHECK(e2.sources[1].cost == CostFunction::exponential(2));
  CHECK(e2.sources[2].cost == CostFunction::linear(15));
  CHECK(e2.effective_runs() == 500);
  for (const char* name : {"table2_E1.yaml", "table2_F1.yaml"}) {
    const auto c = load_config(kConfigs / name);
    REQUIRE(c.sources.size() == 4);
    for (const auto& s : c.sources) CHECK(s.p == 1.0);
    CHECK(c.effective_runs() == 1);
  }
  const auto c1 = load_config(kConfigs / "table1_C1.yaml");
  CHECK(c1.sources[1].cost == CostFunction::logarithmic(10));
  CHECK(c1.sources[0].cost == CostFunction::power(0.5, 3));
  const auto f2 = load_config(kConfigs / "table2_F2.yaml");
  CHECK(f2.sources[1].cost == CostFunction::exponential(std::exp(1.0)));
}

TEST_CASE("serialising and re-parsing is the identity") {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    const auto c = load_config(entry.path());
    const auto again = parse_config(serialize_config(c));
    CHECK(again == c);
    CHECK(config_hash(again) == config_hash(c));
    ++n;
  }
  CHECK(n == 13);

  std::mt19937_64 g(51);
  for (int trial = 0; trial < 200; ++trial) {
    ExperimentConfig c;
    c.name = "random_" + std::to_string(trial);
    const auto sources = std::uniform_int_distribution<std::size_t>(1, 4)(g);
    for (std::size_t i = 0; i < sources; ++i) {
      auto f = test::random_cost(g);
      c.sources.push_back({f, std::uniform_int_distribution<int>(0, 1)(g) ? 1.0 : test::random_admissible_p(g, f)});
    }
    c.policies.push_back(PolicySpec::parse("whittle"));
    std::vector<double> probs(sources, 1.0 / static_cast<double>(sources));
    probs.back() = 1.0 - (static_cast<double>(sources) - 1) / static_cast<double>(sources);
    PolicySpec r;
    r.kind = PolicySpec::Kind::randomized;
    r.probs = probs;
    c.policies.push_back(r);
    c.horizon = std::uniform_int_distribution<std::int64_t>(1, 1000)(g);
    if (trial % 2) c.runs = std::uniform_int_distribution<std::int64_t>(1, 1000)(g);
    c.seed = g();
    if (trial % 3) c.dp = DpConfig{trial % 2 == 0, trial % 5 ? std::optional<Age>(7) : std::nullopt, 100 + trial};
    const auto text = serialize_config(c);
    INFO(text);
    REQUIRE(parse_config(text) == c);
    CHECK(config_hash(parse_config(text)) == config_hash(c));
  }
}

TEST_CASE("hashes separate different configs") {
  auto c = parse_config(kSmall);
  const auto h = config_hash(c);
  CHECK(h.size() == 64);
  c.seed += 1;
  CHECK(config_hash(c) != h);
}

TEST_CASE("validation errors name the field") {
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear}, p: 1}]\npolicies: []\n").find("policies") !=
        std::string::npos);
  CHECK(config_error_of("name: x\nsources: []\npolicies: [whittle]\n").find("sources") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear, wieght: 2}, p: 1}]\npolicies: [whittle]\n")
            .find("sources[1].cost.wieght") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: cubic}, p: 1}]\npolicies: [whittle]\n")
            .find("sources[1].cost.kind") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear}, p: 1.5}]\npolicies: [whittle]\n")
            .find("sources[1].p") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear, weight: -1}, p: 1}]\npolicies: [whittle]\n")
            .find("sources[1].cost") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear}, p: 1}]\npolicies: [\"randomized(0.5,0.5)\"]\n")
            .find("policies[1]") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear}, p: 1}]\npolicies: [\"cycle(1,2)\"]\n")
            .find("policies[1]") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear}, p: 1}]\npolicies: [greedy]\n")
            .find("policies[1]") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear}, p: 1}]\npolicies: [dp]\ndp: {enabled: false}\n")
            .find("policies[1]") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear}, p: 1}]\npolicies: [whittle]\nhorizon: 0\n")
            .find("horizon") != std::string::npos);
  CHECK(config_error_of("name: x\nsources: [{cost: {kind: linear}, p: 1}]\npolicies: [whittle]\nhorizn: 5\n")
            .find("horizn") != std::string::npos);
  CHECK(config_error_of("name: x/y\nsources: [{cost: {kind: linear}, p: 1}]\npolicies: [whittle]\n").find("name") !=
        std::string::npos);
  CHECK(config_error_of("name: [x\n").find("YAML") != std::string::npos);
}

TEST_CASE("policy grammar") {
  for (const char* text : {"whittle", "round_robin", "max_age", "dp", "randomized(0.25,0.75)", "cycle(1,1,2)"}) {
    CHECK(PolicySpec::parse(text).to_string() == text);
  }
  const auto c = PolicySpec::parse(" cycle( 1, 3 ,2 ) ");
  CHECK(c.actions == std::vector<SourceIndex>{0, 2, 1});
  CHECK_THROWS_AS(PolicySpec::parse("cycle(0)"), Error);
  CHECK_THROWS_AS(PolicySpec::parse("cycle()"), Error);
  CHECK_THROWS_AS(PolicySpec::parse("whittle(1)"), Error);
  CHECK_THROWS_AS(PolicySpec::parse("randomized(a,b)"), Error);
}

TEST_CASE("cost text form") {
  CHECK(parse_cost_text("kind=linear weight=13") == CostFunction::linear(13));
  CHECK(parse_cost_text("kind=exponential base=3") == CostFunction::exponential(3));
  CHECK(parse_cost_text("kind=table values=[1,2,7,7]") == CostFunction::table({1, 2, 7, 7}));
  CHECK(parse_cost_text("kind=logarithmic weight=10 base=10") == CostFunction::logarithmic(10, 10.0));
  CHECK_THROWS_AS(parse_cost_text("kind=linear weight"), Error);
  CHECK_THROWS_AS(parse_cost_text("kind=power weight=1"), Error);
}

TEST_CASE("shortest round-trip numbers") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(21.95) == "21.95");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(NAN) == "nan");
  std::mt19937_64 g(52);
  for (int k = 0; k < 10000; ++k) {
    const double x = std::ldexp(std::uniform_real_distribution<double>(-1, 1)(g), std::uniform_int_distribution<int>(-300, 300)(g));
    const auto s = format_double(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(back == x);
  }
}

TEST_CASE("running an experiment") {
  const auto config = parse_config(kSmall);
  const auto bundle = run_experiment(config);
  REQUIRE(bundle.outcomes.size() == 5);
  CHECK(bundle.dp.has_value());
  CHECK(bundle.dp->a_max == 20);
  const auto csv = to_csv(bundle);
  CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(csv.find("small,\"randomized(0.4,0.6)\",") != std::string::npos);
  CHECK(csv.find("small,dp,") != std::string::npos);
  for (const auto& o : bundle.outcomes) {
    if (o.spec.kind == PolicySpec::Kind::dp) {
      CHECK(o.result.runs == 0);
      continue;
    }
    CHECK(o.result.runs == 40);
    CHECK(o.result.seed == 9);
    CHECK(o.result.std_error > 0.0);
    CHECK_FALSE(o.cycle.has_value());  // unreliable: no cycles
  }

  const auto j = to_json(bundle);
  CHECK(j["provenance"]["config_hash"] == config_hash(config));
  CHECK(j["provenance"]["tool_version"] == version());
  CHECK(j["policies"].size() == 5);

  // The sidecar alone is enough to reproduce the run bit for bit.
  const auto rebuilt = config_from_provenance(j);
  CHECK(rebuilt == config);
  CHECK(to_json(run_experiment(rebuilt, {3, false})).dump() == j.dump());
  CHECK(to_csv(run_experiment(rebuilt, {3, false})) == csv);
}

TEST_CASE("reliable runs record cycles") {
  const auto bundle = run_experiment(load_config(kConfigs / "table1_A1.yaml"));
  for (const auto& o : bundle.outcomes) {
    if (o.spec.kind == PolicySpec::Kind::dp) {
      CHECK(o.result.mean_cost == doctest::Approx(21.95).epsilon(0.01));
      continue;
    }
    REQUIRE(o.cycle.has_value());
    CHECK(o.switch_violations == std::size_t{0});
  }
  REQUIRE(bundle.dp_cycle.has_value());
  CHECK(bundle.dp_cycle->average_cost == doctest::Approx(22.0));
  const auto j = to_json(bundle);
  CHECK(j["dp"]["cycle"]["actions"].size() == bundle.dp_cycle->length());
}

TEST_CASE("bounded-cost precheck and its override") {
  ExperimentConfig c;
  c.name = "divergent";
  c.sources = {{CostFunction::exponential(3), 0.5}, {CostFunction::linear(1), 1.0}};
  c.policies = {PolicySpec::parse("round_robin"), PolicySpec::parse("whittle")};
  c.horizon = 50;
  c.runs = 20;
  try {
    run_experiment(c);
    FAIL("expected the precheck to refuse");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::admissibility);
    CHECK(std::string(e.what()).find("source 1") != std::string::npos);
  }
  const auto b = run_experiment(c, {1, true});
  CHECK(std::isfinite(b.outcomes[0].result.mean_cost));
  CHECK(b.outcomes[1].error.has_value());  // no Whittle index exists here
}

TEST_CASE("output files") {
  const auto dir = fs::temp_directory_path() / "aoi_test_outputs";
  fs::remove_all(dir);
  const auto bundle = run_experiment(parse_config(kSmall));
  const auto [csv, json] = write_bundle(bundle, dir);
  CHECK(fs::exists(csv));
  CHECK(fs::exists(json));
  CHECK(csv.filename() == "small.csv");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 2);  // no temporaries left behind
  fs::remove_all(dir);
}
