#include <doctest.h>

#include <numeric>

#include "aoi/dp.hpp"
#include "aoi/errors.hpp"
#include "aoi/sim.hpp"
#include "aoi/structure.hpp"

using namespace aoi;

namespace {

SystemSpec a1() { return SystemSpec({{CostFunction::linear(13), 1.0}, {CostFunction::power(1, 2), 1.0}}); }
SystemSpec b1() { return SystemSpec({{CostFunction::power(1, 2), 1.0}, {CostFunction::exponential(3), 1.0}}); }
SystemSpec c1() { return SystemSpec({{CostFunction::power(0.5, 3), 1.0}, {CostFunction::logarithmic(10), 1.0}}); }
SystemSpec d1() {
  return SystemSpec({{CostFunction::power(1, 2), 1.0}, {CostFunction::exponential(3), 1.0}, {CostFunction::power(1, 4), 1.0}});
}
SystemSpec a2() { return SystemSpec({{CostFunction::linear(13), 0.9}, {CostFunction::power(1, 2), 0.5}}); }

double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
         static_cast<double>(end - begin);
}

}  // namespace

TEST_CASE("truncated box indexing") {
  const TruncatedBox box(5, 3);
  CHECK(box.states() == 125);
  for (std::size_t s = 0; s < box.states(); ++s) REQUIRE(box.index(box.decode(s)) == s);
  const AgeVector inside{5, 1, 3}, outside{6, 1, 1};
  CHECK(box.contains(inside));
  CHECK_FALSE(box.contains(outside));
  CHECK(default_a_max(2) == 30);
  CHECK(default_a_max(3) == 20);
  CHECK(default_a_max(4) == 15);
}

TEST_CASE("single source is always served") {
  const SystemSpec one({{CostFunction::linear(1), 1.0}});
  const auto sol = finite_horizon_dp(one, 10, TruncatedBox(10, 1), ones(1));
  CHECK(sol.optimal_average_cost == 1.0);
  CHECK(sol.truncation_report == 0.0);
}

TEST_CASE("two identical sources alternate") {
  const SystemSpec two({{CostFunction::linear(1), 1.0}, {CostFunction::linear(1), 1.0}});
  const auto sol = solve_dp(two, 100);
  const auto c = extract_cycle_policy(sol, two);
  REQUIRE(c.length() == 2);
  CHECK(c.average_cost == 3.0);
  CHECK(((c.states[0] == AgeVector{1, 2} && c.actions[0] == 1) || (c.states[0] == AgeVector{2, 1} && c.actions[0] == 0)));
}

TEST_CASE("two-source reliable settings") {
  CHECK(solve_dp(a1(), 500).optimal_average_cost == doctest::Approx(21.95).epsilon(0.01));
  CHECK(solve_dp(b1(), 500).optimal_average_cost == doctest::Approx(8.48).epsilon(0.01));
}

TEST_CASE("the mid-horizon cycle is what the DP actually pays") {
  for (const auto& spec : {a1(), b1(), c1(), d1()}) {
    const auto sol = solve_dp(spec, 500);
    const auto c = extract_cycle_policy(sol, spec);
    const auto begin = c.transient_length;
    CHECK(std::abs(mean(sol.expected_slot_costs, begin, begin + c.length()) - c.average_cost) < 1e-9);
    for (std::size_t k = 0; k < c.length(); ++k) {
      REQUIRE(step_reliable(c.states[k], c.actions[k]) == c.states[(k + 1) % c.length()]);
    }
  }
}

TEST_CASE("DP is no worse than the simple policies") {
  for (const auto& spec : {a1(), b1(), c1(), d1()}) {
    const double opt = solve_dp(spec, 500).optimal_average_cost;
    for (const auto& pol : {Policy::whittle(), Policy::round_robin(spec.size()), Policy::max_age()}) {
      CHECK(opt <= simulate(spec, pol, 500, 1, 1).mean_cost + 1e-9);
    }
  }
  const auto spec = a2();
  const double opt = solve_dp(spec, 500).optimal_average_cost;
  for (const auto& pol : {Policy::whittle(), Policy::round_robin(2), Policy::max_age()}) {
    const auto r = simulate(spec, pol, 500, 500, 1);
    CHECK(opt <= r.mean_cost + 3 * r.std_error);
  }
}

TEST_CASE("doubling the age cap leaves the optimum alone") {
  for (const auto& spec : {a1(), b1(), c1(), a2()}) {
    const double base = solve_dp(spec, 500, 30).optimal_average_cost;
    CHECK(std::abs(solve_dp(spec, 500, 60).optimal_average_cost - base) / base < 1e-4);
  }
  const double base = solve_dp(d1(), 500, 20).optimal_average_cost;
  CHECK(std::abs(solve_dp(d1(), 500, 40).optimal_average_cost - base) / base < 1e-4);
}

TEST_CASE("the transient has washed out by the end") {
  for (const auto& spec : {a1(), b1(), c1(), d1()}) {
    const auto sol = solve_dp(spec, 500);
    const double tail = mean(sol.expected_slot_costs, 400, 500);
    CHECK(std::abs(tail - sol.optimal_average_cost) / sol.optimal_average_cost < 0.01);
  }
}

TEST_CASE("thread count does not change a single bit") {
  DpOptions one, four;
  four.threads = 4;
  const auto a = solve_dp(a2(), 200, 25, one);
  const auto b = solve_dp(a2(), 200, 25, four);
  CHECK(a.optimal_average_cost == b.optimal_average_cost);
  CHECK(a.first_stage_actions == b.first_stage_actions);
  CHECK(a.expected_slot_costs == b.expected_slot_costs);
}

TEST_CASE("capacity and truncation reporting") {
  DpOptions tiny;
  tiny.memory_budget_bytes = 1024;
  try {
    solve_dp(d1(), 500, 20, tiny);
    FAIL("expected a capacity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::capacity);
  }
  // The cheap source is left to age well past 3, so a cap of 3 binds.
  const SystemSpec lopsided({{CostFunction::linear(100), 1.0}, {CostFunction::linear(0.01), 1.0}});
  const auto cramped = solve_dp(lopsided, 100, 3);
  CHECK(cramped.truncation_report > 1e-6);
  CHECK(cramped.warning.has_value());
  CHECK_THROWS_AS(finite_horizon_dp(a1(), 10, TruncatedBox(5, 2), AgeVector{6, 1}), Error);
}

TEST_CASE("per-stage tables on request") {
  DpOptions keep;
  keep.keep_stage_tables = true;
  const auto sol = solve_dp(a1(), 50, 30, keep);
  REQUIRE(sol.stage_tables.size() == 50);
  CHECK(sol.stage_tables.front() == sol.first_stage_actions);
  CHECK(solve_dp(a1(), 50, 30).stage_tables.empty());
}

TEST_CASE("unreliable solutions have no cycle") {
  const auto sol = solve_dp(a2(), 100, 20);
  CHECK(sol.optimal_path.empty());
  CHECK_THROWS_AS(extract_cycle_policy(sol, a2()), Error);
  // The first-slot table still makes a usable policy.
  const auto r = simulate(a2(), sol.as_policy(), 100, 200, 1);
  CHECK(r.mean_cost > 0.0);
}
