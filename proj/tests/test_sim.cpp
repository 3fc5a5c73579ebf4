#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "aoi/errors.hpp"
#include "aoi/rng.hpp"
#include "aoi/sim.hpp"
#include "aoi/structure.hpp"

using namespace aoi;

namespace {

SystemSpec two_3x() { return SystemSpec({{CostFunction::exponential(3), 1.0}, {CostFunction::exponential(3), 1.0}}); }

SystemSpec a1() { return SystemSpec({{CostFunction::linear(13), 1.0}, {CostFunction::power(1, 2), 1.0}}); }

SystemSpec a2() { return SystemSpec({{CostFunction::linear(13), 0.9}, {CostFunction::power(1, 2), 0.5}}); }

bool same_bits(const SimulationResult& a, const SimulationResult& b) {
  return a.mean_cost == b.mean_cost && a.std_error == b.std_error && a.per_source_costs == b.per_source_costs &&
         a.runs == b.runs && a.seed == b.seed;
}

}  // namespace

TEST_CASE("Philox4x64-10 matches the reference generator") {
  // Reference outputs from numpy.random.Philox with the same key, counter 0.
  CounterRng a(0x0123456789abcdefULL, 7);
  const std::uint64_t want_a[] = {0xf59a76803b076ad9ULL, 0x8b0fcbb858a64beeULL, 0xe0f5a603141f1a71ULL,
                                  0x24bb2f9cc62164b0ULL, 0x12fa5cd6f4af856fULL, 0xb42468c4f7f16bdfULL,
                                  0x185969153bde92dULL,  0x6c46d4df66fe1abULL};
  for (auto w : want_a) CHECK(a.next_u64() == w);
  CounterRng b(0, 0);
  const std::uint64_t want_b[] = {0x2f4ba6408e4d89bULL,  0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL,
                                  0x907d7a052fd5b4dcULL, 0x809bf322883987c3ULL, 0x471128b9e807f7ddULL,
                                  0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL};
  for (auto w : want_b) CHECK(b.next_u64() == w);
}

TEST_CASE("uniform draws and stream independence") {
  CounterRng r(3, 0), s(3, 1);
  int differ = 0;
  for (int k = 0; k < 1000; ++k) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    differ += u != s.uniform();
  }
  CHECK(differ == 1000);
  CounterRng one(9, 9);
  for (int k = 0; k < 100; ++k) CHECK(one.bernoulli(1.0));
}

TEST_CASE("round robin on two 3^x sources costs 12 per slot from slot 2") {
  const auto trace = simulate_trace(two_3x(), Policy::round_robin(2), 500, 1);
  REQUIRE(trace.size() == 500);
  CHECK(trace[0] == 6.0);  // both ages start at 1
  CHECK(std::all_of(trace.begin() + 1, trace.end(), [](double c) { return c == 12.0; }));
  const auto res = simulate(two_3x(), Policy::round_robin(2), 500, 1, 1);
  CHECK(res.mean_cost == doctest::Approx((6.0 + 12.0 * 499) / 500).epsilon(1e-14));
  CHECK(res.std_error == 0.0);
  CHECK(res.per_source_costs.size() == 2);
  CHECK(res.per_source_costs[0] + res.per_source_costs[1] == res.mean_cost);
}

TEST_CASE("reliable deterministic runs have zero standard error") {
  const auto res = simulate(a1(), Policy::whittle(), 200, 50, 4);
  CHECK(res.std_error == 0.0);
  CHECK(res.mean_cost == simulate(a1(), Policy::whittle(), 200, 1, 4).mean_cost);
}

TEST_CASE("results are reproducible and independent of thread count") {
  const auto a = simulate(a2(), Policy::whittle(), 300, 64, 17, {1, 256});
  const auto b = simulate(a2(), Policy::whittle(), 300, 64, 17, {1, 256});
  const auto c = simulate(a2(), Policy::whittle(), 300, 64, 17, {3, 256});
  const auto d = simulate(a2(), Policy::whittle(), 300, 64, 18, {1, 256});
  CHECK(same_bits(a, b));
  CHECK(same_bits(a, c));
  CHECK_FALSE(same_bits(a, d));
  CHECK(a.std_error > 0.0);
}

TEST_CASE("quadrupling runs halves the standard error") {
  double ratio = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const auto small = simulate(a2(), Policy::whittle(), 200, 100, 1000 + rep);
    const auto large = simulate(a2(), Policy::whittle(), 200, 400, 2000 + rep);
    ratio += small.std_error / large.std_error;
  }
  ratio /= 10.0;
  CHECK(ratio > 2.0 * 0.8);
  CHECK(ratio < 2.0 * 1.2);
}

TEST_CASE("cycle detection") {
  const SystemSpec two({{CostFunction::linear(1), 1.0}, {CostFunction::linear(1), 1.0}});
  const auto c = detect_cycle(two, Policy::whittle());
  CHECK(c.length() == 2);
  CHECK(c.average_cost == 3.0);
  for (std::size_t k = 0; k < c.length(); ++k) {
    CHECK(step_reliable(c.states[k], c.actions[k]) == c.states[(k + 1) % c.length()]);
  }

  const SystemSpec b1({{CostFunction::power(1, 2), 1.0}, {CostFunction::exponential(3), 1.0}});
  CHECK(detect_cycle(b1, Policy::whittle()).average_cost == doctest::Approx(8.48).epsilon(0.01));

  // A1 under Whittle: one source served k times, then the other once.
  const auto w = detect_cycle(a1(), Policy::whittle());
  std::vector<std::size_t> count(2, 0);
  for (auto a : w.actions) ++count[a];
  CHECK(std::min(count[0], count[1]) == 1);

  try {
    detect_cycle(a2(), Policy::whittle());
    FAIL("unreliable channels have no deterministic cycle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
  try {
    detect_cycle(two, Policy::fixed_cycle({0}), 1000);
    FAIL("a never-served source never repeats");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_cyclic);
  }
}

TEST_CASE("horizon average approaches the cycle cost") {
  const std::vector<SystemSpec> specs{
      a1(),
      SystemSpec({{CostFunction::power(1, 2), 1.0}, {CostFunction::exponential(3), 1.0}}),
      SystemSpec({{CostFunction::power(0.5, 3), 1.0}, {CostFunction::logarithmic(10), 1.0}}),
      SystemSpec({{CostFunction::power(1, 2), 1.0}, {CostFunction::exponential(3), 1.0}, {CostFunction::power(1, 4), 1.0}}),
  };
  for (const auto& spec : specs) {
    const double cyc = detect_cycle(spec, Policy::whittle()).average_cost;
    const double avg = simulate(spec, Policy::whittle(), 500, 1, 1).mean_cost;
    CHECK(std::abs(avg - cyc) / cyc < 0.01);
    CHECK(std::abs(simulate(spec, Policy::whittle(), 200000, 1, 1).mean_cost - cyc) / cyc < 1e-4);
  }
}

TEST_CASE("overflow names the slot and source") {
  try {
    simulate(two_3x(), Policy::fixed_cycle({0}), 1000, 1, 1);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::range);
    const std::string what = e.what();
    CHECK(what.find("slot") != std::string::npos);
    CHECK(what.find("source 2") != std::string::npos);
  }
}

TEST_CASE("age guard") {
  const SystemSpec two({{CostFunction::linear(1), 1.0}, {CostFunction::linear(1), 1.0}});
  CHECK_THROWS_AS(simulate(two, Policy::fixed_cycle({0}), kSimulationAgeGuard + 10, 1, 1), Error);
}

TEST_CASE("randomized policies on 3^x grow without bound") {
  const auto spec = two_3x();
  const auto report = divergence_probe(spec, Policy::randomized({0.5, 0.5}), {10, 20, 40}, 200, 50);
  REQUIRE(report.median_of_means.size() == 3);
  CHECK(report.median_of_means[0] < report.median_of_means[1]);
  CHECK(report.median_of_means[1] < report.median_of_means[2]);
  CHECK(report.expected[0] < report.expected[1]);
  CHECK(report.expected[1] < report.expected[2]);

  const SystemSpec lin({{CostFunction::linear(1), 1.0}, {CostFunction::linear(1), 1.0}});
  const auto bounded = divergence_probe(lin, Policy::randomized({0.5, 0.5}), {100, 1000, 4000}, 50, 20);
  // Each source's age is geometric with mean 2, so the average tends to 4.
  for (double v : bounded.expected) CHECK(v < 4.0 + 1e-9);
  CHECK(bounded.median_of_means.back() == doctest::Approx(4.0).epsilon(0.05));

  const auto rr = divergence_probe(spec, Policy::round_robin(2), {2, 10, 60}, 1, 1);
  CHECK(rr.expected[1] == doctest::Approx((6.0 + 12.0 * 9) / 10));
}

TEST_CASE("exact running averages match Monte Carlo") {
  const SystemSpec lin({{CostFunction::linear(1), 1.0}, {CostFunction::power(1, 2), 1.0}});
  const auto pol = Policy::randomized({0.3, 0.7});
  const auto exact = expected_running_average(lin, pol, {5, 50});
  const auto mc = simulate(lin, pol, 50, 20000, 3);
  CHECK(mc.mean_cost == doctest::Approx(exact[1]).epsilon(3 * mc.std_error / exact[1] + 1e-12));
}
