#include "aoi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "aoi/errors.hpp"
#include "aoi/parallel.hpp"

namespace aoi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Policy with_index_table(const SystemSpec& spec, const Policy& policy, Age cap) {
  if (const auto* w = std::get_if<policy::Whittle>(&policy.variant()); w && !w->table) {
    return Policy::whittle(spec, cap);
  }
  return policy;
}

/// One trajectory; calls on_slot(t, slot_cost) after charging slot t (0-based).
template <class OnSlot>
void run_trajectory(const SystemSpec& spec, const Policy& policy, std::int64_t horizon, CounterRng& rng,
                    std::vector<double>& per_source, OnSlot&& on_slot) {
  const std::size_t n = spec.size();
  AgeVector ages = ones(n);
  per_source.assign(n, 0.0);
  for (std::int64_t t = 0; t < horizon; ++t) {
    double slot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0;
      try {
        c = spec[i].cost(ages[i]);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::range) throw;
        raise(ErrorKind::range, "cost overflow at slot " + std::to_string(t + 1) + ", source " +
                                    std::to_string(i + 1) + " (age " + std::to_string(ages[i]) + ")");
      }
      per_source[i] += c;
      slot += c;
    }
    if (!on_slot(t, slot)) return;
    const SourceIndex s = decide(policy, spec, ages, static_cast<std::uint64_t>(t), &rng);
    const bool delivered = rng.bernoulli(spec[s].p);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == s && delivered) {
        ages[i] = 1;
      } else if (++ages[i] > kSimulationAgeGuard) {
        raise(ErrorKind::range, "age of source " + std::to_string(i + 1) + " passed " +
                                    std::to_string(kSimulationAgeGuard) + " at slot " + std::to_string(t + 1));
      }
    }
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  if (std::isinf(v[m - 1]) || std::isinf(v[m])) return std::max(v[m - 1], v[m]);
  return 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

SimulationResult simulate(const SystemSpec& spec, const Policy& policy, std::int64_t horizon, std::int64_t runs,
                          std::uint64_t seed, const SimOptions& options) {
  if (horizon < 1) raise(ErrorKind::domain, "horizon must be positive");
  if (runs < 1) raise(ErrorKind::domain, "run count must be positive");
  policy.validate(spec);
  const Policy prepared = with_index_table(spec, policy, options.index_cap);
  const std::size_t n = spec.size();
  const auto r = static_cast<std::size_t>(runs);

  // per_run[k * n + i]: time-average cost of source i in run k.
  std::vector<double> per_run(r * n, 0.0);
  parallel_chunks(r, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> totals;
    for (std::size_t k = begin; k < end; ++k) {
      CounterRng rng(seed, k);
      run_trajectory(spec, prepared, horizon, rng, totals, [](std::int64_t, double) { return true; });
      for (std::size_t i = 0; i < n; ++i) per_run[k * n + i] = totals[i] / static_cast<double>(horizon);
    }
  });

  SimulationResult res;
  res.runs = runs;
  res.horizon = horizon;
  res.seed = seed;
  // Offsets from run 0 keep identical runs exact: mean = run 0, stderr = 0.
  res.per_source_costs.assign(n, 0.0);
  std::vector<double> run_totals(r, 0.0);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < n; ++i) run_totals[k] += per_run[k * n + i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    KahanSum offset;
    for (std::size_t k = 1; k < r; ++k) offset.add(per_run[k * n + i] - per_run[i]);
    res.per_source_costs[i] = per_run[i] + offset.value() / static_cast<double>(r);
  }
  for (double c : res.per_source_costs) res.mean_cost += c;
  if (r > 1) {
    KahanSum d, d2;
    for (std::size_t k = 1; k < r; ++k) {
      const double dk = run_totals[k] - run_totals[0];
      d.add(dk);
      d2.add(dk * dk);
    }
    const double rr = static_cast<double>(r);
    const double ss = std::max(0.0, d2.value() - d.value() * d.value() / rr);
    res.std_error = std::sqrt(ss / (rr - 1.0)) / std::sqrt(rr);
  }
  return res;
}

std::vector<double> simulate_trace(const SystemSpec& spec, const Policy& policy, std::int64_t horizon,
                                   std::uint64_t seed, std::uint64_t run) {
  if (horizon < 1) raise(ErrorKind::domain, "horizon must be positive");
  policy.validate(spec);
  const Policy prepared = with_index_table(spec, policy, SimOptions{}.index_cap);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(horizon));
  std::vector<double> totals;
  CounterRng rng(seed, run);
  run_trajectory(spec, prepared, horizon, rng, totals, [&](std::int64_t, double c) {
    trace.push_back(c);
    return true;
  });
  return trace;
}

Cycle detect_cycle(const SystemSpec& spec, const Policy& policy, std::size_t max_steps) {
  if (!spec.all_reliable()) raise(ErrorKind::domain, "cycle detection needs reliable channels");
  if (!policy.is_deterministic()) raise(ErrorKind::domain, "cycle detection needs a deterministic policy");
  policy.validate(spec);
  const Policy prepared = with_index_table(spec, policy, SimOptions{}.index_cap);
  const std::size_t period = prepared.period();

  // Key: ages followed by the schedule phase.
  std::unordered_map<AgeVector, std::size_t, AgeVectorHash> seen;
  std::vector<AgeVector> path;
  std::vector<SourceIndex> acts;
  AgeVector ages = ones(spec.size());
  for (std::size_t t = 0; t <= max_steps; ++t) {
    AgeVector key = ages;
    key.push_back(static_cast<Age>(t % period));
    if (auto it = seen.find(key); it != seen.end()) {
      Cycle c;
      c.transient_length = it->second;
      c.states.assign(path.begin() + static_cast<std::ptrdiff_t>(it->second), path.end());
      c.actions.assign(acts.begin() + static_cast<std::ptrdiff_t>(it->second), acts.end());
      c.average_cost = cycle_average_cost(spec, c.states);
      return c;
    }
    seen.emplace(std::move(key), t);
    const SourceIndex s = decide(prepared, spec, ages, static_cast<std::uint64_t>(t));
    path.push_back(ages);
    acts.push_back(s);
    ages = step_reliable(ages, s);
  }
  raise(ErrorKind::non_cyclic, "no state recurred within " + std::to_string(max_steps) + " steps");
}

std::vector<double> expected_running_average(const SystemSpec& spec, const Policy& randomized,
                                             const std::vector<std::int64_t>& horizons) {
  const auto* r = std::get_if<policy::StationaryRandomized>(&randomized.variant());
  if (!r) raise(ErrorKind::domain, "closed-form expectation needs a stationary randomized policy");
  randomized.validate(spec);
  if (horizons.empty()) return {};
  const std::int64_t last = horizons.back();
  const std::size_t n = spec.size();

  // Expected cost per slot, summed over sources' marginal age chains.
  std::vector<double> slot(static_cast<std::size_t>(last), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double reset = r->probs[i] * spec[i].p;
    std::vector<double> dist{1.0};  // dist[a - 1] = P(A_i = a)
    for (std::int64_t t = 0; t < last; ++t) {
      double e = 0.0;
      for (std::size_t a = 0; a < dist.size(); ++a) {
        if (dist[a] == 0.0) continue;
        double c = kInf;
        try {
          c = spec[i].cost(static_cast<Age>(a + 1));
        } catch (const Error& err) {
          if (err.kind() != ErrorKind::range) throw;
        }
        e += dist[a] * c;
      }
      slot[static_cast<std::size_t>(t)] += e;
      std::vector<double> next(dist.size() + 1, 0.0);
      for (std::size_t a = 0; a < dist.size(); ++a) {
        next[0] += dist[a] * reset;
        next[a + 1] += dist[a] * (1.0 - reset);
      }
      dist = std::move(next);
    }
  }
  std::vector<double> out;
  out.reserve(horizons.size());
  double running = 0.0;
  std::int64_t t = 0;
  for (auto h : horizons) {
    for (; t < h; ++t) running += slot[static_cast<std::size_t>(t)];
    out.push_back(running / static_cast<double>(h));
  }
  return out;
}

DivergenceReport divergence_probe(const SystemSpec& spec, const Policy& policy,
                                  const std::vector<std::int64_t>& horizons, std::int64_t runs,
                                  std::int64_t seeds) {
  if (horizons.empty()) raise(ErrorKind::domain, "no horizons given");
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (horizons[k] < 1 || (k > 0 && horizons[k] <= horizons[k - 1])) {
      raise(ErrorKind::domain, "horizons must be positive and strictly increasing");
    }
  }
  if (runs < 1 || seeds < 1) raise(ErrorKind::domain, "runs and seeds must be positive");
  policy.validate(spec);
  const Policy prepared = with_index_table(spec, policy, SimOptions{}.index_cap);
  const std::size_t m = horizons.size();
  const std::int64_t last = horizons.back();

  DivergenceReport rep;
  rep.horizons = horizons;

  // running[seed][run][k]
  std::vector<double> seed_means(static_cast<std::size_t>(seeds) * m, 0.0);
  std::vector<double> first_path(static_cast<std::size_t>(seeds) * m, 0.0);
  std::vector<double> totals;
  std::vector<double> running(m);
  for (std::int64_t sd = 0; sd < seeds; ++sd) {
    for (std::int64_t run = 0; run < runs; ++run) {
      CounterRng rng(static_cast<std::uint64_t>(sd), static_cast<std::uint64_t>(run));
      double cumulative = 0.0;
      std::size_t k = 0;
      try {
        run_trajectory(spec, prepared, last, rng, totals, [&](std::int64_t t, double c) {
          cumulative += c;
          while (k < m && t + 1 == horizons[k]) {
            running[k] = cumulative / static_cast<double>(horizons[k]);
            ++k;
          }
          return true;
        });
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::range) throw;
        for (; k < m; ++k) running[k] = kInf;  // saturate once costs overflow
      }
      for (std::size_t j = 0; j < m; ++j) {
        seed_means[static_cast<std::size_t>(sd) * m + j] += running[j] / static_cast<double>(runs);
        if (run == 0) first_path[static_cast<std::size_t>(sd) * m + j] = running[j];
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> means(static_cast<std::size_t>(seeds));
    std::vector<double> paths(static_cast<std::size_t>(seeds));
    for (std::int64_t sd = 0; sd < seeds; ++sd) {
      means[static_cast<std::size_t>(sd)] = seed_means[static_cast<std::size_t>(sd) * m + j];
      paths[static_cast<std::size_t>(sd)] = first_path[static_cast<std::size_t>(sd) * m + j];
    }
    rep.median_of_means.push_back(median(std::move(means)));
    rep.median_single_path.push_back(median(std::move(paths)));
  }

  if (std::holds_alternative<policy::StationaryRandomized>(policy.variant())) {
    rep.expected = expected_running_average(spec, policy, horizons);
  } else if (spec.all_reliable()) {
    // Deterministic trajectory: the single path is the expectation.
    rep.expected = rep.median_single_path;
  } else {
    rep.expected.assign(m, std::numeric_limits<double>::quiet_NaN());
  }
  return rep;
}

}  // namespace aoi
