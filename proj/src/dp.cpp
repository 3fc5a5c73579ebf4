#include "aoi/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aoi/errors.hpp"
#include "aoi/parallel.hpp"

namespace aoi {

namespace {

constexpr double kTruncationWarning = 1e-6;
constexpr std::size_t kMaxStates = std::size_t{1} << 32;

}  // namespace

TruncatedBox::TruncatedBox(Age a_max, std::size_t n) : a_max_(a_max), n_(n), states_(1) {
  if (a_max < 1) raise(ErrorKind::domain, "age cap must be positive");
  if (n < 1) raise(ErrorKind::domain, "box needs at least one source");
  for (std::size_t i = 0; i < n; ++i) {
    if (states_ > kMaxStates / static_cast<std::size_t>(a_max)) {
      raise(ErrorKind::capacity, "state box a_max^N exceeds 2^32 states");
    }
    states_ *= static_cast<std::size_t>(a_max);
  }
}

bool TruncatedBox::contains(std::span<const Age> ages) const noexcept {
  if (ages.size() != n_) return false;
  return std::all_of(ages.begin(), ages.end(), [&](Age a) { return a >= 1 && a <= a_max_; });
}

std::size_t TruncatedBox::index(std::span<const Age> ages) const {
  if (!contains(ages)) raise(ErrorKind::domain, "state " + format_ages(ages) + " lies outside the box");
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < n_; ++i) {
    idx += static_cast<std::size_t>(ages[i] - 1) * stride;
    stride *= static_cast<std::size_t>(a_max_);
  }
  return idx;
}

AgeVector TruncatedBox::decode(std::size_t index) const {
  AgeVector ages(n_);
  const auto radix = static_cast<std::size_t>(a_max_);
  for (std::size_t i = 0; i < n_; ++i) {
    ages[i] = static_cast<Age>(index % radix) + 1;
    index /= radix;
  }
  return ages;
}

Age default_a_max(std::size_t sources) {
  if (sources <= 2) return 30;
  if (sources == 3) return 20;
  if (sources == 4) return 15;
  return 10;
}

SourceIndex DpSolution::action(std::span<const Age> ages) const {
  return first_stage_actions.at(box().index(ages));
}

Policy DpSolution::as_policy() const {
  const auto b = box();
  StateActionTable table;
  table.reserve(first_stage_actions.size());
  for (std::size_t s = 0; s < first_stage_actions.size(); ++s) table.emplace(b.decode(s), first_stage_actions[s]);
  return Policy::tabular(std::move(table), true);
}

std::size_t dp_memory_estimate(std::size_t states, std::int64_t horizon, std::size_t sources) {
  // cost + two value layers + forward distribution + transition indices + cap flag
  const std::size_t per_state = 8 + 16 + 16 + 4 * (sources + 1) + 1;
  return states * per_state + states * static_cast<std::size_t>(std::max<std::int64_t>(horizon, 0));
}

DpSolution finite_horizon_dp(const SystemSpec& spec, std::int64_t horizon, const TruncatedBox& box,
                             const AgeVector& initial, const DpOptions& options) {
  const std::size_t n = spec.size();
  if (box.sources() != n) raise(ErrorKind::domain, "box dimension does not match the source count");
  if (n > 255) raise(ErrorKind::capacity, "action tables hold at most 255 sources");
  if (horizon < 1) raise(ErrorKind::domain, "horizon must be positive");
  if (!box.contains(initial)) raise(ErrorKind::domain, "initial state " + format_ages(initial) + " lies outside the box");

  const std::size_t states = box.states();
  const std::size_t need = dp_memory_estimate(states, horizon, n);
  if (need > options.memory_budget_bytes) {
    raise(ErrorKind::capacity, "dynamic program needs ~" + std::to_string(need >> 20) + " MiB, budget is " +
                                   std::to_string(options.memory_budget_bytes >> 20) + " MiB");
  }

  const Age cap = box.a_max();
  std::vector<double> cost(states);
  std::vector<std::uint8_t> capped(states);
  std::vector<std::uint32_t> aged(states);            // everyone ages by one
  std::vector<std::uint32_t> served(states * n);      // source i reset to 1
  {
    std::vector<std::size_t> stride(n);
    std::size_t st = 1;
    for (std::size_t i = 0; i < n; ++i) {
      stride[i] = st;
      st *= static_cast<std::size_t>(cap);
    }
    for (std::size_t s = 0; s < states; ++s) {
      const auto x = box.decode(s);
      cost[s] = spec.cost(x);
      capped[s] = std::any_of(x.begin(), x.end(), [cap](Age a) { return a == cap; });
      std::size_t next = 0;
      for (std::size_t i = 0; i < n; ++i) {
        next += static_cast<std::size_t>(std::min(x[i] + 1, cap) - 1) * stride[i];
      }
      aged[s] = static_cast<std::uint32_t>(next);
      for (std::size_t i = 0; i < n; ++i) {
        const auto aged_i = static_cast<std::size_t>(std::min(x[i] + 1, cap) - 1);
        served[s * n + i] = static_cast<std::uint32_t>(next - aged_i * stride[i]);
      }
    }
  }

  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = spec[i].p;

  const auto h = static_cast<std::size_t>(horizon);
  std::vector<std::uint8_t> actions(h * states);
  std::vector<double> later(states, 0.0);
  std::vector<double> now(states, 0.0);
  for (std::size_t t = h; t-- > 0;) {
    std::uint8_t* stage = actions.data() + t * states;
    parallel_chunks(states, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t s = begin; s < end; ++s) {
        const double stay = later[aged[s]];
        double best = std::numeric_limits<double>::infinity();
        std::uint8_t choice = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double reset = later[served[s * n + i]];
          const double value = p[i] == 1.0 ? reset : p[i] * reset + (1.0 - p[i]) * stay;
          if (value < best) {
            best = value;
            choice = static_cast<std::uint8_t>(i);
          }
        }
        now[s] = cost[s] + best;
        stage[s] = choice;
      }
    });
    std::swap(now, later);
  }

  DpSolution sol;
  sol.horizon = horizon;
  sol.initial = initial;
  sol.a_max = cap;
  const std::size_t start = box.index(initial);
  sol.optimal_average_cost = later[start] / static_cast<double>(horizon);
  sol.first_stage_actions.assign(actions.begin(), actions.begin() + static_cast<std::ptrdiff_t>(states));

  // Forward pass: distribution of the optimal trajectory.
  std::vector<double> dist(states, 0.0);
  std::vector<double> next_dist(states, 0.0);
  dist[start] = 1.0;
  sol.expected_slot_costs.resize(h);
  const bool reliable = spec.all_reliable();
  std::size_t current = start;
  for (std::size_t t = 0; t < h; ++t) {
    const std::uint8_t* stage = actions.data() + t * states;
    if (reliable) {
      sol.optimal_path.push_back(box.decode(current));
      sol.optimal_actions.push_back(stage[current]);
      current = served[current * n + stage[current]];
    }
    double slot_cost = 0.0;
    double at_cap = 0.0;
    std::fill(next_dist.begin(), next_dist.end(), 0.0);
    for (std::size_t s = 0; s < states; ++s) {
      const double mass = dist[s];
      if (mass == 0.0) continue;
      slot_cost += mass * cost[s];
      if (capped[s]) at_cap += mass;
      const std::size_t i = stage[s];
      next_dist[served[s * n + i]] += mass * p[i];
      if (p[i] < 1.0) next_dist[aged[s]] += mass * (1.0 - p[i]);
    }
    sol.expected_slot_costs[t] = slot_cost;
    sol.truncation_report = std::max(sol.truncation_report, at_cap);
    std::swap(dist, next_dist);
  }
  if (sol.truncation_report > kTruncationWarning) {
    sol.warning = "optimal trajectory reaches the age cap " + std::to_string(cap) + " with probability " +
                  std::to_string(sol.truncation_report);
  }
  if (options.keep_stage_tables) {
    sol.stage_tables.resize(h);
    for (std::size_t t = 0; t < h; ++t) {
      const auto first = actions.begin() + static_cast<std::ptrdiff_t>(t * states);
      sol.stage_tables[t].assign(first, first + static_cast<std::ptrdiff_t>(states));
    }
  }
  return sol;
}

DpSolution solve_dp(const SystemSpec& spec, std::int64_t horizon, std::optional<Age> a_max,
                    const DpOptions& options) {
  const std::size_t n = spec.size();
  Age cap = a_max.value_or(default_a_max(n));
  std::optional<DpSolution> best;
  for (;;) {
    const TruncatedBox box(cap, n);
    if (best && dp_memory_estimate(box.states(), horizon, n) > options.memory_budget_bytes) {
      best->warning = best->warning.value_or("") + "; cap doubling stopped by the memory budget";
      return *best;
    }
    best = finite_horizon_dp(spec, horizon, box, ones(n), options);
    if (a_max || best->truncation_report <= kTruncationWarning) return *best;
    cap *= 2;
  }
}

Cycle extract_cycle_policy(const DpSolution& sol, const SystemSpec& spec) {
  if (!spec.all_reliable()) raise(ErrorKind::domain, "cycle extraction needs reliable channels");
  if (sol.initial.size() != spec.size()) raise(ErrorKind::domain, "solution and spec disagree on the source count");
  const auto& path = sol.optimal_path;
  if (path.size() != static_cast<std::size_t>(sol.horizon)) {
    raise(ErrorKind::domain, "solution carries no optimal trajectory");
  }
  const std::size_t anchor = path.size() / 2;
  for (std::size_t t = anchor + 1; t < path.size(); ++t) {
    if (path[t] != path[anchor]) continue;
    Cycle c;
    c.transient_length = anchor;
    c.states.assign(path.begin() + static_cast<std::ptrdiff_t>(anchor), path.begin() + static_cast<std::ptrdiff_t>(t));
    c.actions.assign(sol.optimal_actions.begin() + static_cast<std::ptrdiff_t>(anchor),
                     sol.optimal_actions.begin() + static_cast<std::ptrdiff_t>(t));
    c.average_cost = cycle_average_cost(spec, c.states);
    return c;
  }
  raise(ErrorKind::non_cyclic, "optimal trajectory does not revisit its mid-horizon state " +
                                   format_ages(path[anchor]) + " before the horizon ends");
}

}  // namespace aoi
