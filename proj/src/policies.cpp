#include "aoi/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aoi/decoupled.hpp"
#include "aoi/errors.hpp"

namespace aoi {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double whittle_value(const SystemSpec& spec, const IndexTable* table, SourceIndex i, Age age) {
  if (table) {
    const auto& row = table->values[i];
    if (static_cast<std::size_t>(age) <= row.size()) return row[static_cast<std::size_t>(age - 1)];
  }
  return whittle_index(spec[i].cost, spec[i].p, age);
}

SourceIndex whittle_decision(const SystemSpec& spec, const IndexTable* table, std::span<const Age> ages) {
  SourceIndex best = 0;
  double best_value = whittle_value(spec, table, 0, ages[0]);
  for (SourceIndex i = 1; i < spec.size(); ++i) {
    const double w = whittle_value(spec, table, i, ages[i]);
    if (w > best_value) {
      best = i;
      best_value = w;
    }
  }
  return best;
}

}  // namespace

SourceIndex argmax_lowest(std::span<const double> values) {
  if (values.empty()) raise(ErrorKind::domain, "argmax of an empty range");
  SourceIndex best = 0;
  for (SourceIndex i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

IndexTable whittle_index_table(const SystemSpec& spec, Age a_max) {
  if (a_max < 1) raise(ErrorKind::domain, "index table size must be positive");
  IndexTable table;
  table.values.resize(spec.size());
  for (SourceIndex i = 0; i < spec.size(); ++i) {
    const auto& f = spec[i].cost;
    const double p = spec[i].p;
    auto& row = table.values[i];
    row.reserve(static_cast<std::size_t>(a_max));
    try {
      if (p == 1.0) {
        KahanSum prefix;
        for (Age h = 1; h <= a_max; ++h) {
          prefix.add(f(h));
          row.push_back(static_cast<double>(h) * f(h + 1) - prefix.value());
        }
      } else {
        for (Age h = 1; h <= a_max; ++h) row.push_back(whittle_unreliable(f, p, h));
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::range) throw;
      // Row stops where the cost leaves the representable range.
    }
  }
  return table;
}

Policy Policy::whittle(const SystemSpec& spec, Age a_max) {
  return policy::Whittle{std::make_shared<const IndexTable>(whittle_index_table(spec, a_max))};
}

Policy Policy::index(IndexTable table) {
  return policy::Index{std::make_shared<const IndexTable>(std::move(table))};
}

Policy Policy::round_robin(std::size_t n) {
  std::vector<SourceIndex> order(n);
  std::iota(order.begin(), order.end(), SourceIndex{0});
  return policy::RoundRobin{std::move(order)};
}

Policy Policy::tabular(StateActionTable table, bool fallback) {
  return policy::Tabular{std::make_shared<const StateActionTable>(std::move(table)), fallback};
}

std::string Policy::name() const {
  return std::visit(Overloaded{
                        [](const policy::Whittle&) { return "whittle"; },
                        [](const policy::Index&) { return "index"; },
                        [](const policy::RoundRobin&) { return "round_robin"; },
                        [](const policy::StationaryRandomized&) { return "randomized"; },
                        [](const policy::MaxAge&) { return "max_age"; },
                        [](const policy::FixedCycle&) { return "cycle"; },
                        [](const policy::Tabular&) { return "tabular"; },
                    },
                    v_);
}

bool Policy::is_deterministic() const noexcept {
  return !std::holds_alternative<policy::StationaryRandomized>(v_);
}

std::size_t Policy::period() const noexcept {
  if (const auto* rr = std::get_if<policy::RoundRobin>(&v_)) return std::max<std::size_t>(1, rr->order.size());
  if (const auto* fc = std::get_if<policy::FixedCycle>(&v_)) return std::max<std::size_t>(1, fc->actions.size());
  return 1;
}

void Policy::validate(const SystemSpec& spec) const {
  const std::size_t n = spec.size();
  auto check_index = [n](SourceIndex i) {
    if (i >= n) raise(ErrorKind::domain, "policy refers to source " + std::to_string(i + 1) + " of " + std::to_string(n));
  };
  std::visit(Overloaded{
                 [&](const policy::Whittle& w) {
                   if (w.table && w.table->size() != n) raise(ErrorKind::domain, "index table size mismatch");
                 },
                 [&](const policy::Index& w) {
                   if (!w.table || w.table->size() != n) raise(ErrorKind::domain, "index table size mismatch");
                   for (const auto& row : w.table->values) {
                     if (row.empty()) raise(ErrorKind::domain, "index policy rows must be non-empty");
                     for (std::size_t h = 1; h < row.size(); ++h) {
                       if (row[h] < row[h - 1]) raise(ErrorKind::domain, "index functions must be non-decreasing");
                     }
                   }
                 },
                 [&](const policy::RoundRobin& rr) {
                   if (rr.order.size() != n) raise(ErrorKind::domain, "round-robin order must list every source once");
                   std::vector<bool> seen(n, false);
                   for (auto i : rr.order) {
                     check_index(i);
                     if (seen[i]) raise(ErrorKind::domain, "round-robin order repeats a source");
                     seen[i] = true;
                   }
                 },
                 [&](const policy::StationaryRandomized& r) {
                   if (r.probs.size() != n) raise(ErrorKind::domain, "randomized policy needs one probability per source");
                   double total = 0.0;
                   for (double q : r.probs) {
                     if (!(q >= 0.0 && q <= 1.0)) raise(ErrorKind::domain, "scheduling probabilities must lie in [0, 1]");
                     total += q;
                   }
                   if (std::abs(total - 1.0) > 1e-9) raise(ErrorKind::domain, "scheduling probabilities must sum to 1");
                 },
                 [](const policy::MaxAge&) {},
                 [&](const policy::FixedCycle& fc) {
                   if (fc.actions.empty()) raise(ErrorKind::domain, "fixed cycle must be non-empty");
                   for (auto i : fc.actions) check_index(i);
                 },
                 [&](const policy::Tabular& t) {
                   if (!t.table) raise(ErrorKind::domain, "tabular policy without a table");
                   for (const auto& [ages, action] : *t.table) {
                     if (ages.size() != n) raise(ErrorKind::domain, "tabular state has the wrong dimension");
                     check_index(action);
                   }
                 },
             },
             v_);
}

SourceIndex decide(const Policy& policy, const SystemSpec& spec, std::span<const Age> ages, std::uint64_t t,
                   CounterRng* rng) {
  return std::visit(
      Overloaded{
          [&](const policy::Whittle& w) { return whittle_decision(spec, w.table.get(), ages); },
          [&](const policy::Index& w) {
            SourceIndex best = 0;
            double best_value = 0.0;
            for (SourceIndex i = 0; i < spec.size(); ++i) {
              const auto& row = w.table->values[i];
              const auto h = std::min(static_cast<std::size_t>(ages[i]), row.size());
              const double v = row[h - 1];
              if (i == 0 || v > best_value) {
                best = i;
                best_value = v;
              }
            }
            return best;
          },
          [&](const policy::RoundRobin& rr) { return rr.order[t % rr.order.size()]; },
          [&](const policy::StationaryRandomized& r) {
            if (!rng) raise(ErrorKind::domain, "randomized policy needs a random stream");
            const double u = rng->uniform();
            double acc = 0.0;
            SourceIndex last = 0;
            for (SourceIndex i = 0; i < r.probs.size(); ++i) {
              if (r.probs[i] <= 0.0) continue;
              acc += r.probs[i];
              last = i;
              if (u < acc) return i;
            }
            return last;
          },
          [&](const policy::MaxAge&) {
            SourceIndex best = 0;
            for (SourceIndex i = 1; i < spec.size(); ++i) {
              if (ages[i] > ages[best]) best = i;
            }
            return best;
          },
          [&](const policy::FixedCycle& fc) { return fc.actions[t % fc.actions.size()]; },
          [&](const policy::Tabular& tab) {
            const AgeVector key(ages.begin(), ages.end());
            if (auto it = tab.table->find(key); it != tab.table->end()) return it->second;
            if (!tab.fallback) raise(ErrorKind::missing_state, "no tabulated action for state " + format_ages(ages));
            return whittle_decision(spec, nullptr, ages);
          },
      },
      policy.variant());
}

}  // namespace aoi
