#include "aoi/structure.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "aoi/decoupled.hpp"
#include "aoi/errors.hpp"

namespace aoi {

StateActionSet StateActionSet::from_cycle(const Cycle& cycle) {
  StateActionSet set;
  set.pairs.reserve(cycle.length());
  for (std::size_t k = 0; k < cycle.length(); ++k) set.pairs.push_back({cycle.states[k], cycle.actions[k]});
  return set;
}

namespace {

/// True when `other` dominates `base` for base.action yet acts differently.
bool violates(const StateAction& base, const StateAction& other) {
  const SourceIndex i = base.action;
  if (other.action == i) return false;
  for (std::size_t j = 0; j < base.state.size(); ++j) {
    if (j == i ? other.state[j] < base.state[j] : other.state[j] > base.state[j]) return false;
  }
  return true;
}

}  // namespace

std::vector<SwitchViolation> check_strong_switch(const StateActionSet& set) {
  const auto& pairs = set.pairs;
  std::unordered_set<AgeVector, AgeVectorHash> distinct;
  for (const auto& pa : pairs) {
    if (!pairs.empty() && pa.state.size() != pairs.front().state.size()) {
      raise(ErrorKind::domain, "state-action pairs mix dimensions");
    }
    if (pa.action >= pa.state.size()) raise(ErrorKind::domain, "action outside the source range");
    if (!distinct.insert(pa.state).second) {
      raise(ErrorKind::domain, "state " + format_ages(pa.state) + " appears twice");
    }
  }
  std::vector<SwitchViolation> out;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    for (std::size_t b = a + 1; b < pairs.size(); ++b) {
      if (violates(pairs[a], pairs[b])) {
        out.push_back({pairs[a], pairs[b], pairs[a].action});
      } else if (violates(pairs[b], pairs[a])) {
        out.push_back({pairs[b], pairs[a], pairs[b].action});
      }
    }
  }
  return out;
}

double two_source_cycle_cost(const CostFunction& f1, const CostFunction& f2, std::int64_t k) {
  if (k < 1) raise(ErrorKind::domain, "cycle repetition count k must be at least 1");
  const double total = prefix_sum(f2, k + 1) + static_cast<double>(k) * f1(1) + f1(2);
  return total / static_cast<double>(k + 1);
}

std::vector<SourceIndex> TwoSourceCycle::actions() const {
  std::vector<SourceIndex> a(static_cast<std::size_t>(k), leader);
  a.push_back(1 - leader);
  return a;
}

TwoSourceCycle best_two_source_cycle(const CostFunction& f1, const CostFunction& f2, std::int64_t k_max) {
  if (k_max < 1) raise(ErrorKind::domain, "k_max must be at least 1");
  TwoSourceCycle best;
  best.cost = std::numeric_limits<double>::infinity();
  const CostFunction* fs[2] = {&f1, &f2};
  for (SourceIndex leader = 0; leader < 2; ++leader) {
    const CostFunction& lead = *fs[leader];
    const CostFunction& other = *fs[1 - leader];
    const double lead_part = lead(1);
    const double lead_two = lead(2);
    KahanSum other_prefix;
    other_prefix.add(other(1));
    for (std::int64_t k = 1; k <= k_max; ++k) {
      try {
        other_prefix.add(other(k + 1));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::range) throw;
        break;  // costs only grow from here
      }
      const double cost = (other_prefix.value() + static_cast<double>(k) * lead_part + lead_two) /
                          static_cast<double>(k + 1);
      const bool better = cost < best.cost ||
                          (cost == best.cost && (k < best.k || (k == best.k && leader < best.leader)));
      if (better) best = {leader, k, cost};
    }
  }
  if (best.k >= k_max) {
    raise(ErrorKind::inconclusive, "best two-source cycle sits at k_max = " + std::to_string(k_max) +
                                       "; retry with a larger k_max");
  }
  return best;
}

namespace {

[[noreturn]] void fail(const std::string& what) { raise(ErrorKind::certification, what); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

/// Whittle's tie-break: the lower index wins equal values.
bool whittle_prefers(SourceIndex i, double wi, SourceIndex j, double wj) { return i < j ? wi >= wj : wi > wj; }

}  // namespace

Theorem3Certificate certify_theorem3(const CostFunction& f1, const CostFunction& f2, const CertifyOptions& options) {
  const SystemSpec spec({Source{f1, 1.0}, Source{f2, 1.0}});
  Theorem3Certificate cert;
  cert.whittle_cycle = detect_cycle(spec, Policy::whittle());
  cert.best_cycle = best_two_source_cycle(f1, f2, options.k_max);

  // Read the Whittle cycle as "leader k times, then the other once".
  const auto& acts = cert.whittle_cycle.actions;
  std::size_t count[2] = {0, 0};
  for (auto a : acts) ++count[a];
  if (count[0] == 0 || count[1] == 0) fail("Whittle cycle never serves one of the sources");
  if (count[0] != 1 && count[1] != 1) {
    fail("Whittle cycle serves both sources more than once per period");
  }
  const SourceIndex other = count[1] == 1 ? SourceIndex{1} : SourceIndex{0};
  const SourceIndex leader = 1 - other;
  const auto k = static_cast<std::int64_t>(count[leader]);
  cert.whittle_leader = leader;
  cert.whittle_k = k;

  const CostFunction& fl = spec[leader].cost;
  const CostFunction& fo = spec[other].cost;
  const double expected = two_source_cycle_cost(fl, fo, k);
  const double scale = std::max(1.0, std::abs(expected));
  if (std::abs(cert.whittle_cycle.average_cost - expected) > options.cycle_tolerance * scale) {
    fail("Whittle cycle cost " + fmt(cert.whittle_cycle.average_cost) + " differs from the closed form " +
         fmt(expected));
  }

  // Index inequalities at the realised k.
  const double wl1 = whittle_reliable(fl, 1);
  const double wok1 = whittle_reliable(fo, k + 1);
  cert.index_values = {{"W_leader(1)", wl1}, {"W_other(k+1)", wok1}};
  if (!whittle_prefers(other, wok1, leader, wl1)) {
    fail("W_other(k+1) = " + fmt(wok1) + " does not beat W_leader(1) = " + fmt(wl1));
  }
  if (k > 1) {
    const double wok = whittle_reliable(fo, k);
    cert.index_values.emplace_back("W_other(k)", wok);
    if (!whittle_prefers(leader, wl1, other, wok)) {
      fail("W_leader(1) = " + fmt(wl1) + " does not beat W_other(k) = " + fmt(wok));
    }
  } else {
    const double wl2 = whittle_reliable(fl, 2);
    const double wo1 = whittle_reliable(fo, 1);
    cert.index_values.emplace_back("W_leader(2)", wl2);
    cert.index_values.emplace_back("W_other(1)", wo1);
    if (!whittle_prefers(leader, wl2, other, wo1)) {
      fail("W_leader(2) = " + fmt(wl2) + " does not beat W_other(1) = " + fmt(wo1));
    }
  }

  const double best = cert.best_cycle.cost;
  if (std::abs(cert.whittle_cycle.average_cost - best) > options.cycle_tolerance * std::max(1.0, std::abs(best))) {
    fail("Whittle cycle cost " + fmt(cert.whittle_cycle.average_cost) + " differs from the best cycle cost " +
         fmt(best));
  }

  cert.dp_a_max = std::max<Age>(default_a_max(2), 2 * (std::max(cert.best_cycle.k, k) + 2));
  const auto dp = finite_horizon_dp(spec, options.horizon, TruncatedBox(cert.dp_a_max, 2), ones(2));
  cert.dp_cost = dp.optimal_average_cost;
  if (std::abs(cert.dp_cost - best) > options.dp_relative_tolerance * std::abs(best)) {
    fail("finite-horizon optimum " + fmt(cert.dp_cost) + " is not within " + fmt(options.dp_relative_tolerance) +
         " of the best cycle cost " + fmt(best));
  }
  return cert;
}

}  // namespace aoi
