#include "aoi/decoupled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aoi/errors.hpp"

namespace aoi {

namespace {

constexpr Age kMaxThresholdScan = 100'000'000;
constexpr std::int64_t kMaxSeriesTerms = 50'000'000;

void validate_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) raise(ErrorKind::domain, "success probability must lie in (0, 1]");
}

void require_bounded(const CostFunction& f, double p) {
  validate_probability(p);
  const auto report = is_bounded_cost(f, p);
  if (!report.bounded) {
    raise(ErrorKind::admissibility, f.describe() + " with p = " + std::to_string(p) + ": " + report.reason);
  }
}

}  // namespace

ThresholdPolicy ThresholdPolicy::at(Age threshold) {
  if (threshold < 1) raise(ErrorKind::domain, "threshold must be a positive integer");
  ThresholdPolicy t;
  t.kind_ = Kind::finite;
  t.threshold_ = threshold;
  return t;
}

Age ThresholdPolicy::value() const {
  if (is_never()) raise(ErrorKind::domain, "NEVER threshold has no finite value");
  return threshold_;
}

std::string ThresholdPolicy::to_string() const {
  return is_never() ? "NEVER" : std::to_string(threshold_);
}

std::strong_ordering ThresholdPolicy::operator<=>(const ThresholdPolicy& o) const noexcept {
  if (is_never() || o.is_never()) return is_never() <=> o.is_never();
  return threshold_ <=> o.threshold_;
}

void validate_problem(const DecoupledProblem& prob) {
  if (!(prob.charge >= 0.0) || !std::isfinite(prob.charge)) {
    raise(ErrorKind::domain, "activation charge must be finite and non-negative");
  }
  require_bounded(prob.cost, prob.p);
}

double whittle_reliable(const CostFunction& f, Age h) {
  if (h < 1) raise(ErrorKind::domain, "Whittle index requested at age < 1");
  return static_cast<double>(h) * f(h + 1) - prefix_sum(f, h);
}

double geometric_tail(const CostFunction& f, double p, Age h, double tol) {
  if (!(tol > 0.0)) raise(ErrorKind::domain, "series tolerance must be positive");
  if (h < 0) raise(ErrorKind::domain, "series offset must be non-negative");
  require_bounded(f, p);
  const double q = 1.0 - p;
  if (q == 0.0) return f(h + 1);

  KahanSum sum;
  double weight = 1.0;  // q^{k-1}
  const double log_q = std::log(q);
  const double log_ceiling = std::log(kCostCeiling);
  for (std::int64_t k = 1; k <= kMaxSeriesTerms; ++k) {
    const Age age = h + k;
    // Once f itself would overflow, form the product in log space; the
    // series still converges when q times the growth ratio is below 1.
    const double log_f = f.log_value(age);
    const bool direct = log_f <= log_ceiling && weight > 1e-300;
    const double term = direct ? f(age) * weight : std::exp(log_f + static_cast<double>(k - 1) * log_q);
    if (!std::isfinite(term)) {
      raise(ErrorKind::range, "geometric tail of " + f.describe() + " overflows at age " + std::to_string(age));
    }
    sum.add(term);
    const double r = q * f.growth_ratio_bound(age);
    if (r < 1.0) {
      const double tail = term * r / (1.0 - r);
      if (tail < tol * std::max(1.0, sum.value())) return sum.value();
    }
    weight *= q;
    if (!direct && term == 0.0) return sum.value();
  }
  raise(ErrorKind::convergence, "geometric tail of " + f.describe() + " did not converge");
}

double whittle_unreliable(const CostFunction& f, double p, Age h, double tol) {
  if (!(tol > 0.0)) raise(ErrorKind::domain, "series tolerance must be positive");
  if (h < 1) raise(ErrorKind::domain, "Whittle index requested at age < 1");
  require_bounded(f, p);
  if (p == 1.0) return whittle_reliable(f, h);
  const double hd = static_cast<double>(h);
  return p * p * hd * geometric_tail(f, p, h, tol) - p * prefix_sum(f, h);
}

double whittle_index(const CostFunction& f, double p, Age h) {
  if (h == 0) return 0.0;
  return p == 1.0 ? whittle_reliable(f, h) : whittle_unreliable(f, p, h);
}

bool satisfies_threshold_condition(const DecoupledProblem& prob, Age threshold, double rel_slack) {
  if (threshold < 1) return false;
  const auto& f = prob.cost;
  const double c = prob.charge;
  const auto le = [&](double a, double b) { return a <= b + rel_slack * std::max(std::abs(a), std::abs(b)); };
  if (prob.p == 1.0) {
    const double hd = static_cast<double>(threshold);
    const double total = prefix_sum(f, threshold) + c;
    return le(hd * f(threshold), total) && le(total, hd * f(threshold + 1));
  }
  return le(whittle_index(f, prob.p, threshold - 1), c) && le(c, whittle_index(f, prob.p, threshold));
}

namespace {

ThresholdPolicy scan_reliable(const DecoupledProblem& prob) {
  const auto& f = prob.cost;
  const auto saturation = f.saturation_age();
  KahanSum prefix;
  for (Age h = 1; h <= kMaxThresholdScan; ++h) {
    prefix.add(f(h));
    const double w = static_cast<double>(h) * f(h + 1) - prefix.value();
    if (w > prob.charge) return ThresholdPolicy::at(h);
    // W is constant once f has saturated.
    if (saturation && h >= *saturation) return ThresholdPolicy::never();
  }
  raise(ErrorKind::range, "threshold scan exceeded " + std::to_string(kMaxThresholdScan));
}

ThresholdPolicy search_unreliable(const DecoupledProblem& prob) {
  const auto& f = prob.cost;
  const double p = prob.p;
  const double c = prob.charge;
  if (const auto saturation = f.saturation_age()) {
    if (whittle_unreliable(f, p, *saturation) <= c) return ThresholdPolicy::never();
  }
  Age lo = 0;  // W(lo) <= c (W(0) = 0)
  Age hi = 1;
  while (whittle_unreliable(f, p, hi) <= c) {
    lo = hi;
    if (hi > kMaxThresholdScan) raise(ErrorKind::range, "threshold search exceeded its limit");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const Age mid = lo + (hi - lo) / 2;
    if (whittle_unreliable(f, p, mid) > c) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return ThresholdPolicy::at(hi);
}

}  // namespace

ThresholdPolicy optimal_threshold(const DecoupledProblem& prob) {
  validate_problem(prob);
  if (prob.charge == 0.0) return ThresholdPolicy::at(1);
  const auto policy = prob.p == 1.0 ? scan_reliable(prob) : search_unreliable(prob);
  // At C = W(H) both sides meet exactly, so allow rounding-level slack.
  if (!policy.is_never() && !satisfies_threshold_condition(prob, policy.value(), 1e-12)) {
    raise(ErrorKind::consistency, "threshold " + policy.to_string() + " for " + prob.cost.describe() +
                                      " at charge " + std::to_string(prob.charge) +
                                      " fails the two-sided optimality condition");
  }
  return policy;
}

double threshold_average_cost(const DecoupledProblem& prob, const ThresholdPolicy& policy) {
  validate_problem(prob);
  const auto& f = prob.cost;
  if (policy.is_never()) return f.is_bounded() ? f.supremum() : std::numeric_limits<double>::infinity();
  const Age big_h = policy.value();
  const double hd = static_cast<double>(big_h);
  const double p = prob.p;
  const double sum = prefix_sum(f, big_h);
  if (p == 1.0) return (sum + prob.charge) / hd;
  const double tail = (1.0 - p) * geometric_tail(f, p, big_h);
  return (p * (sum + tail) + prob.charge) / (1.0 + p * (hd - 1.0));
}

DecoupledSolution decoupled_value_iteration(const DecoupledProblem& prob, Age a_max, double tol,
                                            std::int64_t max_iters, Boundary boundary) {
  validate_problem(prob);
  if (a_max < 2) raise(ErrorKind::domain, "value iteration needs a_max >= 2");
  if (!(tol > 0.0) || max_iters < 1) raise(ErrorKind::domain, "tolerance and iteration cap must be positive");

  const auto n = static_cast<std::size_t>(a_max);
  const double p = prob.p;
  const double q = 1.0 - p;
  const double c = prob.charge;
  std::vector<double> cost(n);
  for (std::size_t i = 0; i < n; ++i) cost[i] = prob.cost(static_cast<Age>(i + 1));
  // Where activation is always taken, V(a) - G(a) is constant with
  // G(a) = sum_n q^n f(a+n), so V(a_max+1) = V(a_max) + G(a_max+1) - G(a_max).
  // Using G(a) = f(a) + q G(a+1) keeps lambda out of the boundary.
  const bool tail = boundary == Boundary::activate_tail;
  const double step = tail ? p * geometric_tail(prob.cost, p, a_max) - cost[n - 1] : 0.0;

  // Damped update V <- V + (TV - V)/2 makes the reset cycle aperiodic
  // without moving the fixed point.
  constexpr double kDamping = 0.5;
  std::vector<double> v(n, 0.0);
  std::vector<double> tv(n, 0.0);
  DecoupledSolution sol;
  sol.a_max = a_max;
  double lambda = 0.0;
  double span = std::numeric_limits<double>::infinity();
  std::int64_t it = 0;
  for (; it < max_iters; ++it) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const double beyond = v[n - 1] + step;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = i + 1 < n ? v[i + 1] : beyond;
      const double activate = c + p * v[0] + q * next;
      tv[i] = cost[i] + std::min(activate, next);
      const double diff = tv[i] - v[i];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    lambda = 0.5 * (lo + hi);
    span = hi - lo;
    if (span < tol * std::max(1.0, std::abs(lambda))) break;
    const double anchor = v[0] + kDamping * (tv[0] - v[0]);
    for (std::size_t i = 0; i < n; ++i) v[i] = v[i] + kDamping * (tv[i] - v[i]) - anchor;
  }
  if (it == max_iters) {
    raise(ErrorKind::convergence, "value iteration stopped after " + std::to_string(max_iters) +
                                      " iterations with span " + std::to_string(span));
  }

  sol.iterations = it;
  sol.span = span;
  sol.average_cost = lambda;
  sol.differential_costs.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.differential_costs[i] = v[i] - v[0];

  // Activation at h is strictly better iff C < p * S(next(h)).
  const auto& s = sol.differential_costs;
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < n; ++i) {
    const bool act = c < p * s[std::min(i + 1, n - 1)];
    if (act && !first) first = i;
    if (!act && first) {
      raise(ErrorKind::consistency, "greedy decoupled policy is not of threshold type");
    }
  }
  sol.policy = first ? ThresholdPolicy::at(static_cast<Age>(*first + 1)) : ThresholdPolicy::never();
  return sol;
}

DecoupledSolution solve_decoupled(const DecoupledProblem& prob, double tol, std::int64_t max_iters) {
  const auto guess = optimal_threshold(prob);
  const auto& f = prob.cost;
  if (f.is_bounded()) {
    // Past saturation every age behaves alike, so the clamp is exact.
    Age a_max = std::max<Age>(256, 2 * *f.saturation_age());
    if (!guess.is_never()) a_max = std::max<Age>(a_max, 64 * guess.value());
    return decoupled_value_iteration(prob, a_max, tol, max_iters);
  }
  // Unbounded f: the guess is always finite. Costs far above lambda only add
  // rounding noise to the span, so grow the box while f stays near its scale.
  const Age h = guess.value();
  const double scale = 10.0 * std::max({1.0, threshold_average_cost(prob, guess), prob.charge});
  Age a_max = h + 2;
  while (a_max < 2 * h + 2 && f.log_value(a_max + 1) <= std::log(scale)) ++a_max;
  for (;;) {
    auto sol = decoupled_value_iteration(prob, a_max, tol, max_iters, Boundary::activate_tail);
    if (sol.policy.is_never() || sol.policy.value() >= a_max) {
      a_max *= 2;
      continue;
    }
    return sol;
  }
}

std::vector<ThresholdPolicy> indexability_sweep(const CostFunction& f, double p,
                                                std::span<const double> charges) {
  std::vector<ThresholdPolicy> out;
  out.reserve(charges.size());
  for (std::size_t i = 0; i < charges.size(); ++i) {
    if (!(charges[i] >= 0.0)) raise(ErrorKind::domain, "charges must be non-negative");
    if (i > 0 && !(charges[i] > charges[i - 1])) raise(ErrorKind::domain, "charges must be strictly increasing");
    out.push_back(optimal_threshold(DecoupledProblem{f, p, charges[i]}));
    if (i > 0 && out[i] < out[i - 1]) {
      raise(ErrorKind::consistency, "threshold decreased as the charge grew");
    }
  }
  return out;
}

}  // namespace aoi
