#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aoi/cost.hpp"

namespace aoi {

inline constexpr double kDefaultSeriesTol = 1e-13;

/// Single arm in isolation, charged `charge` per activation.
struct DecoupledProblem {
  CostFunction cost;
  double p = 1.0;
  double charge = 0.0;
};

/// Activate at age h iff h >= threshold; NEVER activates at no age.
class ThresholdPolicy {
 public:
  static ThresholdPolicy at(Age threshold);
  static ThresholdPolicy never() noexcept { return ThresholdPolicy(); }

  bool is_never() const noexcept { return kind_ == Kind::never; }
  /// Throws if is_never().
  Age value() const;
  bool activates(Age h) const noexcept { return !is_never() && h >= threshold_; }
  std::string to_string() const;

  // NEVER orders above every finite threshold.
  std::strong_ordering operator<=>(const ThresholdPolicy& o) const noexcept;
  bool operator==(const ThresholdPolicy& o) const noexcept = default;

 private:
  enum class Kind : std::uint8_t { finite, never };
  ThresholdPolicy() = default;
  Kind kind_ = Kind::never;
  Age threshold_ = 0;
};

struct DecoupledSolution {
  ThresholdPolicy policy = ThresholdPolicy::never();
  /// Optimal average cost (lambda).
  double average_cost = 0.0;
  /// differential_costs[h - 1] = S(h), normalised so S(1) = 0.
  std::vector<double> differential_costs;
  Age a_max = 0;
  std::int64_t iterations = 0;
  double span = 0.0;
};

/// W(h) = h f(h+1) - sum_{j<=h} f(j).
double whittle_reliable(const CostFunction& f, Age h);

/// sum_{k>=1} f(k+h) (1-p)^{k-1}, truncated once the certified geometric
/// tail bound drops below tol * max(1, partial sum).
double geometric_tail(const CostFunction& f, double p, Age h, double tol = kDefaultSeriesTol);

/// W(h) = p^2 h sum_{k>=1} f(k+h)(1-p)^{k-1} - p sum_{j<=h} f(j).
/// Equals whittle_reliable exactly at p = 1.
double whittle_unreliable(const CostFunction& f, double p, Age h, double tol = kDefaultSeriesTol);

/// Whittle index with W(0) = 0, dispatching on p.
double whittle_index(const CostFunction& f, double p, Age h);

/// Smallest h with W(h) > charge, or NEVER when W stays at or below it.
/// The two-sided optimality condition is checked before returning.
ThresholdPolicy optimal_threshold(const DecoupledProblem& prob);

/// Two-sided condition on a finite threshold H: W(H-1) <= C <= W(H), i.e.
/// f(H) <= (sum_{j<=H} f(j) + C)/H <= f(H+1) when p = 1. A positive
/// rel_slack loosens both sides by that fraction of their magnitude.
bool satisfies_threshold_condition(const DecoupledProblem& prob, Age threshold, double rel_slack = 0.0);

/// Closed-form long-run average cost of running a threshold policy on the
/// untruncated chain.
double threshold_average_cost(const DecoupledProblem& prob, const ThresholdPolicy& policy);

/// What lies past the last modelled age.
enum class Boundary {
  /// Age a_max absorbs on rest.
  clamp,
  /// Ages above a_max always activate; their relative value is taken from
  /// the closed form, so truncation adds no error once the threshold is
  /// inside the box.
  activate_tail,
};

/// Relative value iteration on ages 1..a_max. Stops when the span of the
/// Bellman residual is below tol * max(1, |lambda|).
DecoupledSolution decoupled_value_iteration(const DecoupledProblem& prob, Age a_max,
                                            double tol = 1e-9,
                                            std::int64_t max_iters = 1'000'000,
                                            Boundary boundary = Boundary::clamp);

/// Value iteration with the truncation picked from the index inversion and
/// doubled until the greedy threshold sits well inside the box. Unbounded
/// costs use the exact tail boundary, with the box kept small enough that
/// f stays within an order of magnitude of lambda.
DecoupledSolution solve_decoupled(const DecoupledProblem& prob, double tol = 1e-9,
                                  std::int64_t max_iters = 1'000'000);

std::vector<ThresholdPolicy> indexability_sweep(const CostFunction& f, double p,
                                                std::span<const double> charges);

void validate_problem(const DecoupledProblem& prob);

}  // namespace aoi
