#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace aoi {

using Age = std::int64_t;

namespace cost {

/// f(x) = weight * x
struct Linear {
  double weight = 1.0;
  bool operator==(const Linear&) const = default;
};

/// f(x) = weight * x^exponent
struct Power {
  double weight = 1.0;
  double exponent = 1.0;
  bool operator==(const Power&) const = default;
};

/// f(x) = weight * base^x
struct Exponential {
  double base = 2.0;
  double weight = 1.0;
  bool operator==(const Exponential&) const = default;
};

/// f(x) = weight * log_base(x). Natural log unless base is set.
struct Logarithmic {
  double weight = 1.0;
  std::optional<double> base;
  bool operator==(const Logarithmic&) const = default;
};

/// f(x) = weight * 1{x >= threshold}
struct Indicator {
  Age threshold = 1;
  double weight = 1.0;
  bool operator==(const Indicator&) const = default;
};

/// f(x) = values[x - 1], held at values.back() past the end.
struct Table {
  std::vector<double> values;
  bool operator==(const Table&) const = default;
};

}  // namespace cost

/// Non-negative, non-decreasing age-cost function. Immutable once built;
/// the constructor rejects parameters that break either property.
class CostFunction {
 public:
  using Variant = std::variant<cost::Linear, cost::Power, cost::Exponential,
                               cost::Logarithmic, cost::Indicator, cost::Table>;

  CostFunction() : CostFunction(cost::Linear{}) {}
  CostFunction(Variant v);  // NOLINT(google-explicit-constructor)

  static CostFunction linear(double weight);
  static CostFunction power(double weight, double exponent);
  static CostFunction exponential(double base, double weight = 1.0);
  static CostFunction logarithmic(double weight, std::optional<double> base = {});
  static CostFunction indicator(Age threshold, double weight = 1.0);
  static CostFunction table(std::vector<double> values);

  const Variant& variant() const noexcept { return v_; }
  std::string kind() const;
  std::string describe() const;

  /// Throws domain error for age < 1 and range error when the value would
  /// exceed 1e300.
  double operator()(Age age) const;

  /// ln f(age), finite where operator() would overflow; -inf where f is 0.
  double log_value(Age age) const;

  /// Age from which f is constant, if f is bounded.
  std::optional<Age> saturation_age() const noexcept;
  bool is_bounded() const noexcept { return saturation_age().has_value(); }
  /// sup f over all ages; only meaningful when is_bounded().
  double supremum() const;

  /// Upper bound on f(m'+1)/f(m') over every m' >= m. Infinity when f(m) = 0
  /// can still be followed by a positive value.
  double growth_ratio_bound(Age m) const;

  bool operator==(const CostFunction&) const = default;

 private:
  Variant v_;
};

inline constexpr double kCostCeiling = 1e300;

double evaluate(const CostFunction& f, Age age);

/// Sum of f(1..h), Neumaier-compensated.
double prefix_sum(const CostFunction& f, Age h);

/// Prefix sums S[0..h] with S[0] = 0, compensated the same way.
std::vector<double> prefix_sums(const CostFunction& f, Age h);

struct BoundedCostReport {
  bool bounded = false;
  /// Asymptotic ratio of consecutive series terms f(h+1)(1-p)^{h+1} / f(h)(1-p)^h.
  double ratio = 0.0;
  std::string reason;
};

/// Decides whether sum_h f(h)(1-p)^h converges.
BoundedCostReport is_bounded_cost(const CostFunction& f, double p);

/// Compensated running sum.
class KahanSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace aoi
