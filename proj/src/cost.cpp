#include "aoi/cost.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "aoi/errors.hpp"

namespace aoi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) raise(ErrorKind::domain, what);
}

void validate(const CostFunction::Variant& v) {
  std::visit(
      Overloaded{
          [](const cost::Linear& c) {
            require(c.weight > 0 && std::isfinite(c.weight), "linear weight must be positive");
          },
          [](const cost::Power& c) {
            require(c.weight > 0 && std::isfinite(c.weight), "power weight must be positive");
            require(c.exponent > 0 && std::isfinite(c.exponent), "power exponent must be positive");
          },
          [](const cost::Exponential& c) {
            require(c.base > 1 && std::isfinite(c.base), "exponential base must exceed 1");
            require(c.weight > 0 && std::isfinite(c.weight), "exponential weight must be positive");
          },
          [](const cost::Logarithmic& c) {
            require(c.weight > 0 && std::isfinite(c.weight), "logarithmic weight must be positive");
            if (c.base) require(*c.base > 1 && std::isfinite(*c.base), "logarithm base must exceed 1");
          },
          [](const cost::Indicator& c) {
            require(c.threshold >= 1, "indicator threshold must be a positive integer");
            require(c.weight > 0 && std::isfinite(c.weight), "indicator weight must be positive");
          },
          [](const cost::Table& c) {
            require(!c.values.empty(), "cost table must not be empty");
            for (std::size_t i = 0; i < c.values.size(); ++i) {
              require(c.values[i] >= 0 && std::isfinite(c.values[i]),
                      "cost table entries must be finite and non-negative");
              if (i > 0) require(c.values[i] >= c.values[i - 1], "cost table must be non-decreasing");
            }
          },
      },
      v);
}

}  // namespace

CostFunction::CostFunction(Variant v) : v_(std::move(v)) { validate(v_); }

CostFunction CostFunction::linear(double weight) { return {cost::Linear{weight}}; }
CostFunction CostFunction::power(double weight, double exponent) {
  return {cost::Power{weight, exponent}};
}
CostFunction CostFunction::exponential(double base, double weight) {
  return {cost::Exponential{base, weight}};
}
CostFunction CostFunction::logarithmic(double weight, std::optional<double> base) {
  return {cost::Logarithmic{weight, base}};
}
CostFunction CostFunction::indicator(Age threshold, double weight) {
  return {cost::Indicator{threshold, weight}};
}
CostFunction CostFunction::table(std::vector<double> values) {
  return {cost::Table{std::move(values)}};
}

std::string CostFunction::kind() const {
  return std::visit(Overloaded{
                        [](const cost::Linear&) { return "linear"; },
                        [](const cost::Power&) { return "power"; },
                        [](const cost::Exponential&) { return "exponential"; },
                        [](const cost::Logarithmic&) { return "logarithmic"; },
                        [](const cost::Indicator&) { return "indicator"; },
                        [](const cost::Table&) { return "table"; },
                    },
                    v_);
}

std::string CostFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const cost::Linear& c) { os << c.weight << "*x"; },
                 [&](const cost::Power& c) { os << c.weight << "*x^" << c.exponent; },
                 [&](const cost::Exponential& c) { os << c.weight << "*" << c.base << "^x"; },
                 [&](const cost::Logarithmic& c) {
                   os << c.weight << "*log";
                   if (c.base) os << "_" << *c.base;
                   os << "(x)";
                 },
                 [&](const cost::Indicator& c) { os << c.weight << "*1{x>=" << c.threshold << "}"; },
                 [&](const cost::Table& c) {
                   os << "table[";
                   for (std::size_t i = 0; i < c.values.size(); ++i) os << (i ? "," : "") << c.values[i];
                   os << "]";
                 },
             },
             v_);
  return os.str();
}

double CostFunction::operator()(Age age) const {
  if (age < 1) raise(ErrorKind::domain, "cost evaluated at age " + std::to_string(age) + " < 1");
  const auto x = static_cast<double>(age);
  const double value = std::visit(
      Overloaded{
          [&](const cost::Linear& c) { return c.weight * x; },
          [&](const cost::Power& c) { return c.weight * std::pow(x, c.exponent); },
          [&](const cost::Exponential& c) {
            // Compare in log space so the guard trips before pow overflows.
            if (x * std::log(c.base) + std::log(c.weight) > std::log(kCostCeiling)) return kInf;
            return c.weight * std::pow(c.base, x);
          },
          [&](const cost::Logarithmic& c) {
            const double ln = std::log(x);
            return c.weight * (c.base ? ln / std::log(*c.base) : ln);
          },
          [&](const cost::Indicator& c) { return age >= c.threshold ? c.weight : 0.0; },
          [&](const cost::Table& c) {
            const auto i = static_cast<std::size_t>(age - 1);
            return i < c.values.size() ? c.values[i] : c.values.back();
          },
      },
      v_);
  if (!(value <= kCostCeiling)) {
    raise(ErrorKind::range, describe() + " exceeds 1e300 at age " + std::to_string(age));
  }
  return value;
}

double CostFunction::log_value(Age age) const {
  if (age < 1) raise(ErrorKind::domain, "cost evaluated at age " + std::to_string(age) + " < 1");
  if (const auto* c = std::get_if<cost::Exponential>(&v_)) {
    return std::log(c->weight) + static_cast<double>(age) * std::log(c->base);
  }
  // Every other variant stays far below the ceiling at any representable age.
  return std::log((*this)(age));
}

std::optional<Age> CostFunction::saturation_age() const noexcept {
  if (const auto* c = std::get_if<cost::Indicator>(&v_)) return c->threshold;
  if (const auto* c = std::get_if<cost::Table>(&v_)) return static_cast<Age>(c->values.size());
  return std::nullopt;
}

double CostFunction::supremum() const {
  if (const auto* c = std::get_if<cost::Indicator>(&v_)) return c->weight;
  if (const auto* c = std::get_if<cost::Table>(&v_)) return c->values.back();
  return kInf;
}

double CostFunction::growth_ratio_bound(Age m) const {
  if (m < 1) raise(ErrorKind::domain, "growth ratio requested at age < 1");
  const auto x = static_cast<double>(m);
  return std::visit(
      Overloaded{
          [&](const cost::Linear&) { return (x + 1) / x; },
          [&](const cost::Power& c) { return std::pow((x + 1) / x, c.exponent); },
          [&](const cost::Exponential& c) { return c.base; },
          // log(m+1)/log(m) decreases for m >= 2; log(1) = 0.
          [&](const cost::Logarithmic&) { return m < 2 ? kInf : std::log(x + 1) / std::log(x); },
          [&](const cost::Indicator& c) { return m >= c.threshold ? 1.0 : kInf; },
          [&](const cost::Table& c) {
            const auto n = static_cast<Age>(c.values.size());
            double worst = 1.0;
            for (Age i = m; i < n; ++i) {
              const double lo = c.values[static_cast<std::size_t>(i - 1)];
              const double hi = c.values[static_cast<std::size_t>(i)];
              if (hi == lo) continue;
              if (lo == 0.0) return kInf;
              worst = std::max(worst, hi / lo);
            }
            return worst;
          },
      },
      v_);
}

void KahanSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double evaluate(const CostFunction& f, Age age) { return f(age); }

double prefix_sum(const CostFunction& f, Age h) {
  if (h < 1) raise(ErrorKind::domain, "prefix sum length must be at least 1");
  KahanSum s;
  for (Age j = 1; j <= h; ++j) s.add(f(j));
  return s.value();
}

std::vector<double> prefix_sums(const CostFunction& f, Age h) {
  if (h < 0) raise(ErrorKind::domain, "prefix sum length must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(h) + 1, 0.0);
  KahanSum s;
  for (Age j = 1; j <= h; ++j) {
    s.add(f(j));
    out[static_cast<std::size_t>(j)] = s.value();
  }
  return out;
}

BoundedCostReport is_bounded_cost(const CostFunction& f, double p) {
  if (!(p >= 0.0 && p <= 1.0)) raise(ErrorKind::domain, "success probability must lie in [0, 1]");
  const double q = 1.0 - p;
  if (p == 0.0) {
    if (!f.is_bounded()) {
      raise(ErrorKind::domain, "success probability 0 with unbounded cost " + f.describe());
    }
    if (f.supremum() == 0.0) return {true, 1.0, "cost is identically zero"};
    return {false, 1.0, "p = 0: the series sums a positive constant tail forever"};
  }
  if (p == 1.0) return {true, 0.0, "p = 1: every term past the first vanishes"};
  if (const auto* e = std::get_if<cost::Exponential>(&f.variant())) {
    const double r = e->base * q;
    if (r < 1.0) return {true, r, "exponential: base*(1-p) < 1"};
    return {false, r, "exponential: base*(1-p) >= 1, geometric terms do not decay"};
  }
  return {true, q, "sub-exponential growth against geometric decay (1-p)^h"};
}

}  // namespace aoi
