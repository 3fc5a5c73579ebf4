#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "aoi/cost.hpp"
#include "aoi/system.hpp"

namespace aoi::test {

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// Draws from the parametric families with moderate growth so indices and
/// series stay well inside double range.
inline CostFunction random_cost(std::mt19937_64& g) {
  std::uniform_real_distribution<double> w(0.2, 20.0);
  switch (std::uniform_int_distribution<int>(0, 4)(g)) {
    case 0: return CostFunction::linear(w(g));
    case 1: return CostFunction::power(w(g), std::uniform_real_distribution<double>(0.5, 3.5)(g));
    case 2: return CostFunction::exponential(std::uniform_real_distribution<double>(1.1, 3.0)(g),
                                            std::uniform_real_distribution<double>(0.2, 3.0)(g));
    case 3: return CostFunction::logarithmic(w(g));
    default: {
      std::vector<double> v;
      double x = std::uniform_real_distribution<double>(0.0, 2.0)(g);
      const int n = std::uniform_int_distribution<int>(3, 40)(g);
      for (int i = 0; i < n; ++i) {
        v.push_back(x);
        x += std::uniform_real_distribution<double>(0.0, 3.0)(g);
      }
      return CostFunction::table(v);
    }
  }
}

/// Random p for which f passes the bounded-cost condition.
inline double random_admissible_p(std::mt19937_64& g, const CostFunction& f) {
  std::uniform_real_distribution<double> u(0.1, 0.95);
  while (true) {
    const double p = u(g);
    if (is_bounded_cost(f, p).bounded) return p;
  }
}

}  // namespace aoi::test
