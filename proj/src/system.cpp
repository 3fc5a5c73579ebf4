#include "aoi/system.hpp"

#include <sstream>

#include "aoi/errors.hpp"

namespace aoi {

std::size_t AgeVectorHash::operator()(const AgeVector& ages) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (Age a : ages) {
    h ^= static_cast<std::size_t>(a) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

SystemSpec::SystemSpec(std::vector<Source> sources) : SystemSpec(std::move(sources), true) {}

SystemSpec SystemSpec::allow_divergent(std::vector<Source> sources) { return SystemSpec(std::move(sources), false); }

SystemSpec::SystemSpec(std::vector<Source> sources, bool check_bounded) : sources_(std::move(sources)) {
  if (sources_.empty()) raise(ErrorKind::domain, "a system needs at least one source");
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    const auto& s = sources_[i];
    if (!(s.p > 0.0 && s.p <= 1.0)) {
      raise(ErrorKind::domain, "source " + std::to_string(i + 1) + ": success probability must lie in (0, 1]");
    }
    if (!check_bounded) continue;
    const auto report = is_bounded_cost(s.cost, s.p);
    if (!report.bounded) {
      raise(ErrorKind::admissibility, "source " + std::to_string(i + 1) + " (" + s.cost.describe() + ", p = " +
                                          std::to_string(s.p) + "): " + report.reason);
    }
  }
}

bool SystemSpec::all_reliable() const noexcept {
  for (const auto& s : sources_) {
    if (s.p != 1.0) return false;
  }
  return true;
}

double SystemSpec::cost(std::span<const Age> ages) const {
  double total = 0.0;
  for (std::size_t i = 0; i < sources_.size(); ++i) total += sources_[i].cost(ages[i]);
  return total;
}

void SystemSpec::validate_ages(std::span<const Age> ages) const {
  if (ages.size() != sources_.size()) {
    raise(ErrorKind::domain, "age vector has " + std::to_string(ages.size()) + " entries for " +
                                 std::to_string(sources_.size()) + " sources");
  }
  for (Age a : ages) {
    if (a < 1) raise(ErrorKind::domain, "ages must be positive");
  }
}

AgeVector step_reliable(std::span<const Age> ages, SourceIndex served) {
  AgeVector next(ages.begin(), ages.end());
  for (auto& a : next) ++a;
  next.at(served) = 1;
  return next;
}

AgeVector ones(std::size_t n) { return AgeVector(n, 1); }

double cycle_average_cost(const SystemSpec& spec, std::span<const AgeVector> states) {
  if (states.empty()) raise(ErrorKind::domain, "empty cycle");
  KahanSum sum;
  for (const auto& x : states) {
    for (std::size_t i = 0; i < spec.size(); ++i) sum.add(spec[i].cost(x[i]));
  }
  return sum.value() / static_cast<double>(states.size());
}

std::string format_ages(std::span<const Age> ages) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < ages.size(); ++i) os << (i ? "," : "") << ages[i];
  os << ")";
  return os.str();
}

}  // namespace aoi
