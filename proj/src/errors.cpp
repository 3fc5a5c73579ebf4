#include "aoi/errors.hpp"

namespace aoi {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::range: return "range";
    case ErrorKind::admissibility: return "admissibility";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::missing_state: return "missing_state";
    case ErrorKind::non_cyclic: return "non_cyclic";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::inconclusive: return "inconclusive";
    case ErrorKind::certification: return "certification";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

void raise(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + " error: " + what);
}

}  // namespace aoi
