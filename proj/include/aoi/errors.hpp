#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

enum class ErrorKind {
  domain,         // argument outside the mathematical domain
  range,          // result not representable (overflow, age guard)
  admissibility,  // bounded-cost condition violated
  convergence,
  consistency,    // internal invariant check failed
  missing_state,
  non_cyclic,
  capacity,
  inconclusive,
  certification,
  config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace aoi
