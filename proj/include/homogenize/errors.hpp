#pragma once

#include <stdexcept>
#include <string>

namespace homog {

enum class ErrorKind {
  config,       // rejected configuration or schema violation
  dimension,    // mismatched geometries or sizes
  domain,       // argument outside the operation's domain
  solvability,  // right-hand side not orthogonal to the kernel
  convergence,  // iterative method exhausted its budget
  guard,        // dense-size or resource cap exceeded
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::size_t iterations,
                   double last_residual)
      : Error(ErrorKind::convergence, message),
        iterations_(iterations),
        last_residual_(last_residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  std::size_t iterations_;
  double last_residual_;
};

}  // namespace homog
