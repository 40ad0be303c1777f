#include "homogenize/rng.hpp"

#include "homogenize/errors.hpp"

namespace homog {

std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept {
  for (auto id : path) parent = derive_seed(parent, id);
  return parent;
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::solvability: return "solvability";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::guard: return "guard";
  }
  return "unknown";
}

}  // namespace homog
