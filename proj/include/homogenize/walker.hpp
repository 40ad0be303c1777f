#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "homogenize/environment.hpp"
#include "homogenize/stats.hpp"

namespace homog {

struct WalkConfig {
  double horizon = 200.0;
  std::size_t walkers = 10000;
  std::uint64_t seed = 0;
  bool random_start = false;  // uniform start site instead of the origin
  int threads = 1;
};

struct Jump {
  double time;
  std::size_t site;  // wrapped site after the jump
  int direction;     // +(i+1) for +e_i, -(i+1) for -e_i
};

struct WalkResult {
  std::vector<std::int64_t> displacement;  // unwrapped, in Z^d
  std::size_t start_site = 0;
  std::size_t final_site = 0;
  std::size_t jumps = 0;
};

/// Cumulative jump rates per site for event-driven simulation. At site x the
/// walk moves to x + e_i at rate xi_i(x) and to x - e_i at rate xi_i(x - e_i).
class TransitionTable {
 public:
  explicit TransitionTable(const BondField& xi);

  const TorusGeometry& geometry() const noexcept { return geometry_; }
  double total_rate(std::size_t site) const noexcept { return total_[site]; }

  /// Channel index in [0, 2d): 2i is +e_i, 2i+1 is -e_i.
  int choose(std::size_t site, double u) const noexcept;
  std::size_t target(std::size_t site, int channel) const noexcept;

 private:
  TorusGeometry geometry_;
  std::vector<double> cumulative_;  // site * 2d + channel
  std::vector<double> total_;
};

/// Exact Gillespie simulation up to time t from `start_site`.
WalkResult simulate_walk(const TransitionTable& table, double t, std::uint64_t seed, std::size_t start_site = 0,
                         std::vector<Jump>* log = nullptr);
WalkResult simulate_walk(const BondField& xi, double t, std::uint64_t seed, std::size_t start_site = 0,
                         std::vector<Jump>* log = nullptr);

/// Writes one JSON object per line: {"time", "site", "direction"}.
void write_jump_log(std::ostream& out, std::span<const Jump> log);

/// Final wrapped site recomputed from the start site and the jump directions.
std::size_t replay_jumps(const TorusGeometry& geometry, std::size_t start_site, std::span<const Jump> log);

/// Seed of walker k under configuration seed s.
std::uint64_t walker_seed(std::uint64_t seed, std::size_t walker);

/// t^{-1} mean of (X_t . v)^2 over independent walkers, with standard error.
Estimate msd_estimate(const BondField& xi, std::span<const double> v, const WalkConfig& config);

/// Environment seed of replica r in annealed_msd; the replica's walk seed is
/// derive_seed(environment seed, 1).
std::uint64_t replica_environment_seed(std::uint64_t seed, std::size_t replica);

/// msd_estimate averaged over fresh environments. With two or more replicas
/// the standard error is the spread of the replica estimates, which carries
/// both the walk and the environment variance.
Estimate annealed_msd(const DisorderLaw& law, const TorusGeometry& geometry, std::span<const double> v,
                      const WalkConfig& config, std::size_t replicas);

}  // namespace homog
