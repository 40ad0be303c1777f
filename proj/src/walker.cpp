#include "homogenize/walker.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"

#include "homogenize/errors.hpp"
#include "homogenize/parallel.hpp"
#include "homogenize/rng.hpp"

namespace homog {

TransitionTable::TransitionTable(const BondField& xi)
    : geometry_(xi.geometry()),
      cumulative_(xi.geometry().volume() * 2 * static_cast<std::size_t>(xi.geometry().dimension())),
      total_(xi.geometry().volume()) {
  const int d = geometry_.dimension();
  const auto channels = 2 * static_cast<std::size_t>(d);
  for (std::size_t s = 0; s < geometry_.volume(); ++s) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      acc += xi.rate(s, i);
      cumulative_[s * channels + 2 * static_cast<std::size_t>(i)] = acc;
      acc += xi.rate(geometry_.backward(s, i), i);
      cumulative_[s * channels + 2 * static_cast<std::size_t>(i) + 1] = acc;
    }
    total_[s] = acc;
  }
}

int TransitionTable::choose(std::size_t site, double u) const noexcept {
  const auto channels = 2 * static_cast<std::size_t>(geometry_.dimension());
  const double* row = cumulative_.data() + site * channels;
  const double x = u * total_[site];
  for (std::size_t c = 0; c + 1 < channels; ++c)
    if (x < row[c]) return static_cast<int>(c);
  return static_cast<int>(channels - 1);
}

std::size_t TransitionTable::target(std::size_t site, int channel) const noexcept {
  const int dir = channel / 2;
  return channel % 2 == 0 ? geometry_.forward(site, dir) : geometry_.backward(site, dir);
}

WalkResult simulate_walk(const TransitionTable& table, double t, std::uint64_t seed, std::size_t start_site,
                         std::vector<Jump>* log) {
  if (!(t > 0.0)) throw Error(ErrorKind::domain, "walk horizon must be > 0");
  const auto& g = table.geometry();
  if (start_site >= g.volume()) throw Error(ErrorKind::domain, "start site out of range");
  WalkResult out;
  out.displacement.assign(static_cast<std::size_t>(g.dimension()), 0);
  out.start_site = start_site;
  SplitMix64 rng(seed);
  std::size_t site = start_site;
  double time = 0.0;
  for (;;) {
    time += -std::log(rng.uniform_open_zero()) / table.total_rate(site);
    if (time > t) break;
    const int channel = table.choose(site, rng.uniform());
    site = table.target(site, channel);
    const int dir = channel / 2;
    out.displacement[static_cast<std::size_t>(dir)] += channel % 2 == 0 ? 1 : -1;
    ++out.jumps;
    if (log) log->push_back({time, site, channel % 2 == 0 ? dir + 1 : -(dir + 1)});
  }
  out.final_site = site;
  return out;
}

WalkResult simulate_walk(const BondField& xi, double t, std::uint64_t seed, std::size_t start_site,
                         std::vector<Jump>* log) {
  return simulate_walk(TransitionTable(xi), t, seed, start_site, log);
}

void write_jump_log(std::ostream& out, std::span<const Jump> log) {
  for (const auto& j : log) out << nlohmann::json{{"time", j.time}, {"site", j.site}, {"direction", j.direction}}.dump() << '\n';
}

std::size_t replay_jumps(const TorusGeometry& geometry, std::size_t start_site, std::span<const Jump> log) {
  std::size_t site = start_site;
  for (const auto& j : log) {
    const int dir = std::abs(j.direction) - 1;
    site = j.direction > 0 ? geometry.forward(site, dir) : geometry.backward(site, dir);
  }
  return site;
}

std::uint64_t walker_seed(std::uint64_t seed, std::size_t walker) { return derive_seed(seed, walker); }

Estimate msd_estimate(const BondField& xi, std::span<const double> v, const WalkConfig& config) {
  const auto& g = xi.geometry();
  if (v.size() != static_cast<std::size_t>(g.dimension()))
    throw Error(ErrorKind::dimension, "direction vector has wrong length");
  if (!(config.horizon > 0.0)) throw Error(ErrorKind::domain, "walk horizon must be > 0");
  if (config.walkers == 0) throw Error(ErrorKind::domain, "walker count must be positive");
  const TransitionTable table(xi);
  std::vector<double> samples(config.walkers);
  parallel_for(config.walkers, config.threads, [&](std::size_t k) {
    const std::uint64_t ws = walker_seed(config.seed, k);
    std::size_t start = 0;
    if (config.random_start) {
      SplitMix64 rng(derive_seed(ws, 0));
      start = std::min(g.volume() - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(g.volume())));
    }
    const WalkResult walk = simulate_walk(table, config.horizon, derive_seed(ws, 1), start);
    double projection = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) projection += static_cast<double>(walk.displacement[i]) * v[i];
    samples[k] = projection * projection;
  });
  Estimate e = mean_estimate(samples);
  e.value /= config.horizon;
  e.standard_error /= config.horizon;
  return e;
}

std::uint64_t replica_environment_seed(std::uint64_t seed, std::size_t replica) {
  return derive_seed(seed, {0x656e76ULL, replica});
}

Estimate annealed_msd(const DisorderLaw& law, const TorusGeometry& geometry, std::span<const double> v,
                      const WalkConfig& config, std::size_t replicas) {
  if (replicas == 0) throw Error(ErrorKind::domain, "replica count must be positive");
  std::vector<double> estimates;
  Estimate single;
  for (std::size_t r = 0; r < replicas; ++r) {
    const std::uint64_t env_seed = replica_environment_seed(config.seed, r);
    const BondField xi = sample_environment(law, geometry, env_seed);
    WalkConfig replica_config = config;
    replica_config.seed = derive_seed(env_seed, 1);
    single = msd_estimate(xi, v, replica_config);
    estimates.push_back(single.value);
  }
  if (replicas == 1) return single;
  return mean_estimate(estimates);
}

}  // namespace homog
