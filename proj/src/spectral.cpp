#include "homogenize/spectral.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "homogenize/errors.hpp"
#include "homogenize/operators.hpp"
#include "homogenize/parallel.hpp"
#include "homogenize/rng.hpp"
#include "homogenize/solver.hpp"
#include "homogenize/walker.hpp"

namespace homog {

SpectralMeasure spectral_measure(const BondField& xi, std::span<const double> v) {
  const ScalarField phi = local_drift(xi, v);
  const Eigen::MatrixXd a = assemble_negative_generator(xi);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const auto& values = eig.eigenvalues();
  const auto& vectors = eig.eigenvectors();
  const Eigen::Map<const Eigen::VectorXd> f(phi.values.data(), static_cast<Eigen::Index>(phi.size()));
  const double volume = static_cast<double>(phi.size());

  SpectralMeasure out;
  out.max_eigenvalue = values.maxCoeff();
  const double cutoff = 1e-10 * values.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double projection = vectors.col(k).dot(f);
    SpectralAtom atom{values(k), projection * projection / volume, values(k) <= cutoff};
    out.total_mass += atom.weight;
    if (atom.kernel) out.kernel_weight += atom.weight;
    out.atoms.push_back(atom);
  }
  return out;
}

double diffusivity_via_spectrum(const SpectralMeasure& measure, const BondField& xi, std::span<const double> v) {
  const auto& g = xi.geometry();
  const int d = g.dimension();
  if (v.size() != static_cast<std::size_t>(d)) throw Error(ErrorKind::dimension, "direction vector has wrong length");
  double naive = 0.0;
  for (std::size_t s = 0; s < g.volume(); ++s)
    for (int i = 0; i < d; ++i) naive += xi.rate(s, i) * v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
  naive /= static_cast<double>(g.volume());

  double resolvent = 0.0;
  const double floor = 1e-14 * measure.total_mass;
  for (const auto& atom : measure.atoms)
    if (!atom.kernel && atom.weight > floor) resolvent += atom.weight / atom.eigenvalue;
  return 2.0 * naive - 2.0 * resolvent;
}

double diffusivity_via_spectrum(const BondField& xi, std::span<const double> v) {
  return diffusivity_via_spectrum(spectral_measure(xi, v), xi, v);
}

double semigroup_moment(const SpectralMeasure& measure, double n) {
  if (!(n >= 0.0)) throw Error(ErrorKind::domain, "semigroup time must be >= 0");
  double acc = 0.0;
  for (const auto& atom : measure.atoms) acc += atom.weight * std::exp(-n * std::max(atom.eigenvalue, 0.0));
  return acc;
}

double semigroup_moment(const BondField& xi, std::span<const double> v, double n) {
  if (!(n >= 0.0)) throw Error(ErrorKind::domain, "semigroup time must be >= 0");
  return semigroup_moment(spectral_measure(xi, v), n);
}

Estimate semigroup_moment_mc(const BondField& xi, std::span<const double> v, double n, std::size_t walkers,
                             std::uint64_t seed, int threads) {
  if (!(n >= 0.0)) throw Error(ErrorKind::domain, "semigroup time must be >= 0");
  if (walkers == 0) throw Error(ErrorKind::domain, "walker count must be positive");
  const ScalarField phi = local_drift(xi, v);
  const TransitionTable table(xi);
  const auto volume = xi.geometry().volume();
  std::vector<double> samples(walkers);
  parallel_for(walkers, threads, [&](std::size_t k) {
    const std::uint64_t ws = walker_seed(seed, k);
    SplitMix64 rng(derive_seed(ws, 0));
    const auto start = std::min(volume - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(volume)));
    std::size_t end = start;
    if (n > 0.0) end = simulate_walk(table, n, derive_seed(ws, 1), start).final_site;
    samples[k] = phi[start] * phi[end];
  });
  return mean_estimate(samples);
}

}  // namespace homog
