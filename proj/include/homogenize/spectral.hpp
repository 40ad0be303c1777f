#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "homogenize/environment.hpp"
#include "homogenize/stats.hpp"

namespace homog {

struct SpectralAtom {
  double eigenvalue = 0.0;
  double weight = 0.0;
  bool kernel = false;  // eigenvalue below 1e-10 * max, i.e. the constants
};

/// Spectral measure of the drift phi_v relative to -L_N in L^2(rho_N).
struct SpectralMeasure {
  std::vector<SpectralAtom> atoms;  // one per eigenpair, ascending eigenvalue
  double total_mass = 0.0;          // sum of weights = E phi_v^2
  double kernel_weight = 0.0;
  double max_eigenvalue = 0.0;
};

/// Dense eigendecomposition; guarded by dense_volume_limit.
SpectralMeasure spectral_measure(const BondField& xi, std::span<const double> v);

/// 2 sum_i E xi_i v_i^2 - 2 sum_k w_k / r_k over nonkernel atoms with
/// w_k > 1e-14 * total mass.
double diffusivity_via_spectrum(const SpectralMeasure& measure, const BondField& xi, std::span<const double> v);
double diffusivity_via_spectrum(const BondField& xi, std::span<const double> v);

/// sum_k w_k exp(-n r_k).
double semigroup_moment(const SpectralMeasure& measure, double n);
double semigroup_moment(const BondField& xi, std::span<const double> v, double n);

/// Monte Carlo estimate of E_rho[phi_v(x) E_x phi_v(X(n))]: uniform start
/// site, one exact walk of duration n per walker.
Estimate semigroup_moment_mc(const BondField& xi, std::span<const double> v, double n, std::size_t walkers,
                             std::uint64_t seed, int threads = 1);

}  // namespace homog
