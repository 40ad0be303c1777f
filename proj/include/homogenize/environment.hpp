#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homogenize/geometry.hpp"

namespace homog {

/// Single-bond distribution mu_0 together with the ellipticity constant c.
///
/// The support is validated against [1/c, c] when the law is built; a law
/// that exists is always admissible.
class DisorderLaw {
 public:
  enum class Kind { constant, uniform, two_point, discrete };

  /// With `ellipticity` omitted, c is the smallest value covering the support.
  static DisorderLaw constant(double a, std::optional<double> ellipticity = {});
  static DisorderLaw uniform(double a, double b, std::optional<double> ellipticity = {});
  /// Value `a` with probability `p`, value `b` otherwise.
  static DisorderLaw two_point(double a, double b, double p, std::optional<double> ellipticity = {});
  static DisorderLaw discrete(std::vector<double> values, std::vector<double> probs,
                              std::optional<double> ellipticity = {});

  Kind kind() const noexcept { return kind_; }
  double ellipticity() const noexcept { return ellipticity_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& probabilities() const noexcept { return probs_; }

  double support_min() const;
  double support_max() const;

  /// Inverse-CDF draw from a uniform variate on [0, 1).
  double sample(double u) const;

  double mean() const;
  /// E[1/xi], the quantity behind the one-dimensional closed form.
  double mean_inverse() const;

  std::string name() const;

 private:
  DisorderLaw(Kind kind, std::vector<double> values, std::vector<double> probs,
              std::optional<double> ellipticity);

  Kind kind_;
  std::vector<double> values_;  // constant: {a}; uniform: {a, b}; otherwise the atoms
  std::vector<double> probs_;
  double ellipticity_;
};

const char* to_string(DisorderLaw::Kind kind);

/// (law, seed) the field was sampled from, when known.
struct EnvironmentOrigin {
  DisorderLaw law;
  std::uint64_t seed;
};

struct Bond {
  std::size_t site;
  int dir;
};

/// One realisation xi of the bond conductances on the torus. Immutable.
class BondField {
 public:
  /// Throws a configuration error if any rate leaves [1/c, c].
  BondField(const TorusGeometry& geometry, double ellipticity, std::vector<double> rates,
            std::optional<EnvironmentOrigin> origin = {});

  const TorusGeometry& geometry() const noexcept { return geometry_; }
  double ellipticity() const noexcept { return ellipticity_; }
  std::span<const double> rates() const noexcept { return rates_; }
  const std::optional<EnvironmentOrigin>& origin() const noexcept { return origin_; }

  /// Rate of the bond (x, x + e_i).
  double rate(std::size_t site, int dir) const noexcept {
    return rates_[site * static_cast<std::size_t>(geometry_.dimension()) + static_cast<std::size_t>(dir)];
  }

  friend bool operator==(const BondField& a, const BondField& b) noexcept {
    return a.geometry_ == b.geometry_ && a.ellipticity_ == b.ellipticity_ && a.rates_ == b.rates_;
  }

 private:
  TorusGeometry geometry_;
  double ellipticity_;
  std::vector<double> rates_;
  std::optional<EnvironmentOrigin> origin_;
};

/// I.i.d. bonds from `law`.
///
/// Each bond's variate is a hash of (seed, lattice position, direction) with
/// the position taken in the centred box, so the torus of half period N is
/// the restriction of one fixed environment on Z^d: fields with the same
/// seed and different N agree on the bonds the smaller box owns.
BondField sample_environment(const DisorderLaw& law, const TorusGeometry& geometry, std::uint64_t seed);

/// (tau_x xi)_i(y) = xi_i(y - x).
BondField shift(const BondField& field, std::span<const int> offset);

/// Number of bonds whose rates differ.
std::size_t hamming_distance(const BondField& a, const BondField& b);

/// Redraws the listed bonds from `law`; every other bond is kept.
BondField resample_bonds(const BondField& field, std::span<const Bond> bonds, const DisorderLaw& law,
                         std::uint64_t seed);

}  // namespace homog
