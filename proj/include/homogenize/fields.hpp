#pragma once

#include <cstddef>
#include <vector>

#include "homogenize/geometry.hpp"

namespace homog {

/// Real function on the torus, one value per site.
struct ScalarField {
  TorusGeometry geometry;
  std::vector<double> values;

  explicit ScalarField(const TorusGeometry& g, double fill = 0.0)
      : geometry(g), values(g.volume(), fill) {}
  ScalarField(const TorusGeometry& g, std::vector<double> v);

  double& operator[](std::size_t site) { return values[site]; }
  double operator[](std::size_t site) const { return values[site]; }
  std::size_t size() const noexcept { return values.size(); }
};

/// Real vector field on the torus, stored at `site * d + i`.
struct VectorField {
  TorusGeometry geometry;
  std::vector<double> values;

  explicit VectorField(const TorusGeometry& g, double fill = 0.0)
      : geometry(g), values(g.bond_count(), fill) {}
  VectorField(const TorusGeometry& g, std::vector<double> v);

  double& operator()(std::size_t site, int dir) {
    return values[site * static_cast<std::size_t>(geometry.dimension()) + static_cast<std::size_t>(dir)];
  }
  double operator()(std::size_t site, int dir) const {
    return values[site * static_cast<std::size_t>(geometry.dimension()) + static_cast<std::size_t>(dir)];
  }

  /// Component i as a scalar field.
  ScalarField component(int dir) const;
};

}  // namespace homog
