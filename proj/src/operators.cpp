#include "homogenize/operators.hpp"

#include <cmath>
#include <numeric>

#include "homogenize/errors.hpp"

namespace homog {

ScalarField::ScalarField(const TorusGeometry& g, std::vector<double> v) : geometry(g), values(std::move(v)) {
  if (values.size() != g.volume()) throw Error(ErrorKind::dimension, "scalar field must hold (2N)^d values");
}

VectorField::VectorField(const TorusGeometry& g, std::vector<double> v) : geometry(g), values(std::move(v)) {
  if (values.size() != g.bond_count()) throw Error(ErrorKind::dimension, "vector field must hold d * (2N)^d values");
}

ScalarField VectorField::component(int dir) const {
  ScalarField out(geometry);
  for (std::size_t s = 0; s < geometry.volume(); ++s) out[s] = (*this)(s, dir);
  return out;
}

VectorField grad(const ScalarField& f) {
  const auto& g = f.geometry;
  const int d = g.dimension();
  VectorField out(g);
  for (std::size_t s = 0; s < g.volume(); ++s)
    for (int i = 0; i < d; ++i) out(s, i) = f[g.forward(s, i)] - f[s];
  return out;
}

ScalarField div_star(const VectorField& v) {
  const auto& g = v.geometry;
  const int d = g.dimension();
  ScalarField out(g);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += v(g.backward(s, i), i) - v(s, i);
    out[s] = acc;
  }
  return out;
}

void apply_negative_generator(const BondField& xi, std::span<const double> in, std::span<double> out) {
  const auto& g = xi.geometry();
  const int d = g.dimension();
  const auto rates = xi.rates();
  const auto ud = static_cast<std::size_t>(d);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    const double center = in[s];
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      const std::size_t fwd = g.forward(s, i);
      const std::size_t bwd = g.backward(s, i);
      acc += rates[s * ud + static_cast<std::size_t>(i)] * (center - in[fwd]) +
             rates[bwd * ud + static_cast<std::size_t>(i)] * (center - in[bwd]);
    }
    out[s] = acc;
  }
}

ScalarField apply_generator(const BondField& xi, const ScalarField& f) {
  require_same_geometry(xi.geometry(), f.geometry, "apply_generator");
  ScalarField out(f.geometry);
  apply_negative_generator(xi, f.values, out.values);
  for (auto& x : out.values) x = -x;
  return out;
}

ScalarField local_drift(const BondField& xi, std::span<const double> v) {
  const auto& g = xi.geometry();
  const int d = g.dimension();
  if (v.size() != static_cast<std::size_t>(d)) throw Error(ErrorKind::dimension, "direction vector has wrong length");
  ScalarField out(g);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += v[static_cast<std::size_t>(i)] * (xi.rate(s, i) - xi.rate(g.backward(s, i), i));
    out[s] = acc;
  }
  return out;
}

double mean_rho(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double mean_rho(const ScalarField& f) { return mean_rho(f.values); }

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_geometry(f.geometry, g.geometry, "inner");
  return std::inner_product(f.values.begin(), f.values.end(), g.values.begin(), 0.0);
}

double inner(const VectorField& f, const VectorField& g) {
  require_same_geometry(f.geometry, g.geometry, "inner");
  return std::inner_product(f.values.begin(), f.values.end(), g.values.begin(), 0.0);
}

double norm2(std::span<const double> values) {
  return std::sqrt(std::inner_product(values.begin(), values.end(), values.begin(), 0.0));
}

}  // namespace homog
