#pragma once

#include <span>

#include "homogenize/environment.hpp"
#include "homogenize/fields.hpp"

// Discrete calculus on the torus. Sign convention: the generator L_N is
// nonpositive and the Dirichlet form is <f, -L_N f> = sum_x sum_i xi_i(x) (grad_i f(x))^2.

namespace homog {

/// (grad_i f)(x) = f(x + e_i) - f(x).
VectorField grad(const ScalarField& f);

/// Adjoint of grad for the unnormalised site inner product:
/// (div_star g)(x) = sum_i g_i(x - e_i) - g_i(x).
ScalarField div_star(const VectorField& g);

/// L_N f(x) = sum_i xi_i(x)(f(x+e_i) - f(x)) + xi_i(x-e_i)(f(x-e_i) - f(x)).
ScalarField apply_generator(const BondField& xi, const ScalarField& f);

/// out = -L_N in, without allocation. Sizes must equal the volume.
void apply_negative_generator(const BondField& xi, std::span<const double> in, std::span<double> out);

/// phi_v(x) = sum_i v_i (xi_i(x) - xi_i(x - e_i)).
ScalarField local_drift(const BondField& xi, std::span<const double> v);

/// Uniform average over the torus.
double mean_rho(const ScalarField& f);
double mean_rho(std::span<const double> values);

/// Unnormalised site inner products.
double inner(const ScalarField& f, const ScalarField& g);
double inner(const VectorField& f, const VectorField& g);

double norm2(std::span<const double> values);

}  // namespace homog
