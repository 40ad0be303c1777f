#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "homogenize/environment.hpp"
#include "homogenize/fields.hpp"
#include "homogenize/solver.hpp"

namespace homog {

/// Residuals of the finite-volume corrector identities for one direction v.
struct IdentityDiagnostics {
  /// |sum_i E xi_i (psi^i)^2 + sum_i v_i E xi_i psi^i|
  double orthogonality_residual = 0.0;
  /// max over sites and pairs i < k of |grad_i psi^k - grad_k psi^i|
  double curl_residual = 0.0;
  /// max over sites of |sum_i div*_i(xi_i (v_i + psi^i))|
  double flux_divergence_residual = 0.0;
  /// c^2 |v|^2 - max_i E (psi^i)^2, nonnegative up to rounding
  double l2_bound_margin = 0.0;
  /// |quadratic form - linear form| of the two diffusivity identities
  double quadratic_linear_gap = 0.0;
  /// p -> (|T_N|^-1 sum_x |grad chi(x)|^p)^(1/p), Euclidean |.| over directions
  std::map<double, double> lp_norms;
};

/// Exponents reported in IdentityDiagnostics::lp_norms.
inline const std::vector<double> default_lp_exponents{2.0, 2.5, 3.0, 4.0};

/// Corrector chi_v = (-L_N)^{-1} phi_v, mean zero.
SolveReport solve_corrector(const BondField& xi, std::span<const double> v, const SolverOptions& options = {});
ScalarField corrector(const BondField& xi, std::span<const double> v, const SolverOptions& options = {});

/// psi^i = grad_i chi.
VectorField corrector_gradient(const ScalarField& chi);

/// Normalised L^p norm of the gradient field.
double gradient_lp_norm(const VectorField& gradient, double p);

IdentityDiagnostics identity_residuals(const BondField& xi, std::span<const double> v, const ScalarField& chi);

struct QuadraticResult {
  double quadratic = 0.0;  // 2 sum_i E xi_i (v_i + psi^i)^2
  double linear = 0.0;     // 2 sum_i v_i E xi_i (v_i + psi^i)
  IdentityDiagnostics diagnostics;
  std::size_t iterations = 0;
};

/// (D_N v, v) through the corrector.
QuadraticResult effective_quadratic(const BondField& xi, std::span<const double> v,
                                    const SolverOptions& options = {});

/// 2 sum_i E xi_i (v_i + grad_i f)^2; the variational functional whose
/// infimum over f is (D_N v, v).
double dirichlet_energy(const BondField& xi, std::span<const double> v, const ScalarField& f);

struct EffectiveMatrix {
  TorusGeometry geometry;
  Eigen::MatrixXd entries;              // symmetrised D_N
  Eigen::MatrixXd linear_form_entries;  // raw 2 E Lambda(1 + Psi)
  Eigen::MatrixXd energy_form_entries;  // 2 sum_k E xi_k (delta_ki + psi^{ki})(delta_kj + psi^{kj})
  double asymmetry = 0.0;               // max |M - M^T| / 2 of the raw assembly
  std::vector<IdentityDiagnostics> column_diagnostics;
  std::size_t iterations = 0;

  double quadratic_form(std::span<const double> v) const;
};

/// D_N from the d basis correctors.
EffectiveMatrix effective_matrix(const BondField& xi, const SolverOptions& options = {});

/// 2 (E 1/xi)^{-1} over the torus bonds; d = 1 only.
double one_d_exact(const BondField& xi);

}  // namespace homog
