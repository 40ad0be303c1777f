#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "homogenize/environment.hpp"
#include "homogenize/fields.hpp"

namespace homog {

struct SolverOptions {
  double tolerance = 1e-10;        // relative, ||residual|| <= tolerance * ||g||
  std::size_t max_iterations = 0;  // 0 selects 50 * side * d
  bool jacobi = false;             // diagonal preconditioning

  std::size_t iteration_cap(const TorusGeometry& g) const;
};

struct SolveReport {
  ScalarField solution;
  std::size_t iterations = 0;
  double residual_norm = 0.0;  // relative to ||g||_2
  double tolerance_used = 0.0;
};

/// Zero-mean solution of -L_N u = g by conjugate gradients.
///
/// Iterates are re-projected onto the zero-mean subspace every step. Throws
/// a solvability error if |mean(g)| > 1e-12 ||g||_2 and a ConvergenceError
/// once the iteration cap is exhausted.
SolveReport solve_poisson(const BondField& xi, const ScalarField& g, const SolverOptions& options = {},
                          const ScalarField* initial_guess = nullptr);

/// Solution of (lambda - L_N) u = g, lambda > 0.
SolveReport solve_resolvent(const BondField& xi, const ScalarField& g, double lambda,
                            const SolverOptions& options = {});

inline constexpr std::size_t dense_volume_limit = 4096;

/// -L_N as a dense symmetric matrix. Guarded by dense_volume_limit.
Eigen::MatrixXd assemble_negative_generator(const BondField& xi);

/// Pseudo-inverse solve on the zero-mean subspace through a full
/// eigendecomposition; eigenvalues below 1e-10 * max are treated as kernel.
ScalarField dense_solve(const BondField& xi, const ScalarField& g);

}  // namespace homog
