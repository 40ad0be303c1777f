#include "homogenize/solver.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "homogenize/errors.hpp"
#include "homogenize/operators.hpp"

namespace homog {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void remove_mean(std::vector<double>& x) {
  const double m = mean_rho(x);
  for (auto& v : x) v -= m;
}

// Conjugate gradients for the symmetric positive (semi)definite operator
// `apply`. With `singular` the iterate and residual are kept mean zero.
template <typename Apply>
SolveReport conjugate_gradient(const TorusGeometry& geometry, Apply&& apply, const std::vector<double>* diagonal,
                               const std::vector<double>& rhs, std::vector<double> x, const SolverOptions& options,
                               bool singular) {
  const std::size_t n = rhs.size();
  const double rhs_norm = norm2(rhs);
  SolveReport report{ScalarField(geometry), 0, 0.0, options.tolerance};
  if (rhs_norm == 0.0) return report;

  const std::size_t cap = options.iteration_cap(geometry);
  std::vector<double> r(n), z(n), p(n), q(n);
  auto precondition = [&] {
    if (diagonal)
      for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / (*diagonal)[k];
    else
      z = r;
  };
  auto true_residual = [&] {
    apply(x, q);
    for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - q[k];
    if (singular) remove_mean(r);
    return norm2(r) / rhs_norm;
  };

  if (singular) remove_mean(x);
  std::size_t iterations = 0;
  double relative = true_residual();
  while (relative > options.tolerance) {
    if (iterations >= cap) {
      std::ostringstream msg;
      msg << "conjugate gradients did not reach tolerance " << options.tolerance << " within " << cap
          << " iterations (relative residual " << relative << ")";
      throw ConvergenceError(msg.str(), iterations, relative);
    }
    const std::size_t pass_start = iterations;
    precondition();
    p = z;
    double rz = dot(r, z);
    while (iterations < cap) {
      apply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) break;
      const double alpha = rz / pq;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * q[k];
      }
      if (singular) {
        remove_mean(x);
        remove_mean(r);
      }
      ++iterations;
      if (norm2(r) / rhs_norm <= options.tolerance) break;
      precondition();
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    if (iterations == pass_start)
      throw ConvergenceError("conjugate gradients broke down (nonpositive curvature)", iterations, relative);
    // The recursive residual drifts from the true one; verify and restart
    // from the current iterate if needed.
    relative = true_residual();
  }
  report.solution = ScalarField(geometry, std::move(x));
  report.iterations = iterations;
  report.residual_norm = relative;
  return report;
}

std::vector<double> generator_diagonal(const BondField& xi, double shift) {
  const auto& g = xi.geometry();
  std::vector<double> diag(g.volume(), shift);
  for (std::size_t s = 0; s < g.volume(); ++s)
    for (int i = 0; i < g.dimension(); ++i) diag[s] += xi.rate(s, i) + xi.rate(g.backward(s, i), i);
  return diag;
}

void check_tolerance(const SolverOptions& options) {
  if (!(options.tolerance > 0.0) || !std::isfinite(options.tolerance))
    throw Error(ErrorKind::config, "solver tolerance must be positive");
}

}  // namespace

std::size_t SolverOptions::iteration_cap(const TorusGeometry& g) const {
  if (max_iterations > 0) return max_iterations;
  return 50 * static_cast<std::size_t>(g.side()) * static_cast<std::size_t>(g.dimension());
}

SolveReport solve_poisson(const BondField& xi, const ScalarField& g, const SolverOptions& options,
                          const ScalarField* initial_guess) {
  require_same_geometry(xi.geometry(), g.geometry, "solve_poisson");
  check_tolerance(options);
  const double mean = mean_rho(g);
  if (std::abs(mean) > 1e-12 * norm2(g.values)) {
    std::ostringstream msg;
    msg << "right-hand side has nonzero mean " << mean << "; -L_N u = g is solvable only for mean-zero g";
    throw Error(ErrorKind::solvability, msg.str());
  }
  std::vector<double> rhs = g.values;
  remove_mean(rhs);
  std::vector<double> x(g.size(), 0.0);
  if (initial_guess) {
    require_same_geometry(xi.geometry(), initial_guess->geometry, "solve_poisson initial guess");
    x = initial_guess->values;
  }
  std::vector<double> diag;
  if (options.jacobi) diag = generator_diagonal(xi, 0.0);
  auto apply = [&](std::span<const double> in, std::span<double> out) { apply_negative_generator(xi, in, out); };
  return conjugate_gradient(g.geometry, apply, options.jacobi ? &diag : nullptr, rhs, std::move(x), options, true);
}

SolveReport solve_resolvent(const BondField& xi, const ScalarField& g, double lambda, const SolverOptions& options) {
  require_same_geometry(xi.geometry(), g.geometry, "solve_resolvent");
  check_tolerance(options);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::domain, "resolvent parameter must be > 0");
  std::vector<double> diag;
  if (options.jacobi) diag = generator_diagonal(xi, lambda);
  auto apply = [&](std::span<const double> in, std::span<double> out) {
    apply_negative_generator(xi, in, out);
    for (std::size_t k = 0; k < in.size(); ++k) out[k] += lambda * in[k];
  };
  return conjugate_gradient(g.geometry, apply, options.jacobi ? &diag : nullptr, g.values,
                            std::vector<double>(g.size(), 0.0), options, false);
}

Eigen::MatrixXd assemble_negative_generator(const BondField& xi) {
  const auto& g = xi.geometry();
  if (g.volume() > dense_volume_limit) {
    std::ostringstream msg;
    msg << "dense assembly limited to volume " << dense_volume_limit << ", got " << g.volume();
    throw Error(ErrorKind::guard, msg.str());
  }
  const auto n = static_cast<Eigen::Index>(g.volume());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    for (int i = 0; i < g.dimension(); ++i) {
      const double r = xi.rate(s, i);
      const auto u = static_cast<Eigen::Index>(s);
      const auto t = static_cast<Eigen::Index>(g.forward(s, i));
      a(u, u) += r;
      a(t, t) += r;
      a(u, t) -= r;
      a(t, u) -= r;
    }
  }
  return a;
}

ScalarField dense_solve(const BondField& xi, const ScalarField& g) {
  require_same_geometry(xi.geometry(), g.geometry, "dense_solve");
  const Eigen::MatrixXd a = assemble_negative_generator(xi);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const auto& values = eig.eigenvalues();
  const auto& vectors = eig.eigenvectors();
  const double cutoff = 1e-10 * values.cwiseAbs().maxCoeff();
  const Eigen::Map<const Eigen::VectorXd> rhs(g.values.data(), static_cast<Eigen::Index>(g.size()));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(rhs.size());
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (values(k) > cutoff) u += (vectors.col(k).dot(rhs) / values(k)) * vectors.col(k);
  std::vector<double> out(u.data(), u.data() + u.size());
  remove_mean(out);
  return ScalarField(g.geometry, std::move(out));
}

}  // namespace homog
