#include "homogenize/diffusivity.hpp"

#include <algorithm>
#include <cmath>

#include "homogenize/errors.hpp"
#include "homogenize/operators.hpp"

namespace homog {

namespace {

void check_direction(const BondField& xi, std::span<const double> v) {
  if (v.size() != static_cast<std::size_t>(xi.geometry().dimension()))
    throw Error(ErrorKind::dimension, "direction vector has wrong length");
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// 2 sum_i E xi_i (v_i + psi^i)^2 and 2 sum_i v_i E xi_i (v_i + psi^i).
std::pair<double, double> quadratic_and_linear(const BondField& xi, std::span<const double> v,
                                               const VectorField& psi) {
  const auto& g = xi.geometry();
  const int d = g.dimension();
  double quadratic = 0.0;
  double linear = 0.0;
  for (std::size_t s = 0; s < g.volume(); ++s) {
    for (int i = 0; i < d; ++i) {
      const double vi = v[static_cast<std::size_t>(i)];
      const double flux = xi.rate(s, i) * (vi + psi(s, i));
      quadratic += flux * (vi + psi(s, i));
      linear += vi * flux;
    }
  }
  const auto volume = static_cast<double>(g.volume());
  return {2.0 * quadratic / volume, 2.0 * linear / volume};
}

}  // namespace

SolveReport solve_corrector(const BondField& xi, std::span<const double> v, const SolverOptions& options) {
  check_direction(xi, v);
  return solve_poisson(xi, local_drift(xi, v), options);
}

ScalarField corrector(const BondField& xi, std::span<const double> v, const SolverOptions& options) {
  return solve_corrector(xi, v, options).solution;
}

VectorField corrector_gradient(const ScalarField& chi) { return grad(chi); }

double gradient_lp_norm(const VectorField& gradient, double p) {
  const auto& g = gradient.geometry;
  const int d = g.dimension();
  double acc = 0.0;
  for (std::size_t s = 0; s < g.volume(); ++s) {
    double sq = 0.0;
    for (int i = 0; i < d; ++i) sq += gradient(s, i) * gradient(s, i);
    acc += std::pow(std::sqrt(sq), p);
  }
  return std::pow(acc / static_cast<double>(g.volume()), 1.0 / p);
}

IdentityDiagnostics identity_residuals(const BondField& xi, std::span<const double> v, const ScalarField& chi) {
  check_direction(xi, v);
  require_same_geometry(xi.geometry(), chi.geometry, "identity_residuals");
  const auto& g = xi.geometry();
  const int d = g.dimension();
  const auto volume = static_cast<double>(g.volume());
  const VectorField psi = corrector_gradient(chi);

  IdentityDiagnostics out;

  double energy = 0.0;
  double cross = 0.0;
  std::vector<double> psi_sq(static_cast<std::size_t>(d), 0.0);
  VectorField flux(g);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    for (int i = 0; i < d; ++i) {
      const double r = xi.rate(s, i);
      const double p = psi(s, i);
      energy += r * p * p;
      cross += v[static_cast<std::size_t>(i)] * r * p;
      psi_sq[static_cast<std::size_t>(i)] += p * p;
      flux(s, i) = r * (v[static_cast<std::size_t>(i)] + p);
    }
  }
  out.orthogonality_residual = std::abs(energy + cross) / volume;

  for (int i = 0; i < d; ++i)
    for (int k = i + 1; k < d; ++k)
      for (std::size_t s = 0; s < g.volume(); ++s) {
        const double dik = psi(g.forward(s, i), k) - psi(s, k);
        const double dki = psi(g.forward(s, k), i) - psi(s, i);
        out.curl_residual = std::max(out.curl_residual, std::abs(dik - dki));
      }

  const ScalarField divergence = div_star(flux);
  for (double x : divergence.values) out.flux_divergence_residual = std::max(out.flux_divergence_residual, std::abs(x));

  const double c = xi.ellipticity();
  const double max_psi_sq = *std::max_element(psi_sq.begin(), psi_sq.end()) / volume;
  out.l2_bound_margin = c * c * squared_norm(v) - max_psi_sq;

  const auto [quadratic, linear] = quadratic_and_linear(xi, v, psi);
  out.quadratic_linear_gap = std::abs(quadratic - linear);

  for (double p : default_lp_exponents) out.lp_norms[p] = gradient_lp_norm(psi, p);
  return out;
}

QuadraticResult effective_quadratic(const BondField& xi, std::span<const double> v, const SolverOptions& options) {
  const SolveReport report = solve_corrector(xi, v, options);
  const VectorField psi = corrector_gradient(report.solution);
  QuadraticResult out;
  std::tie(out.quadratic, out.linear) = quadratic_and_linear(xi, v, psi);
  out.diagnostics = identity_residuals(xi, v, report.solution);
  out.iterations = report.iterations;
  return out;
}

double dirichlet_energy(const BondField& xi, std::span<const double> v, const ScalarField& f) {
  check_direction(xi, v);
  require_same_geometry(xi.geometry(), f.geometry, "dirichlet_energy");
  return quadratic_and_linear(xi, v, grad(f)).first;
}

double EffectiveMatrix::quadratic_form(std::span<const double> v) const {
  if (v.size() != static_cast<std::size_t>(entries.rows()))
    throw Error(ErrorKind::dimension, "direction vector has wrong length");
  const Eigen::Map<const Eigen::VectorXd> w(v.data(), static_cast<Eigen::Index>(v.size()));
  return w.dot(entries * w);
}

EffectiveMatrix effective_matrix(const BondField& xi, const SolverOptions& options) {
  const auto& g = xi.geometry();
  const int d = g.dimension();
  const auto volume = static_cast<double>(g.volume());

  std::vector<VectorField> psi;  // psi[j](s, i) = psi^{ij}(s)
  EffectiveMatrix out{g, {}, {}, {}, 0.0, {}, 0};
  for (int j = 0; j < d; ++j) {
    std::vector<double> e(static_cast<std::size_t>(d), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    const SolveReport report = solve_corrector(xi, e, options);
    out.iterations += report.iterations;
    out.column_diagnostics.push_back(identity_residuals(xi, e, report.solution));
    psi.push_back(corrector_gradient(report.solution));
  }

  Eigen::MatrixXd linear = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd energy = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    for (int i = 0; i < d; ++i) {
      const double r = xi.rate(s, i);
      for (int j = 0; j < d; ++j) {
        const double aj = (i == j ? 1.0 : 0.0) + psi[static_cast<std::size_t>(j)](s, i);
        linear(i, j) += r * aj;
        for (int k = 0; k < d; ++k) {
          const double ak = (i == k ? 1.0 : 0.0) + psi[static_cast<std::size_t>(k)](s, i);
          energy(j, k) += r * aj * ak;
        }
      }
    }
  }
  out.linear_form_entries = 2.0 * linear / volume;
  out.energy_form_entries = 2.0 * energy / volume;
  out.entries = 0.5 * (out.linear_form_entries + out.linear_form_entries.transpose());
  out.asymmetry = 0.5 * (out.linear_form_entries - out.linear_form_entries.transpose()).cwiseAbs().maxCoeff();
  return out;
}

double one_d_exact(const BondField& xi) {
  if (xi.geometry().dimension() != 1) throw Error(ErrorKind::domain, "one_d_exact requires d = 1");
  double inverse_sum = 0.0;
  for (double r : xi.rates()) inverse_sum += 1.0 / r;
  return 2.0 * static_cast<double>(xi.rates().size()) / inverse_sum;
}

}  // namespace homog
