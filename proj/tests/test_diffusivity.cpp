#include "doctest.h"

#include <cmath>

#include "homogenize/diffusivity.hpp"
#include "homogenize/errors.hpp"
#include "homogenize/operators.hpp"
#include "test_helpers.hpp"

using namespace homog;
using homog::testing::random_direction;
using homog::testing::random_field;
using homog::testing::relative_difference;
using homog::testing::two_site_chain;

namespace {

constexpr double tol = 1e-10;

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

TEST_CASE("two-site corrector and diffusivity") {
  const auto xi = two_site_chain();
  const std::vector<double> v{1.0};
  const auto chi = corrector(xi, v);
  CHECK(chi[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(chi[1] == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));

  const auto psi = corrector_gradient(chi);
  CHECK(psi(0, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(psi(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Constant flux xi (v + psi).
  for (std::size_t s = 0; s < 2; ++s) CHECK(xi.rate(s, 0) * (1.0 + psi(s, 0)) == doctest::Approx(4.0 / 3.0));

  const auto q = effective_quadratic(xi, v);
  CHECK(q.quadratic == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(q.linear == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(q.diagnostics.flux_divergence_residual <= 1e-12);
  CHECK(q.diagnostics.curl_residual == 0.0);
  CHECK(one_d_exact(xi) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("constant environment") {
  for (int d = 1; d <= 3; ++d) {
    const auto xi = sample_environment(DisorderLaw::constant(1.7), TorusGeometry(d, 2), 0);
    auto v = random_direction(d, 3);
    const double n = std::sqrt(sq_norm(v));
    for (auto& x : v) x /= n;
    const auto chi = corrector(xi, v);
    for (double x : chi.values) CHECK(x == 0.0);
    for (double x : corrector_gradient(chi).values) CHECK(x == 0.0);
    const auto q = effective_quadratic(xi, v);
    CHECK(q.quadratic == doctest::Approx(2.0 * 1.7).epsilon(1e-14));
    CHECK(q.diagnostics.orthogonality_residual == 0.0);
    CHECK(q.diagnostics.flux_divergence_residual <= 1e-14);
    CHECK(q.diagnostics.curl_residual == 0.0);
    for (const auto& [p, norm] : q.diagnostics.lp_norms) CHECK(norm == 0.0);

    const auto m = effective_matrix(xi);
    CHECK((m.entries - 2.0 * 1.7 * Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  CHECK(one_d_exact(sample_environment(DisorderLaw::constant(0.3), TorusGeometry(1, 5), 0)) ==
        doctest::Approx(0.6));
}

TEST_CASE("one_d_exact") {
  const BondField xi(TorusGeometry(1, 1), 2.0, {0.5, 2.0});
  CHECK(one_d_exact(xi) == doctest::Approx(1.6).epsilon(1e-14));
  CHECK_THROWS_AS(one_d_exact(sample_environment(DisorderLaw::constant(1.0), TorusGeometry(2, 2), 0)), Error);

  const auto law = DisorderLaw::uniform(0.5, 2.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rnd = sample_environment(law, TorusGeometry(1, 16), seed);
    const auto m = effective_matrix(rnd);
    CHECK(relative_difference(m.entries(0, 0), one_d_exact(rnd)) <= 1e-8);
  }
}

TEST_CASE("corrector linearity and zero means") {
  const auto law = DisorderLaw::two_point(0.5, 2.0, 0.5);
  for (int d = 1; d <= 3; ++d) {
    const auto xi = sample_environment(law, TorusGeometry(d, d == 3 ? 2 : 4), 11);
    const auto v = random_direction(d, 12);
    std::vector<double> v2(v);
    for (auto& x : v2) x *= 2.0;
    const auto a = corrector(xi, v), b = corrector(xi, v2);
    double scale = 0.0;
    for (double x : a.values) scale = std::max(scale, std::abs(x));
    for (std::size_t s = 0; s < a.size(); ++s) CHECK(std::abs(b[s] - 2.0 * a[s]) <= 10 * tol * std::max(1.0, scale));
    CHECK(std::abs(mean_rho(a)) <= 1e-13);
    const auto psi = corrector_gradient(a);
    for (int i = 0; i < d; ++i) CHECK(std::abs(mean_rho(psi.component(i))) <= 1e-14);
  }
}

TEST_CASE("identities on random environments") {
  const auto law = DisorderLaw::uniform(0.5, 2.0);
  const double c = law.ellipticity();
  for (int d = 1; d <= 3; ++d) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto xi = sample_environment(law, TorusGeometry(d, d == 3 ? 2 : 4), seed);
      const auto v = random_direction(d, seed + 50);
      const double v2 = sq_norm(v);
      const auto q = effective_quadratic(xi, v);
      const auto& diag = q.diagnostics;
      CHECK(diag.orthogonality_residual <= 100 * tol * v2 * c);
      CHECK(diag.curl_residual <= 1e-12);
      CHECK(diag.flux_divergence_residual <= 100 * tol * c * std::sqrt(v2));
      CHECK(diag.l2_bound_margin >= -1e-8);
      CHECK(std::abs(q.quadratic - q.linear) <= 100 * tol * c * v2);
      CHECK(diag.quadratic_linear_gap == doctest::Approx(std::abs(q.quadratic - q.linear)));
      CHECK(diag.lp_norms.size() == default_lp_exponents.size());
      for (double p : default_lp_exponents) {
        CHECK(diag.lp_norms.count(p) == 1);
        CHECK(std::isfinite(diag.lp_norms.at(p)));
      }
      // Lp norms are nondecreasing in p for a normalised measure.
      CHECK(diag.lp_norms.at(2.0) <= diag.lp_norms.at(2.5) * (1 + 1e-12));
      CHECK(diag.lp_norms.at(2.5) <= diag.lp_norms.at(3.0) * (1 + 1e-12));
      CHECK(diag.lp_norms.at(3.0) <= diag.lp_norms.at(4.0) * (1 + 1e-12));

      // Bounds 2|v|^2 / c <= (D v, v) <= 2 sum E xi_i v_i^2 <= 2 c |v|^2.
      double upper = 0.0;
      for (std::size_t s = 0; s < xi.geometry().volume(); ++s)
        for (int i = 0; i < d; ++i) upper += 2.0 * xi.rate(s, i) * v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
      upper /= static_cast<double>(xi.geometry().volume());
      CHECK(q.quadratic <= upper + 10 * tol);
      CHECK(q.quadratic <= 2.0 * c * v2);
      CHECK(q.quadratic >= 2.0 * v2 / c);
    }
  }
}

TEST_CASE("variational bound") {
  const auto law = DisorderLaw::two_point(0.5, 2.0, 0.5);
  const auto xi = sample_environment(law, TorusGeometry(2, 4), 21);
  const std::vector<double> v{0.6, -0.8};
  const auto q = effective_quadratic(xi, v);
  const auto chi = corrector(xi, v);
  CHECK(dirichlet_energy(xi, v, chi) == doctest::Approx(q.quadratic).epsilon(1e-10));
  CHECK(dirichlet_energy(xi, v, ScalarField(xi.geometry())) >= q.quadratic);
  for (std::uint64_t k = 0; k < 50; ++k) {
    auto f = random_field(xi.geometry(), 1000 + k);
    // Mix random trial functions with perturbations of the minimiser.
    if (k % 2 == 1)
      for (std::size_t s = 0; s < f.size(); ++s) f[s] = chi[s] + 1e-3 * f[s];
    CHECK(dirichlet_energy(xi, v, f) >= q.quadratic - 10 * tol);
  }
}

TEST_CASE("monotonicity in the medium") {
  const auto law = DisorderLaw::uniform(0.5, 1.5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto xi = sample_environment(law, TorusGeometry(2, 4), seed);
    std::vector<double> raised(xi.rates().begin(), xi.rates().end());
    SplitMix64 rng(seed + 99);
    for (auto& r : raised) r = std::min(2.0, r + 0.5 * rng.uniform());
    const BondField up(xi.geometry(), 2.0, raised);
    const BondField base(xi.geometry(), 2.0, {xi.rates().begin(), xi.rates().end()});
    const auto v = random_direction(2, seed);
    CHECK(effective_quadratic(base, v).quadratic <= effective_quadratic(up, v).quadratic + 10 * tol);
  }
}

TEST_CASE("effective_matrix") {
  const auto law = DisorderLaw::uniform(0.5, 2.0);
  const auto xi = sample_environment(law, TorusGeometry(2, 2), 4);
  const auto m = effective_matrix(xi);
  CHECK(m.entries.rows() == 2);
  CHECK((m.entries - m.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.asymmetry <= 1e-8 * m.entries.cwiseAbs().maxCoeff());
  CHECK((m.entries - m.linear_form_entries).cwiseAbs().maxCoeff() <= 1e-8 * m.entries.cwiseAbs().maxCoeff());
  CHECK((m.entries - m.energy_form_entries).cwiseAbs().maxCoeff() <= 1e-8 * m.entries.cwiseAbs().maxCoeff());
  CHECK(m.column_diagnostics.size() == 2);

  const std::vector<double> ones{1.0, 1.0};
  CHECK(relative_difference(m.quadratic_form(ones), effective_quadratic(xi, ones).quadratic) <= 1e-7);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto v = random_direction(2, seed);
    CHECK(relative_difference(m.quadratic_form(v), effective_quadratic(xi, v).quadratic) <= 1e-8);
  }
  for (int i = 0; i < 2; ++i) {
    std::vector<double> e(2, 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    CHECK(relative_difference(m.entries(i, i), effective_quadratic(xi, e).quadratic) <= 1e-8);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.entries);
  CHECK(eig.eigenvalues().minCoeff() >= 2.0 / law.ellipticity());
  CHECK(eig.eigenvalues().maxCoeff() <= 2.0 * law.ellipticity());

  const auto line = sample_environment(law, TorusGeometry(1, 8), 4);
  for (const auto& diag : effective_matrix(line).column_diagnostics) CHECK(diag.curl_residual == 0.0);
}
