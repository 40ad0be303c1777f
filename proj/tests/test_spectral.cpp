#include "doctest.h"

#include <cmath>

#include "homogenize/diffusivity.hpp"
#include "homogenize/errors.hpp"
#include "homogenize/operators.hpp"
#include "homogenize/spectral.hpp"
#include "test_helpers.hpp"

using namespace homog;
using homog::testing::random_direction;
using homog::testing::relative_difference;
using homog::testing::two_site_chain;

namespace {

double phi_mass(const BondField& xi, std::span<const double> v) {
  const auto phi = local_drift(xi, v);
  double s = 0.0;
  for (double x : phi.values) s += x * x;
  return s / static_cast<double>(phi.size());
}

}  // namespace

TEST_CASE("two-site spectral measure") {
  const auto xi = two_site_chain();
  const std::vector<double> v{1.0};
  const auto m = spectral_measure(xi, v);
  REQUIRE(m.atoms.size() == 2);
  CHECK(m.atoms[0].kernel);
  CHECK(std::abs(m.atoms[0].eigenvalue) <= 1e-12);
  CHECK(m.atoms[0].weight <= 1e-12);
  CHECK_FALSE(m.atoms[1].kernel);
  CHECK(m.atoms[1].eigenvalue == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(m.atoms[1].weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.total_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.max_eigenvalue == doctest::Approx(6.0).epsilon(1e-12));

  CHECK(diffusivity_via_spectrum(xi, v) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(semigroup_moment(m, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(semigroup_moment(m, 1.0) == doctest::Approx(std::exp(-6.0)).epsilon(1e-10));
  CHECK(semigroup_moment(xi, v, 1.0) == doctest::Approx(2.4788e-3).epsilon(1e-4));
  CHECK(semigroup_moment(m, 1e4) <= 1e-300);
  CHECK_THROWS_AS(semigroup_moment(m, -0.5), Error);
}

TEST_CASE("constant environment has no drift mass") {
  const auto xi = sample_environment(DisorderLaw::constant(1.3), TorusGeometry(2, 2), 0);
  const std::vector<double> v{0.6, 0.8};
  const auto m = spectral_measure(xi, v);
  for (const auto& a : m.atoms) CHECK(a.weight == 0.0);
  CHECK(m.total_mass == 0.0);
  CHECK(diffusivity_via_spectrum(xi, v) == doctest::Approx(2.6).epsilon(1e-14));
  const auto mc = semigroup_moment_mc(xi, v, 1.0, 100, 3);
  CHECK(mc.value == 0.0);
  CHECK(mc.standard_error == 0.0);
}

TEST_CASE("spectral route agrees with the corrector route") {
  const auto law = DisorderLaw::uniform(0.5, 2.0);
  for (int d = 1; d <= 3; ++d) {
    const TorusGeometry g(d, d == 1 ? 8 : 2);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto xi = sample_environment(law, g, seed);
      const auto v = random_direction(d, seed + 7);
      const auto m = spectral_measure(xi, v);
      CHECK(m.atoms.size() == g.volume());
      CHECK(m.total_mass == doctest::Approx(phi_mass(xi, v)).epsilon(1e-12));
      CHECK(m.kernel_weight <= 1e-12 * std::max(m.total_mass, 1e-300));
      double previous = -1.0;
      for (const auto& a : m.atoms) {
        CHECK(a.eigenvalue >= previous);
        CHECK(a.weight >= 0.0);
        previous = a.eigenvalue;
      }
      const double spectral = diffusivity_via_spectrum(m, xi, v);
      CHECK(relative_difference(spectral, effective_quadratic(xi, v).quadratic) <= 1e-8);
    }
  }
}

TEST_CASE("semigroup moments are completely monotone") {
  const auto xi = sample_environment(DisorderLaw::two_point(0.5, 2.0, 0.5), TorusGeometry(2, 3), 5);
  const std::vector<double> v{1.0, 0.0};
  const auto m = spectral_measure(xi, v);
  std::vector<double> values;
  for (int k = 0; k <= 10; ++k) values.push_back(semigroup_moment(m, 0.5 * k));
  CHECK(values.front() == doctest::Approx(m.total_mass).epsilon(1e-12));
  // k-th forward differences have sign (-1)^k.
  std::vector<double> diff = values;
  for (int order = 1; order <= 4; ++order) {
    std::vector<double> next;
    for (std::size_t i = 0; i + 1 < diff.size(); ++i) next.push_back(diff[i + 1] - diff[i]);
    const double sign = order % 2 == 0 ? 1.0 : -1.0;
    for (double x : next) CHECK(sign * x >= -1e-15 * m.total_mass);
    diff = next;
  }
}

TEST_CASE("Monte Carlo semigroup moment") {
  const auto xi = two_site_chain();
  const std::vector<double> v{1.0};
  const auto mc = semigroup_moment_mc(xi, v, 1.0, 100000, 2024);
  CHECK(std::abs(mc.value - std::exp(-6.0)) <= 3.0 * mc.standard_error);

  const auto zero = semigroup_moment_mc(xi, v, 0.0, 1000, 1);
  CHECK(std::abs(zero.value - 1.0) <= 3.0 * zero.standard_error + 1e-12);

  const auto rnd = sample_environment(DisorderLaw::uniform(0.5, 2.0), TorusGeometry(2, 2), 8);
  const std::vector<double> w{0.6, 0.8};
  const double exact = semigroup_moment(rnd, w, 0.5);
  const auto est = semigroup_moment_mc(rnd, w, 0.5, 50000, 77);
  CHECK(std::abs(est.value - exact) <= 3.0 * est.standard_error);

  const auto a = semigroup_moment_mc(rnd, w, 0.5, 5000, 9, 1);
  const auto b = semigroup_moment_mc(rnd, w, 0.5, 5000, 9, 3);
  CHECK(a.value == b.value);
  CHECK(a.standard_error == b.standard_error);

  CHECK_THROWS_AS(semigroup_moment_mc(xi, v, 1.0, 0, 1), Error);
  CHECK_THROWS_AS(semigroup_moment_mc(xi, v, -1.0, 10, 1), Error);
}

TEST_CASE("dense guard") {
  const auto xi = sample_environment(DisorderLaw::constant(1.0), TorusGeometry(2, 33), 0);
  const std::vector<double> v{1.0, 0.0};
  CHECK_THROWS_AS(spectral_measure(xi, v), Error);
}
