#include "homogenize/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include "homogenize/errors.hpp"
#include "homogenize/operators.hpp"
#include "homogenize/parallel.hpp"
#include "homogenize/rng.hpp"
#include "homogenize/serialization.hpp"

namespace homog {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HOMOGENIZE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

std::vector<double> unit_vector(int d, int k) {
  std::vector<double> e(static_cast<std::size_t>(d), 0.0);
  e[static_cast<std::size_t>(k)] = 1.0;
  return e;
}

double euclidean_norm(std::span<const double> v) { return norm2(v); }

}  // namespace

void CampaignConfig::validate() const {
  if (dimension < 1) throw Error(ErrorKind::config, "campaign dimension must be >= 1");
  if (n_list.empty()) throw Error(ErrorKind::config, "campaign needs at least one N");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 1) throw Error(ErrorKind::config, "campaign N must be >= 1");
    if (k > 0 && n_list[k] <= n_list[k - 1]) throw Error(ErrorKind::config, "campaign N list must be increasing");
  }
  if (replicas < 2) throw Error(ErrorKind::config, "campaign needs at least two replicas");
  for (const auto& v : vectors)
    if (v.size() != static_cast<std::size_t>(dimension))
      throw Error(ErrorKind::config, "campaign vector has wrong length");
}

std::uint64_t replica_seed(std::uint64_t master_seed, std::size_t replica) {
  return derive_seed(master_seed, {0x7265706cULL, replica});
}

std::vector<ExperimentRecord> run_campaign(const CampaignConfig& config) {
  config.validate();
  const std::size_t tasks = config.n_list.size() * config.replicas;
  std::vector<ExperimentRecord> records(tasks);
  parallel_for(tasks, config.threads, [&](std::size_t task) {
    const int n = config.n_list[task / config.replicas];
    const std::size_t replica = task % config.replicas;
    const TorusGeometry geometry(config.dimension, n);
    const std::uint64_t seed = replica_seed(config.master_seed, replica);
    const BondField xi = sample_environment(config.law, geometry, seed);
    const EffectiveMatrix m = effective_matrix(xi, config.solver);

    ExperimentRecord& rec = records[task];
    rec.n = n;
    rec.replica = replica;
    rec.seed = seed;
    rec.entries = m.entries;
    for (const auto& v : config.vectors) rec.quadratic_values.push_back(m.quadratic_form(v));
    rec.min_l2_bound_margin = std::numeric_limits<double>::infinity();
    for (const auto& diag : m.column_diagnostics) {
      rec.max_orthogonality_residual = std::max(rec.max_orthogonality_residual, diag.orthogonality_residual);
      rec.max_flux_divergence_residual = std::max(rec.max_flux_divergence_residual, diag.flux_divergence_residual);
      rec.max_curl_residual = std::max(rec.max_curl_residual, diag.curl_residual);
      rec.min_l2_bound_margin = std::min(rec.min_l2_bound_margin, diag.l2_bound_margin);
    }
    rec.asymmetry = m.asymmetry;
    rec.lp_norms = m.column_diagnostics.front().lp_norms;
    rec.iterations = m.iterations;
  });
  return records;
}

void write_campaign_csv(std::ostream& out, const CampaignConfig& config, std::span<const ExperimentRecord> records,
                        std::span<const std::pair<std::string, std::string>> constant_columns) {
  const int d = config.dimension;
  out << "seed,replica,d,N,c,law";
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out << ",D" << i + 1 << j + 1;
  for (std::size_t k = 0; k < config.vectors.size(); ++k) out << ",quadratic_" << k;
  out << ",orthogonality_residual,flux_divergence_residual,curl_residual,l2_bound_margin,asymmetry";
  for (double p : default_lp_exponents) out << ",lp_" << format_double(p);
  out << ",iterations";
  for (const auto& [name, value] : constant_columns) out << ',' << name;
  out << '\n';

  const std::string law = config.law.name();
  for (const auto& r : records) {
    out << r.seed << ',' << r.replica << ',' << d << ',' << r.n << ',' << format_double(config.law.ellipticity()) << ','
        << law;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out << ',' << format_double(r.entries(i, j));
    for (double q : r.quadratic_values) out << ',' << format_double(q);
    out << ',' << format_double(r.max_orthogonality_residual) << ',' << format_double(r.max_flux_divergence_residual)
        << ',' << format_double(r.max_curl_residual) << ',' << format_double(r.min_l2_bound_margin) << ','
        << format_double(r.asymmetry);
    for (double p : default_lp_exponents) out << ',' << format_double(r.lp_norms.at(p));
    out << ',' << r.iterations;
    for (const auto& [name, value] : constant_columns) out << ',' << value;
    out << '\n';
  }
}

void write_campaign_csv(std::ostream& out, const CampaignConfig& config, std::span<const ExperimentRecord> records) {
  write_campaign_csv(out, config, records, {});
}

namespace {

// Records grouped by N, preserving order.
std::vector<std::vector<const ExperimentRecord*>> group_by_n(std::span<const ExperimentRecord> records) {
  std::vector<std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : records) {
    if (groups.empty() || groups.back().front()->n != r.n) groups.emplace_back();
    groups.back().push_back(&r);
  }
  return groups;
}

}  // namespace

std::vector<ConvergenceRow> convergence_study(std::span<const ExperimentRecord> records) {
  std::vector<ConvergenceRow> rows;
  for (const auto& group : group_by_n(records)) {
    const auto d = group.front()->entries.rows();
    ConvergenceRow row{group.front()->n, Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d),
                       Eigen::MatrixXd::Zero(d, d), std::nullopt};
    std::vector<double> x(group.size());
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < group.size(); ++k) x[k] = group[k]->entries(i, j);
        const Estimate e = mean_estimate(x);
        row.mean(i, j) = e.value;
        row.stddev(i, j) = sample_stddev(x);
        row.ci_half_width(i, j) = z95 * e.standard_error;
      }
    rows.push_back(std::move(row));
  }
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    rows[k].successive_difference = (rows[k].mean - rows[k + 1].mean).cwiseAbs().maxCoeff();
  return rows;
}

ConcentrationTable concentration_study(std::span<const ExperimentRecord> records, std::span<const double> epsilons) {
  ConcentrationTable table;
  table.epsilons.assign(epsilons.begin(), epsilons.end());
  std::vector<double> log_n, log_std;
  bool degenerate = false;
  for (const auto& group : group_by_n(records)) {
    std::vector<double> x;
    for (const auto* r : group) x.push_back(r->entries(0, 0));
    ConcentrationRow row;
    row.n = group.front()->n;
    row.mean11 = sample_mean(x);
    row.stddev11 = sample_stddev(x);
    for (double eps : epsilons) {
      const auto beyond = std::count_if(x.begin(), x.end(), [&](double v) { return std::abs(v - row.mean11) > eps; });
      row.tail_frequency.push_back(static_cast<double>(beyond) / static_cast<double>(x.size()));
    }
    if (row.stddev11 > 0.0) {
      log_n.push_back(std::log(static_cast<double>(row.n)));
      log_std.push_back(std::log(row.stddev11));
    } else {
      degenerate = true;
    }
    table.rows.push_back(std::move(row));
  }
  table.fitted_exponent = (degenerate || log_n.size() < 2) ? std::numeric_limits<double>::quiet_NaN()
                                                           : -fit_line(log_n, log_std).slope;
  return table;
}

HammingTable hamming_sensitivity(const BondField& xi, const DisorderLaw& law, std::span<const std::size_t> counts,
                                 std::size_t trials, const SolverOptions& options, std::uint64_t seed, int threads) {
  const auto& g = xi.geometry();
  const int d = g.dimension();
  const auto e1 = unit_vector(d, 0);
  HammingTable table;
  table.base_value = effective_quadratic(xi, e1, options).quadratic;

  for (std::size_t count : counts)
    if (count > g.bond_count()) throw Error(ErrorKind::config, "perturbation count exceeds the bond count");

  const std::size_t tasks = counts.size() * trials;
  std::vector<HammingSample> samples(tasks);
  parallel_for(tasks, threads, [&](std::size_t task) {
    const std::size_t count = counts[task / trials];
    const std::size_t trial = task % trials;
    const std::uint64_t trial_seed = derive_seed(seed, {count, trial});
    SplitMix64 rng(trial_seed);
    // Partial Fisher-Yates: the first `count` entries are a uniform subset.
    std::vector<std::size_t> order(g.bond_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    std::vector<Bond> bonds;
    for (std::size_t b : std::span(order).first(count))
      bonds.push_back({b / static_cast<std::size_t>(d), static_cast<int>(b % static_cast<std::size_t>(d))});
    const BondField perturbed = resample_bonds(xi, bonds, law, derive_seed(trial_seed, 1));
    const double value = effective_quadratic(perturbed, e1, options).quadratic;
    samples[task] = {count, static_cast<double>(hamming_distance(xi, perturbed)) / static_cast<double>(g.volume()),
                     std::abs(value - table.base_value)};
  });
  table.samples = samples;

  std::vector<double> log_fraction, log_delta;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    std::vector<double> deltas;
    for (std::size_t t = 0; t < trials; ++t) deltas.push_back(samples[c * trials + t].delta);
    table.median_delta[counts[c]] = median(deltas);
  }
  for (const auto& s : samples)
    if (s.fraction > 0.0 && s.delta > 0.0) {
      log_fraction.push_back(std::log(s.fraction));
      log_delta.push_back(std::log(s.delta));
    }
  const bool fit_possible =
      log_fraction.size() >= 2 && std::adjacent_find(log_fraction.begin(), log_fraction.end(),
                                                     std::not_equal_to<>()) != log_fraction.end();
  table.fitted_exponent = fit_possible ? fit_line(log_fraction, log_delta).slope : std::numeric_limits<double>::quiet_NaN();
  return table;
}

SurfaceTensionResult surface_tension(const BondField& xi, std::span<const double> v, const SolverOptions& options,
                                     const DescentOptions& descent) {
  const auto& g = xi.geometry();
  const int d = g.dimension();
  if (v.size() != static_cast<std::size_t>(d)) throw Error(ErrorKind::dimension, "direction vector has wrong length");
  const std::size_t n = g.volume();
  const double volume = static_cast<double>(n);
  const double c = xi.ellipticity();
  const double threshold = descent.gradient_tolerance * c * euclidean_norm(v);

  // h(f) = sum_i div*_i(xi_i (v_i + grad_i f)) = (|T_N| / 2) * gradient of
  // the functional E sum_i xi_i (v_i + grad_i f)^2.
  VectorField flux(g);
  auto functional_gradient = [&](const ScalarField& f) {
    for (std::size_t s = 0; s < n; ++s)
      for (int i = 0; i < d; ++i)
        flux(s, i) = xi.rate(s, i) * (v[static_cast<std::size_t>(i)] + f[g.forward(s, i)] - f[s]);
    return div_star(flux);
  };

  ScalarField f(g);
  ScalarField h = functional_gradient(f);
  double step = 1.0 / (4.0 * d * c);
  std::size_t steps = 0;
  while (norm2(h.values) / std::sqrt(volume) > threshold) {
    if (steps >= descent.max_steps)
      throw ConvergenceError("gradient descent exhausted its step budget", steps, norm2(h.values) / std::sqrt(volume));
    ScalarField next = f;
    for (std::size_t s = 0; s < n; ++s) next[s] -= step * h[s];
    const double m = mean_rho(next);
    for (auto& x : next.values) x -= m;
    ScalarField h_next = functional_gradient(next);
    double ss = 0.0, sy = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double ds = next[s] - f[s];
      const double dy = h_next[s] - h[s];
      ss += ds * ds;
      sy += ds * dy;
    }
    if (sy > 0.0) step = ss / sy;
    f = std::move(next);
    h = std::move(h_next);
    ++steps;
  }

  SurfaceTensionResult out;
  out.sigma = 0.5 * 0.5 * dirichlet_energy(xi, v, f);
  out.quarter_form = 0.25 * effective_quadratic(xi, v, options).quadratic;
  out.residual = std::abs(out.sigma - out.quarter_form);
  out.steps = steps;
  return out;
}

std::vector<ResolventRow> resolvent_convergence(const BondField& xi, std::span<const double> v,
                                                std::span<const double> lambdas, const SolverOptions& options) {
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0)) throw Error(ErrorKind::domain, "resolvent parameters must be positive");
    if (k > 0 && !(lambdas[k] < lambdas[k - 1]))
      throw Error(ErrorKind::domain, "resolvent parameters must be strictly decreasing");
  }
  const auto& g = xi.geometry();
  const int d = g.dimension();
  const ScalarField phi = local_drift(xi, v);
  const VectorField psi = corrector_gradient(solve_poisson(xi, phi, options).solution);
  std::vector<ResolventRow> rows;
  for (double lambda : lambdas) {
    const SolveReport report = solve_resolvent(xi, phi, lambda, options);
    const VectorField psi_lambda = grad(report.solution);
    double acc = 0.0;
    for (std::size_t s = 0; s < g.volume(); ++s)
      for (int i = 0; i < d; ++i) {
        const double diff = psi_lambda(s, i) - psi(s, i);
        acc += xi.rate(s, i) * diff * diff;
      }
    rows.push_back({lambda, acc / static_cast<double>(g.volume()), report.iterations});
  }
  return rows;
}

}  // namespace homog
