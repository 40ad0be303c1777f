#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "homogenize/diffusivity.hpp"
#include "homogenize/environment.hpp"
#include "homogenize/solver.hpp"
#include "homogenize/stats.hpp"

namespace homog {

struct CampaignConfig {
  DisorderLaw law = DisorderLaw::constant(1.0);
  int dimension = 1;
  std::vector<int> n_list;  // strictly increasing half periods
  std::size_t replicas = 2;
  SolverOptions solver;
  std::uint64_t master_seed = 0;
  std::vector<std::vector<double>> vectors;  // extra directions for (D_N v, v)
  int threads = 1;

  /// Throws a configuration error on an invalid campaign.
  void validate() const;
};

/// Seed of replica r. It does not depend on N: replica r uses the nested
/// restrictions of one environment on Z^d at every N.
std::uint64_t replica_seed(std::uint64_t master_seed, std::size_t replica);

struct ExperimentRecord {
  int n = 0;
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd entries;
  std::vector<double> quadratic_values;  // (D_N v, v) for CampaignConfig::vectors
  double max_orthogonality_residual = 0.0;
  double max_flux_divergence_residual = 0.0;
  double max_curl_residual = 0.0;
  double min_l2_bound_margin = 0.0;
  double asymmetry = 0.0;
  std::map<double, double> lp_norms;  // for the corrector along e_1
  std::size_t iterations = 0;
};

/// One record per (N, replica), sorted by (N, replica).
std::vector<ExperimentRecord> run_campaign(const CampaignConfig& config);

/// One row per record. `constant_columns` are appended to every row.
void write_campaign_csv(std::ostream& out, const CampaignConfig& config, std::span<const ExperimentRecord> records);
void write_campaign_csv(std::ostream& out, const CampaignConfig& config, std::span<const ExperimentRecord> records,
                        std::span<const std::pair<std::string, std::string>> constant_columns);

struct ConvergenceRow {
  int n = 0;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd ci_half_width;  // normal approximation, 95%
  Eigen::MatrixXd stddev;
  /// max entry of |mean_N - mean_next| for the next N of the list; absent on the last row
  std::optional<double> successive_difference;
};

std::vector<ConvergenceRow> convergence_study(std::span<const ExperimentRecord> records);

struct ConcentrationRow {
  int n = 0;
  double mean11 = 0.0;
  double stddev11 = 0.0;
  std::vector<double> tail_frequency;  // per epsilon, fraction with |D^11 - mean| > eps
};

struct ConcentrationTable {
  std::vector<double> epsilons;
  std::vector<ConcentrationRow> rows;
  /// -slope of log std vs log N; NaN when some std vanishes or fewer than two N
  double fitted_exponent = 0.0;
};

ConcentrationTable concentration_study(std::span<const ExperimentRecord> records, std::span<const double> epsilons);

struct HammingSample {
  std::size_t perturbed = 0;
  double fraction = 0.0;  // d_H / |T_N| with d_H the realised distance
  double delta = 0.0;     // |Delta D_N^{11}|
};

struct HammingTable {
  double base_value = 0.0;  // D_N^{11}(xi)
  std::vector<HammingSample> samples;
  std::map<std::size_t, double> median_delta;  // per perturbation count
  /// log-log slope of |Delta| against the fraction over samples with both positive
  double fitted_exponent = 0.0;
};

/// For each count and trial: resample that many distinct uniformly chosen
/// bonds from `law` and record |Delta D_N^{11}|.
HammingTable hamming_sensitivity(const BondField& xi, const DisorderLaw& law, std::span<const std::size_t> counts,
                                 std::size_t trials, const SolverOptions& options, std::uint64_t seed,
                                 int threads = 1);

struct DescentOptions {
  double gradient_tolerance = 1e-8;  // relative to c |v|
  std::size_t max_steps = 200000;
};

struct SurfaceTensionResult {
  double sigma = 0.0;         // half of the descent minimum of E sum_i xi_i (v_i + grad_i f)^2
  double quarter_form = 0.0;  // (D_N v, v) / 4 through the corrector
  double residual = 0.0;
  std::size_t steps = 0;
};

/// Minimises the Dirichlet functional with Barzilai-Borwein gradient steps,
/// independently of the conjugate-gradient corrector.
SurfaceTensionResult surface_tension(const BondField& xi, std::span<const double> v,
                                     const SolverOptions& options = {}, const DescentOptions& descent = {});

struct ResolventRow {
  double lambda = 0.0;
  /// sum_i E xi_i (grad_i chi^lambda - psi^i)^2
  double discrepancy = 0.0;
  std::size_t iterations = 0;
};

/// lambdas must be positive and strictly decreasing.
std::vector<ResolventRow> resolvent_convergence(const BondField& xi, std::span<const double> v,
                                                std::span<const double> lambdas, const SolverOptions& options = {});

}  // namespace homog
