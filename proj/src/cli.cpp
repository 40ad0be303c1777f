#include "homogenize/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "homogenize/diffusivity.hpp"
#include "homogenize/errors.hpp"
#include "homogenize/experiments.hpp"
#include "homogenize/operators.hpp"
#include "homogenize/parallel.hpp"
#include "homogenize/rng.hpp"
#include "homogenize/serialization.hpp"
#include "homogenize/spectral.hpp"
#include "homogenize/walker.hpp"

namespace homog {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& message) { throw Error(ErrorKind::config, message); }

// Field descriptors: name -> default value. The default's JSON type is the
// required type; a null default marks an optional key without default.
using Section = std::vector<std::pair<std::string, json>>;

const std::map<std::string, Section>& sections() {
  static const std::map<std::string, Section> table{
      {"geometry", {{"dimension", 1}, {"half_period", 2}}},
      {"solver", {{"tol", 1e-10}, {"max_iterations", 0}, {"jacobi", false}}},
      {"campaign", {{"n_list", json::array({4, 8})}, {"replicas", 20}, {"epsilons", json::array({0.01, 0.05, 0.1})},
                    {"vectors", json::array()}}},
      {"walk", {{"horizon", 200.0}, {"walkers", 10000}, {"random_start", false}, {"jump_log", false}, {"replicas", 0}}},
      {"spectral", {{"moments", json::array({0.0, 1.0})}, {"mc_walkers", 0}}},
      {"hamming", {{"counts", json::array({1})}, {"trials", 20}}},
      {"resolvent", {{"lambdas", json::array({1.0, 0.1, 0.01, 0.001})}}},
      {"descent", {{"gradient_tolerance", 1e-8}, {"max_steps", 200000}}},
      {"output", {{"root", "."}, {"directory", "homogenize-out"}}},
  };
  return table;
}

bool same_kind(const json& value, const json& prototype) {
  if (prototype.is_boolean()) return value.is_boolean();
  if (prototype.is_number_integer()) return value.is_number_integer();
  if (prototype.is_number()) return value.is_number();
  if (prototype.is_string()) return value.is_string();
  if (prototype.is_array()) return value.is_array();
  return true;
}

json validate_document(const json& raw) {
  if (!raw.is_object()) schema_error("configuration must be a JSON object");
  static const std::set<std::string> top_level{"geometry", "law",      "environment", "seed",      "direction",
                                              "threads",  "solver",   "campaign",    "walk",      "spectral",
                                              "hamming",  "resolvent", "descent",    "output"};
  for (const auto& item : raw.items())
    if (!top_level.contains(item.key())) schema_error("unknown key '" + item.key() + "'");

  json doc = raw;
  for (const auto& [name, fields] : sections()) {
    json section = raw.contains(name) ? raw.at(name) : json::object();
    if (!section.is_object()) schema_error("'" + name + "' must be an object");
    for (const auto& item : section.items()) {
      const bool known = std::any_of(fields.begin(), fields.end(), [&](const auto& f) { return f.first == item.key(); });
      if (!known) schema_error("unknown key '" + name + "." + item.key() + "'");
    }
    for (const auto& [key, prototype] : fields) {
      if (!section.contains(key)) {
        section[key] = prototype;
      } else if (!same_kind(section[key], prototype)) {
        schema_error("'" + name + "." + key + "' has the wrong type");
      }
    }
    doc[name] = section;
  }

  if (!doc.contains("seed")) doc["seed"] = 0;
  if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0))
    schema_error("'seed' must be a nonnegative integer");
  if (!doc.contains("threads")) doc["threads"] = 0;
  if (!doc["threads"].is_number_integer() || doc["threads"].get<int>() < 0)
    schema_error("'threads' must be a nonnegative integer");
  if (doc.contains("direction")) {
    if (!doc["direction"].is_array()) schema_error("'direction' must be an array of numbers");
    for (const auto& x : doc["direction"])
      if (!x.is_number()) schema_error("'direction' must be an array of numbers");
  }
  if (!(doc["solver"]["tol"].get<double>() > 0.0)) schema_error("'solver.tol' must be positive");
  if (doc["solver"]["max_iterations"].get<std::int64_t>() < 0) schema_error("'solver.max_iterations' must be >= 0");
  if (doc["walk"]["walkers"].get<std::int64_t>() < 1) schema_error("'walk.walkers' must be >= 1");
  if (doc["walk"]["replicas"].get<std::int64_t>() < 0) schema_error("'walk.replicas' must be >= 0");
  if (!(doc["walk"]["horizon"].get<double>() > 0.0)) schema_error("'walk.horizon' must be > 0");
  if (doc["hamming"]["trials"].get<std::int64_t>() < 1) schema_error("'hamming.trials' must be >= 1");
  for (const auto& x : doc["hamming"]["counts"])
    if (!x.is_number_integer() || x.get<std::int64_t>() < 0) schema_error("'hamming.counts' must hold integers >= 0");
  for (const auto& x : doc["campaign"]["n_list"])
    if (!x.is_number_integer()) schema_error("'campaign.n_list' must hold integers");
  if (doc["campaign"]["replicas"].get<std::int64_t>() < 2) schema_error("'campaign.replicas' must be >= 2");
  if (doc["spectral"]["mc_walkers"].get<std::int64_t>() < 0) schema_error("'spectral.mc_walkers' must be >= 0");
  if (!(doc["descent"]["gradient_tolerance"].get<double>() > 0.0))
    schema_error("'descent.gradient_tolerance' must be positive");
  if (doc["descent"]["max_steps"].get<std::int64_t>() < 1) schema_error("'descent.max_steps' must be >= 1");

  // Semantic checks on the mathematical objects.
  if (doc.contains("law")) (void)law_from_json(doc["law"]);
  if (doc.contains("environment")) (void)environment_from_json(doc["environment"]);
  (void)TorusGeometry(doc["geometry"]["dimension"].get<int>(), doc["geometry"]["half_period"].get<int>());
  return doc;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Context {
  const RunConfig& config;
  std::string subcommand;
  std::string hash;
  std::uint64_t seed;
  int threads;
  SolverOptions solver;
  // Pending artifacts, written only once the whole subcommand succeeded.
  std::vector<std::pair<std::string, std::string>> artifacts;

  const json& doc() const { return config.document; }

  std::string stem() const { return subcommand + "_seed" + std::to_string(seed) + "_" + hash; }

  json header() const {
    return {{"version", toolkit_version}, {"config_hash", hash}, {"subcommand", subcommand}, {"seed", seed}};
  }

  void add_json(const std::string& suffix, const json& body) {
    json j = header();
    j.update(body);
    artifacts.emplace_back(stem() + suffix + ".json", j.dump(2) + "\n");
  }
  void add_text(const std::string& name, std::string text) { artifacts.emplace_back(name, std::move(text)); }

  std::vector<std::pair<std::string, std::string>> csv_constants() const {
    return {{"config_hash", hash}, {"version", toolkit_version}};
  }
};

DisorderLaw configured_law(const Context& ctx) {
  if (!ctx.doc().contains("law")) schema_error("this subcommand needs a 'law'");
  return law_from_json(ctx.doc()["law"]);
}

BondField configured_environment(const Context& ctx) {
  if (ctx.doc().contains("environment")) return environment_from_json(ctx.doc()["environment"]);
  const auto& g = ctx.doc()["geometry"];
  return sample_environment(configured_law(ctx), TorusGeometry(g["dimension"].get<int>(), g["half_period"].get<int>()),
                            ctx.seed);
}

std::vector<double> configured_direction(const Context& ctx, int d) {
  std::vector<double> v(static_cast<std::size_t>(d), 0.0);
  v[0] = 1.0;
  if (ctx.doc().contains("direction")) v = ctx.doc()["direction"].get<std::vector<double>>();
  if (v.size() != static_cast<std::size_t>(d)) schema_error("'direction' length must equal the dimension");
  return v;
}

CampaignConfig configured_campaign(const Context& ctx) {
  const json& c = ctx.doc()["campaign"];
  CampaignConfig config;
  config.law = configured_law(ctx);
  config.dimension = ctx.doc()["geometry"]["dimension"].get<int>();
  config.n_list = c["n_list"].get<std::vector<int>>();
  config.replicas = c["replicas"].get<std::size_t>();
  config.solver = ctx.solver;
  config.master_seed = ctx.seed;
  config.vectors = c["vectors"].get<std::vector<std::vector<double>>>();
  config.threads = ctx.threads;
  config.validate();
  return config;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json estimate_json(const Estimate& e) { return {{"estimate", e.value}, {"standard_error", e.standard_error}}; }

void run_diffusivity(Context& ctx) {
  const BondField xi = configured_environment(ctx);
  const EffectiveMatrix m = effective_matrix(xi, ctx.solver);
  json body{{"environment", to_json(xi, !xi.origin().has_value())}, {"effective_matrix", to_json(m)}};
  if (xi.geometry().dimension() == 1) body["one_d_exact"] = one_d_exact(xi);
  ctx.add_json("", body);
}

std::string records_csv(const Context& ctx, const CampaignConfig& config, const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  write_campaign_csv(out, config, records, ctx.csv_constants());
  return out.str();
}

void run_converge(Context& ctx) {
  const CampaignConfig config = configured_campaign(ctx);
  const auto records = run_campaign(config);
  const auto rows = convergence_study(records);
  const int d = config.dimension;

  std::ostringstream table;
  table << "N";
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) table << ",mean_D" << i + 1 << j + 1 << ",ci_D" << i + 1 << j + 1;
  table << ",successive_difference,config_hash,version\n";
  json summary_rows = json::array();
  for (const auto& r : rows) {
    table << r.n;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) table << ',' << format_double(r.mean(i, j)) << ',' << format_double(r.ci_half_width(i, j));
    table << ',' << (r.successive_difference ? format_double(*r.successive_difference) : std::string()) << ','
          << ctx.hash << ',' << toolkit_version << '\n';
    summary_rows.push_back({{"N", r.n},
                            {"mean", matrix_json(r.mean)},
                            {"ci_half_width", matrix_json(r.ci_half_width)},
                            {"stddev", matrix_json(r.stddev)},
                            {"successive_difference", r.successive_difference ? json(*r.successive_difference) : json()}});
  }
  json body{{"law", to_json(config.law)}, {"replicas", config.replicas}, {"rows", summary_rows}};
  if (d == 1) body["one_d_limit"] = 2.0 / config.law.mean_inverse();
  ctx.add_text(ctx.stem() + "_records.csv", records_csv(ctx, config, records));
  ctx.add_text(ctx.stem() + "_table.csv", table.str());
  ctx.add_json("", body);
}

void run_concentrate(Context& ctx) {
  const CampaignConfig config = configured_campaign(ctx);
  const auto epsilons = ctx.doc()["campaign"]["epsilons"].get<std::vector<double>>();
  const auto records = run_campaign(config);
  const auto table = concentration_study(records, epsilons);

  std::ostringstream csv;
  csv << "N,mean_D11,std_D11";
  for (double e : epsilons) csv << ",tail_" << format_double(e);
  csv << ",config_hash,version\n";
  json rows = json::array();
  for (const auto& r : table.rows) {
    csv << r.n << ',' << format_double(r.mean11) << ',' << format_double(r.stddev11);
    for (double t : r.tail_frequency) csv << ',' << format_double(t);
    csv << ',' << ctx.hash << ',' << toolkit_version << '\n';
    rows.push_back({{"N", r.n}, {"mean_D11", r.mean11}, {"std_D11", r.stddev11}, {"tail_frequency", r.tail_frequency}});
  }
  ctx.add_text(ctx.stem() + "_records.csv", records_csv(ctx, config, records));
  ctx.add_text(ctx.stem() + "_table.csv", csv.str());
  ctx.add_json("", json{{"law", to_json(config.law)},
                    {"epsilons", epsilons},
                    {"rows", rows},
                    {"fitted_exponent", std::isnan(table.fitted_exponent) ? json() : json(table.fitted_exponent)}});
}

void run_hamming(Context& ctx) {
  const BondField xi = configured_environment(ctx);
  const DisorderLaw law = xi.origin() ? xi.origin()->law : configured_law(ctx);
  const auto counts = ctx.doc()["hamming"]["counts"].get<std::vector<std::size_t>>();
  const auto trials = ctx.doc()["hamming"]["trials"].get<std::size_t>();
  const auto table = hamming_sensitivity(xi, law, counts, trials, ctx.solver, derive_seed(ctx.seed, 0x68616dULL), ctx.threads);

  std::ostringstream csv;
  csv << "perturbed,fraction,delta_D11,config_hash,version\n";
  for (const auto& s : table.samples)
    csv << s.perturbed << ',' << format_double(s.fraction) << ',' << format_double(s.delta) << ',' << ctx.hash << ','
        << toolkit_version << '\n';
  json medians = json::object();
  for (const auto& [count, m] : table.median_delta) medians[std::to_string(count)] = m;
  ctx.add_text(ctx.stem() + ".csv", csv.str());
  ctx.add_json("", json{{"base_D11", table.base_value},
                    {"median_delta", medians},
                    {"fitted_exponent", std::isnan(table.fitted_exponent) ? json() : json(table.fitted_exponent)}});
}

void run_walk(Context& ctx) {
  const BondField xi = configured_environment(ctx);
  const int d = xi.geometry().dimension();
  const auto v = configured_direction(ctx, d);
  const json& w = ctx.doc()["walk"];
  WalkConfig config{w["horizon"].get<double>(), w["walkers"].get<std::size_t>(), ctx.seed,
                    w["random_start"].get<bool>(), ctx.threads};
  json body{{"direction", v}, {"horizon", config.horizon}, {"walkers", config.walkers}};
  body["msd"] = estimate_json(msd_estimate(xi, v, config));
  body["effective_quadratic"] = effective_quadratic(xi, v, ctx.solver).quadratic;
  if (const auto replicas = w["replicas"].get<std::size_t>(); replicas > 0) {
    const DisorderLaw law = configured_law(ctx);
    body["annealed_msd"] = estimate_json(annealed_msd(law, xi.geometry(), v, config, replicas));
    if (d == 1) body["one_d_limit"] = 2.0 / law.mean_inverse();
  }
  if (w["jump_log"].get<bool>()) {
    std::vector<Jump> log;
    simulate_walk(xi, config.horizon, derive_seed(walker_seed(config.seed, 0), 1), 0, &log);
    std::ostringstream lines;
    lines << ctx.header().dump() << '\n';
    write_jump_log(lines, log);
    ctx.add_text(ctx.stem() + "_jumps.jsonl", lines.str());
  }
  ctx.add_json("", body);
}

void run_spectral(Context& ctx) {
  const BondField xi = configured_environment(ctx);
  const auto v = configured_direction(ctx, xi.geometry().dimension());
  const SpectralMeasure measure = spectral_measure(xi, v);
  const auto moments = ctx.doc()["spectral"]["moments"].get<std::vector<double>>();
  const auto mc_walkers = ctx.doc()["spectral"]["mc_walkers"].get<std::size_t>();
  json moment_rows = json::array();
  for (double n : moments) {
    json row{{"n", n}, {"exact", semigroup_moment(measure, n)}};
    if (mc_walkers > 0)
      row["monte_carlo"] = estimate_json(semigroup_moment_mc(xi, v, n, mc_walkers, derive_seed(ctx.seed, 0x6d63ULL), ctx.threads));
    moment_rows.push_back(row);
  }
  ctx.add_json("", json{{"direction", v},
                    {"spectral_measure", to_json(measure)},
                    {"diffusivity_via_spectrum", diffusivity_via_spectrum(measure, xi, v)},
                    {"effective_quadratic", effective_quadratic(xi, v, ctx.solver).quadratic},
                    {"moments", moment_rows}});
}

void run_surface_tension(Context& ctx) {
  const BondField xi = configured_environment(ctx);
  const auto v = configured_direction(ctx, xi.geometry().dimension());
  const json& dsc = ctx.doc()["descent"];
  const DescentOptions descent{dsc["gradient_tolerance"].get<double>(), dsc["max_steps"].get<std::size_t>()};
  const auto r = surface_tension(xi, v, ctx.solver, descent);
  ctx.add_json("", json{{"direction", v},
                    {"sigma", r.sigma},
                    {"quarter_form", r.quarter_form},
                    {"residual", r.residual},
                    {"descent_steps", r.steps}});
}

void run_resolvent(Context& ctx) {
  const BondField xi = configured_environment(ctx);
  const auto v = configured_direction(ctx, xi.geometry().dimension());
  const auto lambdas = ctx.doc()["resolvent"]["lambdas"].get<std::vector<double>>();
  const auto rows = resolvent_convergence(xi, v, lambdas, ctx.solver);
  std::ostringstream csv;
  csv << "lambda,discrepancy,iterations,config_hash,version\n";
  json table = json::array();
  for (const auto& r : rows) {
    csv << format_double(r.lambda) << ',' << format_double(r.discrepancy) << ',' << r.iterations << ',' << ctx.hash << ','
        << toolkit_version << '\n';
    table.push_back({{"lambda", r.lambda}, {"discrepancy", r.discrepancy}, {"iterations", r.iterations}});
  }
  ctx.add_text(ctx.stem() + ".csv", csv.str());
  ctx.add_json("", json{{"direction", v}, {"rows", table}});
}

const std::map<std::string, void (*)(Context&)>& handlers() {
  static const std::map<std::string, void (*)(Context&)> table{
      {"diffusivity", run_diffusivity}, {"converge", run_converge},   {"concentrate", run_concentrate},
      {"hamming", run_hamming},         {"walk", run_walk},           {"spectral", run_spectral},
      {"surface-tension", run_surface_tension}, {"resolvent", run_resolvent},
  };
  return table;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::convergence: return exit_convergence;
    case ErrorKind::guard: return exit_guard;
    default: return exit_config;
  }
}

int report_error(std::ostream& err, int code, const std::string& kind, const std::string& message, json extra = {}) {
  json j{{"error", kind}, {"message", message}, {"exit_code", code}, {"version", toolkit_version}};
  if (extra.is_object()) j.update(extra);
  err << j.dump() << '\n';
  return code;
}

}  // namespace

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) schema_error("override '" + assignment + "' must have the form key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &document;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) schema_error("override path '" + path + "' has an empty component");
    if (!node->is_object()) schema_error("override path '" + path + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig RunConfig::parse(const json& raw, const std::vector<std::string>& overrides) {
  json doc = raw;
  for (const auto& o : overrides) apply_override(doc, o);
  return RunConfig{validate_document(doc)};
}

RunConfig RunConfig::load(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) schema_error("cannot open configuration file '" + path.string() + "'");
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    schema_error("configuration is not valid JSON: " + std::string(e.what()));
  }
  return parse(raw, overrides);
}

std::string RunConfig::hash() const {
  std::ostringstream out;
  // Thread count and output location do not change any number.
  json numeric = document;
  numeric.erase("threads");
  numeric.erase("output");
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(numeric.dump());
  return out.str();
}

std::filesystem::path RunConfig::output_directory() const {
  const auto& o = document["output"];
  return std::filesystem::path(o["root"].get<std::string>()) / o["directory"].get<std::string>();
}

int RunConfig::threads() const { return resolve_threads(document["threads"].get<int>()); }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-volume effective diffusivity of random conductance walks"};
  std::string subcommand;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string names;
  for (const auto& [name, handler] : handlers()) names += (names.empty() ? "" : ", ") + name;
  app.add_option("subcommand", subcommand, "one of: " + names)->required();
  app.add_option("-c,--config", config_path, "JSON configuration file")->required();
  app.add_option("-s,--set", overrides, "override a configuration value, e.g. solver.tol=1e-8");
  app.set_version_flag("--version", toolkit_version);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    out << toolkit_version << '\n';
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    return report_error(err, exit_config, "config", e.what());
  }

  try {
    const auto handler = handlers().find(subcommand);
    if (handler == handlers().end()) schema_error("unknown subcommand '" + subcommand + "'; expected one of: " + names);
    const RunConfig config = RunConfig::load(config_path, overrides);

    SolverOptions solver;
    solver.tolerance = config.document["solver"]["tol"].get<double>();
    solver.max_iterations = config.document["solver"]["max_iterations"].get<std::size_t>();
    solver.jacobi = config.document["solver"]["jacobi"].get<bool>();
    Context ctx{config, subcommand, config.hash(), config.document["seed"].get<std::uint64_t>(), config.threads(), solver, {}};
    handler->second(ctx);

    const auto dir = config.output_directory();
    std::filesystem::create_directories(dir);
    json written = json::array();
    for (const auto& [name, content] : ctx.artifacts) {
      const auto path = dir / name;
      std::ofstream file(path, std::ios::binary | std::ios::trunc);
      file << content;
      if (!file) throw std::runtime_error("failed to write " + path.string());
      written.push_back(path.string());
    }
    out << json{{"status", "ok"}, {"config_hash", ctx.hash}, {"artifacts", written}}.dump() << '\n';
    return exit_ok;
  } catch (const ConvergenceError& e) {
    return report_error(err, exit_convergence, "convergence", e.what(),
                        {{"iterations", e.iterations()}, {"last_residual", e.last_residual()}});
  } catch (const Error& e) {
    return report_error(err, exit_code_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error(err, exit_failure, "internal", e.what());
  }
}

}  // namespace homog
