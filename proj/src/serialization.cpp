#include "homogenize/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "homogenize/errors.hpp"

namespace homog {

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw Error(ErrorKind::config, std::string(where) + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!keys.contains(item.key())) throw Error(ErrorKind::config, std::string("unknown key '") + item.key() + "' in " + where);
}

template <typename T>
T required(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw Error(ErrorKind::config, std::string("missing key '") + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::config, std::string("key '") + key + "' in " + where + " has the wrong type");
  }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, result.ptr);
}

json to_json(const DisorderLaw& law) {
  json j{{"kind", to_string(law.kind())}, {"ellipticity", law.ellipticity()}};
  const auto& v = law.values();
  switch (law.kind()) {
    case DisorderLaw::Kind::constant: j["a"] = v[0]; break;
    case DisorderLaw::Kind::uniform:
      j["a"] = v[0];
      j["b"] = v[1];
      break;
    case DisorderLaw::Kind::two_point:
      j["a"] = v[0];
      j["b"] = v[1];
      j["p"] = law.probabilities()[0];
      break;
    case DisorderLaw::Kind::discrete:
      j["values"] = v;
      j["probs"] = law.probabilities();
      break;
  }
  return j;
}

DisorderLaw law_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::config, "law must be a JSON object");
  const auto kind = required<std::string>(j, "kind", "law");
  std::optional<double> c;
  if (j.contains("ellipticity")) c = required<double>(j, "ellipticity", "law");
  if (kind == "constant") {
    reject_unknown_keys(j, {"kind", "ellipticity", "a"}, "law");
    return DisorderLaw::constant(required<double>(j, "a", "law"), c);
  }
  if (kind == "uniform") {
    reject_unknown_keys(j, {"kind", "ellipticity", "a", "b"}, "law");
    return DisorderLaw::uniform(required<double>(j, "a", "law"), required<double>(j, "b", "law"), c);
  }
  if (kind == "two_point") {
    reject_unknown_keys(j, {"kind", "ellipticity", "a", "b", "p"}, "law");
    return DisorderLaw::two_point(required<double>(j, "a", "law"), required<double>(j, "b", "law"),
                                  required<double>(j, "p", "law"), c);
  }
  if (kind == "discrete") {
    reject_unknown_keys(j, {"kind", "ellipticity", "values", "probs"}, "law");
    return DisorderLaw::discrete(required<std::vector<double>>(j, "values", "law"),
                                 required<std::vector<double>>(j, "probs", "law"), c);
  }
  throw Error(ErrorKind::config, "unknown law kind '" + kind + "'");
}

json to_json(const BondField& field, bool include_rates) {
  json j{{"dimension", field.geometry().dimension()},
         {"half_period", field.geometry().half_period()},
         {"ellipticity", field.ellipticity()}};
  if (field.origin()) {
    j["law"] = to_json(field.origin()->law);
    j["seed"] = field.origin()->seed;
  }
  if (include_rates || !field.origin()) j["rates"] = std::vector<double>(field.rates().begin(), field.rates().end());
  return j;
}

BondField environment_from_json(const json& j) {
  reject_unknown_keys(j, {"dimension", "half_period", "ellipticity", "law", "seed", "rates"}, "environment");
  const TorusGeometry geometry(required<int>(j, "dimension", "environment"), required<int>(j, "half_period", "environment"));
  std::optional<DisorderLaw> law;
  if (j.contains("law")) law = law_from_json(j.at("law"));
  if (j.contains("rates")) {
    auto rates = required<std::vector<double>>(j, "rates", "environment");
    double c = 1.0;
    if (j.contains("ellipticity")) {
      c = required<double>(j, "ellipticity", "environment");
    } else if (law) {
      c = law->ellipticity();
    } else if (!rates.empty()) {
      const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
      c = std::max({1.0, *hi, 1.0 / *lo});
    }
    std::optional<EnvironmentOrigin> origin;
    if (law && j.contains("seed")) origin = EnvironmentOrigin{*law, required<std::uint64_t>(j, "seed", "environment")};
    return BondField(geometry, c, std::move(rates), std::move(origin));
  }
  if (!law) throw Error(ErrorKind::config, "environment needs either explicit rates or a law");
  const auto seed = required<std::uint64_t>(j, "seed", "environment");
  if (j.contains("ellipticity")) {
    const double c = required<double>(j, "ellipticity", "environment");
    if (c != law->ellipticity()) {
      auto widened = law_from_json([&] {
        json l = to_json(*law);
        l["ellipticity"] = c;
        return l;
      }());
      return sample_environment(widened, geometry, seed);
    }
  }
  return sample_environment(*law, geometry, seed);
}

json to_json(const ScalarField& f) {
  return {{"dimension", f.geometry.dimension()}, {"half_period", f.geometry.half_period()}, {"values", f.values}};
}

json to_json(const VectorField& f) {
  return {{"dimension", f.geometry.dimension()}, {"half_period", f.geometry.half_period()}, {"values", f.values}};
}

ScalarField scalar_field_from_json(const json& j) {
  reject_unknown_keys(j, {"dimension", "half_period", "values"}, "scalar field");
  const TorusGeometry g(required<int>(j, "dimension", "scalar field"), required<int>(j, "half_period", "scalar field"));
  return ScalarField(g, required<std::vector<double>>(j, "values", "scalar field"));
}

json to_json(const SolveReport& report) {
  return {{"iterations", report.iterations},
          {"residual_norm", report.residual_norm},
          {"tolerance", report.tolerance_used}};
}

json to_json(const IdentityDiagnostics& d) {
  json lp = json::object();
  for (const auto& [p, value] : d.lp_norms) lp[format_double(p)] = value;
  return {{"orthogonality_residual", d.orthogonality_residual},
          {"curl_residual", d.curl_residual},
          {"flux_divergence_residual", d.flux_divergence_residual},
          {"l2_bound_margin", d.l2_bound_margin},
          {"quadratic_linear_gap", d.quadratic_linear_gap},
          {"lp_norms", lp}};
}

json to_json(const EffectiveMatrix& m) {
  json columns = json::array();
  for (const auto& d : m.column_diagnostics) columns.push_back(to_json(d));
  return {{"dimension", m.geometry.dimension()},
          {"half_period", m.geometry.half_period()},
          {"entries", matrix_to_json(m.entries)},
          {"linear_form_entries", matrix_to_json(m.linear_form_entries)},
          {"energy_form_entries", matrix_to_json(m.energy_form_entries)},
          {"asymmetry", m.asymmetry},
          {"iterations", m.iterations},
          {"column_diagnostics", columns}};
}

json to_json(const SpectralMeasure& measure) {
  json atoms = json::array();
  for (const auto& a : measure.atoms)
    atoms.push_back({{"eigenvalue", a.eigenvalue}, {"weight", a.weight}, {"kernel", a.kernel}});
  return {{"atoms", atoms},
          {"total_mass", measure.total_mass},
          {"kernel_weight", measure.kernel_weight},
          {"max_eigenvalue", measure.max_eigenvalue}};
}

}  // namespace homog
