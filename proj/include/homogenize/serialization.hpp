#pragma once

#include <string>

#include "json.hpp"

#include "homogenize/diffusivity.hpp"
#include "homogenize/environment.hpp"
#include "homogenize/experiments.hpp"
#include "homogenize/fields.hpp"
#include "homogenize/solver.hpp"
#include "homogenize/spectral.hpp"

namespace homog {

using nlohmann::json;

json to_json(const DisorderLaw& law);
DisorderLaw law_from_json(const json& j);

/// {dimension, half_period, ellipticity, law?, seed?, rates?}. Rates are
/// written in site-major order and round-trip exactly.
json to_json(const BondField& field, bool include_rates = true);
/// Uses explicit rates when present, otherwise samples from (law, seed).
BondField environment_from_json(const json& j);

json to_json(const ScalarField& f);
json to_json(const VectorField& f);
ScalarField scalar_field_from_json(const json& j);

json to_json(const SolveReport& report);
json to_json(const IdentityDiagnostics& diagnostics);
json to_json(const EffectiveMatrix& matrix);
json to_json(const SpectralMeasure& measure);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace homog
