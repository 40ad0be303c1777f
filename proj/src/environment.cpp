#include "homogenize/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "homogenize/errors.hpp"
#include "homogenize/rng.hpp"

namespace homog {

namespace {

constexpr double support_slack = 1e-12;

bool within_ellipticity(double x, double c) {
  return x >= (1.0 / c) * (1.0 - support_slack) && x <= c * (1.0 + support_slack);
}

std::uint64_t bond_key(std::uint64_t seed, std::span<const int> lattice_coords, int dir) {
  std::uint64_t h = mix64(seed);
  for (int x : lattice_coords) h = derive_seed(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(x)));
  return mix64(derive_seed(h, static_cast<std::uint64_t>(dir)));
}

}  // namespace

const char* to_string(DisorderLaw::Kind kind) {
  switch (kind) {
    case DisorderLaw::Kind::constant: return "constant";
    case DisorderLaw::Kind::uniform: return "uniform";
    case DisorderLaw::Kind::two_point: return "two_point";
    case DisorderLaw::Kind::discrete: return "discrete";
  }
  return "unknown";
}

DisorderLaw::DisorderLaw(Kind kind, std::vector<double> values, std::vector<double> probs,
                         std::optional<double> ellipticity)
    : kind_(kind), values_(std::move(values)), probs_(std::move(probs)), ellipticity_(1.0) {
  if (values_.empty()) throw Error(ErrorKind::config, "law has empty support");
  for (double x : values_)
    if (!std::isfinite(x) || x <= 0.0) throw Error(ErrorKind::config, "law support must be positive and finite");
  if (kind_ == Kind::uniform && !(values_[0] <= values_[1]))
    throw Error(ErrorKind::config, "uniform law needs a <= b");
  if (kind_ == Kind::two_point || kind_ == Kind::discrete) {
    if (probs_.size() != values_.size()) throw Error(ErrorKind::config, "law values and probabilities differ in length");
    for (double p : probs_)
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw Error(ErrorKind::config, "law probabilities must lie in [0, 1]");
    const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::config, "law probabilities must sum to 1");
  }

  const double lo = support_min();
  const double hi = support_max();
  const double minimal_c = std::max({1.0, hi, 1.0 / lo});
  if (ellipticity) {
    if (!std::isfinite(*ellipticity) || *ellipticity < 1.0)
      throw Error(ErrorKind::config, "ellipticity must be finite and >= 1");
    ellipticity_ = *ellipticity;
  } else {
    ellipticity_ = minimal_c;
  }
  if (!within_ellipticity(lo, ellipticity_) || !within_ellipticity(hi, ellipticity_)) {
    std::ostringstream msg;
    msg << "law support [" << lo << ", " << hi << "] outside ellipticity interval [" << 1.0 / ellipticity_ << ", "
        << ellipticity_ << "]";
    throw Error(ErrorKind::config, msg.str());
  }
}

DisorderLaw DisorderLaw::constant(double a, std::optional<double> ellipticity) {
  return DisorderLaw(Kind::constant, {a}, {1.0}, ellipticity);
}

DisorderLaw DisorderLaw::uniform(double a, double b, std::optional<double> ellipticity) {
  return DisorderLaw(Kind::uniform, {a, b}, {}, ellipticity);
}

DisorderLaw DisorderLaw::two_point(double a, double b, double p, std::optional<double> ellipticity) {
  return DisorderLaw(Kind::two_point, {a, b}, {p, 1.0 - p}, ellipticity);
}

DisorderLaw DisorderLaw::discrete(std::vector<double> values, std::vector<double> probs,
                                  std::optional<double> ellipticity) {
  return DisorderLaw(Kind::discrete, std::move(values), std::move(probs), ellipticity);
}

double DisorderLaw::support_min() const { return *std::min_element(values_.begin(), values_.end()); }
double DisorderLaw::support_max() const { return *std::max_element(values_.begin(), values_.end()); }

double DisorderLaw::sample(double u) const {
  switch (kind_) {
    case Kind::constant: return values_[0];
    case Kind::uniform: return values_[0] + (values_[1] - values_[0]) * u;
    case Kind::two_point: return u < probs_[0] ? values_[0] : values_[1];
    case Kind::discrete: {
      double cumulative = 0.0;
      for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
        cumulative += probs_[k];
        if (u < cumulative) return values_[k];
      }
      return values_.back();
    }
  }
  return values_[0];
}

double DisorderLaw::mean() const {
  switch (kind_) {
    case Kind::constant: return values_[0];
    case Kind::uniform: return 0.5 * (values_[0] + values_[1]);
    default: return std::inner_product(values_.begin(), values_.end(), probs_.begin(), 0.0);
  }
}

double DisorderLaw::mean_inverse() const {
  switch (kind_) {
    case Kind::constant: return 1.0 / values_[0];
    case Kind::uniform: {
      const double a = values_[0], b = values_[1];
      return a == b ? 1.0 / a : std::log(b / a) / (b - a);
    }
    default: {
      double s = 0.0;
      for (std::size_t k = 0; k < values_.size(); ++k) s += probs_[k] / values_[k];
      return s;
    }
  }
}

std::string DisorderLaw::name() const {
  std::ostringstream out;
  out.precision(17);
  out << to_string(kind_) << '(';
  for (std::size_t k = 0; k < values_.size(); ++k) out << (k ? ";" : "") << values_[k];
  if (kind_ == Kind::two_point) out << ";p=" << probs_[0];
  if (kind_ == Kind::discrete) {
    out << ";p=";
    for (std::size_t k = 0; k < probs_.size(); ++k) out << (k ? ";" : "") << probs_[k];
  }
  out << ')';
  return out.str();
}

BondField::BondField(const TorusGeometry& geometry, double ellipticity, std::vector<double> rates,
                     std::optional<EnvironmentOrigin> origin)
    : geometry_(geometry), ellipticity_(ellipticity), rates_(std::move(rates)), origin_(std::move(origin)) {
  if (!std::isfinite(ellipticity_) || ellipticity_ < 1.0)
    throw Error(ErrorKind::config, "ellipticity must be finite and >= 1");
  if (rates_.size() != geometry_.bond_count())
    throw Error(ErrorKind::dimension, "rate array must hold d * (2N)^d entries");
  for (double r : rates_)
    if (!std::isfinite(r) || !within_ellipticity(r, ellipticity_))
      throw Error(ErrorKind::config, "bond rate outside the ellipticity interval");
}

BondField sample_environment(const DisorderLaw& law, const TorusGeometry& geometry, std::uint64_t seed) {
  const int d = geometry.dimension();
  std::vector<double> rates(geometry.bond_count());
  for (std::size_t s = 0; s < geometry.volume(); ++s) {
    const auto x = geometry.centered_coords(s);
    for (int i = 0; i < d; ++i)
      rates[s * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = law.sample(to_unit(bond_key(seed, x, i)));
  }
  return BondField(geometry, law.ellipticity(), std::move(rates), EnvironmentOrigin{law, seed});
}

BondField shift(const BondField& field, std::span<const int> offset) {
  const auto& g = field.geometry();
  if (offset.size() != static_cast<std::size_t>(g.dimension()))
    throw Error(ErrorKind::dimension, "shift offset has wrong length");
  std::vector<int> back(offset.begin(), offset.end());
  for (auto& x : back) x = -x;
  const auto d = static_cast<std::size_t>(g.dimension());
  std::vector<double> rates(g.bond_count());
  for (std::size_t s = 0; s < g.volume(); ++s) {
    const std::size_t src = g.translate(s, back);
    for (std::size_t i = 0; i < d; ++i) rates[s * d + i] = field.rates()[src * d + i];
  }
  return BondField(g, field.ellipticity(), std::move(rates));
}

std::size_t hamming_distance(const BondField& a, const BondField& b) {
  require_same_geometry(a.geometry(), b.geometry(), "hamming_distance");
  std::size_t count = 0;
  for (std::size_t k = 0; k < a.rates().size(); ++k) count += a.rates()[k] != b.rates()[k];
  return count;
}

BondField resample_bonds(const BondField& field, std::span<const Bond> bonds, const DisorderLaw& law,
                         std::uint64_t seed) {
  const auto& g = field.geometry();
  const auto d = static_cast<std::size_t>(g.dimension());
  std::vector<double> rates(field.rates().begin(), field.rates().end());
  for (const auto& b : bonds) {
    if (b.site >= g.volume() || b.dir < 0 || b.dir >= g.dimension())
      throw Error(ErrorKind::domain, "invalid bond index");
    const std::uint64_t key = derive_seed(seed, {b.site, static_cast<std::uint64_t>(b.dir)});
    rates[b.site * d + static_cast<std::size_t>(b.dir)] = law.sample(to_unit(mix64(key)));
  }
  return BondField(g, field.ellipticity(), std::move(rates));
}

}  // namespace homog
