#include "homogenize/geometry.hpp"

#include <limits>
#include <string>

#include "homogenize/errors.hpp"

namespace homog {

TorusGeometry::TorusGeometry(int dimension, int half_period)
    : dimension_(dimension), half_period_(half_period), volume_(1) {
  if (dimension < 1) throw Error(ErrorKind::config, "dimension must be >= 1");
  if (half_period < 1) throw Error(ErrorKind::config, "half_period must be >= 1");
  const auto side = static_cast<std::size_t>(2 * half_period);
  for (int k = 0; k < dimension; ++k) {
    if (volume_ > std::numeric_limits<std::uint32_t>::max() / side / static_cast<std::size_t>(dimension))
      throw Error(ErrorKind::guard, "torus volume too large");
    volume_ *= side;
  }

  auto tables = std::make_shared<NeighbourTables>();
  const auto d = static_cast<std::size_t>(dimension);
  tables->forward.resize(volume_ * d);
  tables->backward.resize(volume_ * d);
  std::size_t stride = 1;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t s = 0; s < volume_; ++s) {
      const std::size_t c = (s / stride) % side;
      const std::size_t fwd = c + 1 == side ? s - c * stride : s + stride;
      const std::size_t bwd = c == 0 ? s + (side - 1) * stride : s - stride;
      tables->forward[s * d + i] = static_cast<std::uint32_t>(fwd);
      tables->backward[s * d + i] = static_cast<std::uint32_t>(bwd);
    }
    stride *= side;
  }
  tables_ = std::move(tables);
}

std::size_t TorusGeometry::site(std::span<const int> coords) const {
  if (coords.size() != static_cast<std::size_t>(dimension_))
    throw Error(ErrorKind::dimension, "site coordinates have wrong length");
  const int n = side();
  std::size_t index = 0;
  std::size_t stride = 1;
  for (int c : coords) {
    const int r = ((c % n) + n) % n;
    index += static_cast<std::size_t>(r) * stride;
    stride *= static_cast<std::size_t>(n);
  }
  return index;
}

std::vector<int> TorusGeometry::coords(std::size_t site) const {
  if (site >= volume_) throw Error(ErrorKind::domain, "site index " + std::to_string(site) + " out of range");
  std::vector<int> c(static_cast<std::size_t>(dimension_));
  const auto n = static_cast<std::size_t>(side());
  for (auto& x : c) {
    x = static_cast<int>(site % n);
    site /= n;
  }
  return c;
}

std::vector<int> TorusGeometry::centered_coords(std::size_t site) const {
  auto c = coords(site);
  for (auto& x : c)
    if (x >= half_period_) x -= side();
  return c;
}

std::size_t TorusGeometry::translate(std::size_t site, std::span<const int> offset) const {
  auto c = coords(site);
  if (offset.size() != c.size()) throw Error(ErrorKind::dimension, "offset has wrong length");
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += offset[i] % side();
  return this->site(c);
}

void require_same_geometry(const TorusGeometry& a, const TorusGeometry& b, const char* what) {
  if (!(a == b))
    throw Error(ErrorKind::dimension, std::string(what) + ": geometry mismatch (d=" + std::to_string(a.dimension()) +
                                          ",N=" + std::to_string(a.half_period()) + " vs d=" +
                                          std::to_string(b.dimension()) + ",N=" + std::to_string(b.half_period()) + ")");
}

}  // namespace homog
