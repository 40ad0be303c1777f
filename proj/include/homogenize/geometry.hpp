#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace homog {

/// The periodic lattice Z^d / 2N Z^d.
///
/// Sites are tuples in {0, ..., 2N-1}^d encoded mixed-radix with the first
/// coordinate fastest. Per-bond data is stored site-major with direction as
/// the fastest axis, i.e. at `site * d + i`. Neighbour tables are built once
/// and shared between copies.
class TorusGeometry {
 public:
  TorusGeometry(int dimension, int half_period);

  int dimension() const noexcept { return dimension_; }
  int half_period() const noexcept { return half_period_; }
  int side() const noexcept { return 2 * half_period_; }
  std::size_t volume() const noexcept { return volume_; }
  std::size_t bond_count() const noexcept { return volume_ * static_cast<std::size_t>(dimension_); }

  std::size_t site(std::span<const int> coords) const;
  std::vector<int> coords(std::size_t site) const;

  /// Representative of the site in the centred box {-N, ..., N-1}^d. Boxes of
  /// increasing N are nested in these coordinates.
  std::vector<int> centered_coords(std::size_t site) const;

  std::size_t forward(std::size_t site, int dir) const noexcept {
    return tables_->forward[site * static_cast<std::size_t>(dimension_) + static_cast<std::size_t>(dir)];
  }
  std::size_t backward(std::size_t site, int dir) const noexcept {
    return tables_->backward[site * static_cast<std::size_t>(dimension_) + static_cast<std::size_t>(dir)];
  }

  /// site + offset, coordinates reduced modulo 2N.
  std::size_t translate(std::size_t site, std::span<const int> offset) const;

  friend bool operator==(const TorusGeometry& a, const TorusGeometry& b) noexcept {
    return a.dimension_ == b.dimension_ && a.half_period_ == b.half_period_;
  }

 private:
  struct NeighbourTables {
    std::vector<std::uint32_t> forward;
    std::vector<std::uint32_t> backward;
  };

  int dimension_;
  int half_period_;
  std::size_t volume_;
  std::shared_ptr<const NeighbourTables> tables_;
};

/// Throws a dimension error unless both geometries agree.
void require_same_geometry(const TorusGeometry& a, const TorusGeometry& b, const char* what);

}  // namespace homog
