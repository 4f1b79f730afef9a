#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ymhk/errors.hpp"

namespace ymhk {

using SiteId = std::int32_t;

inline constexpr int kMaxDim = 4;
inline constexpr int kMinExtent = 4;

/// Flat periodic lattice T^n, n in 1..4, uniform spacing h.
///
/// Sites are indexed lexicographically with axis 0 fastest:
///   id = x0 + L0*(x1 + L1*(x2 + L2*x3)).
/// Neighbor lookups are table-driven; the table is built once at
/// construction and the object is immutable afterwards.
class Lattice {
 public:
  Lattice() = default;

  Lattice(std::vector<int> extents, double h) {
    const int n = static_cast<int>(extents.size());
    if (n < 1 || n > kMaxDim)
      throw ArgumentError("lattice dimension must be 1..4, got " +
                          std::to_string(n));
    if (!(h > 0.0)) throw ArgumentError("lattice spacing must be positive");
    std::int64_t ns = 1;
    for (int a = 0; a < n; ++a) {
      if (extents[a] < kMinExtent)
        throw ArgumentError("extent " + std::to_string(extents[a]) +
                            " on axis " + std::to_string(a) +
                            " is below the minimum of 4");
      ns *= extents[a];
    }
    n_ = n;
    h_ = h;
    nsites_ = ns;
    ext_.fill(1);
    for (int a = 0; a < n; ++a) ext_[a] = extents[a];
    cell_vol_ = 1.0;
    for (int a = 0; a < n; ++a) cell_vol_ *= h;
    build_neighbors();
  }

  int dim() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  std::int64_t sites() const noexcept { return nsites_; }
  /// h^n, the volume weight of one site.
  double cell_volume() const noexcept { return cell_vol_; }
  /// Total volume of the torus.
  double volume() const noexcept {
    return cell_vol_ * static_cast<double>(nsites_);
  }

  int extent(int axis) const {
    check_axis(axis);
    return ext_[axis];
  }
  std::vector<int> extents() const {
    return std::vector<int>(ext_.begin(), ext_.begin() + n_);
  }
  int min_extent() const noexcept {
    int m = ext_[0];
    for (int a = 1; a < n_; ++a) m = m < ext_[a] ? m : ext_[a];
    return m;
  }

  /// Periodic shift by one site along `axis`; dir is +1 or -1.
  SiteId shift(SiteId s, int axis, int dir) const {
    check_axis(axis);
    if (dir != 1 && dir != -1)
      throw ArgumentError("shift direction must be +1 or -1");
    return nbr_[(static_cast<std::int64_t>(s) * n_ + axis) * 2 +
                (dir > 0 ? 1 : 0)];
  }

  /// Unchecked fast path for hot loops; axis/dir must already be valid.
  SiteId shift_fast(SiteId s, int axis, int dir) const noexcept {
    return nbr_[(static_cast<std::int64_t>(s) * n_ + axis) * 2 +
                (dir > 0 ? 1 : 0)];
  }

  std::array<int, kMaxDim> coords(SiteId s) const {
    std::array<int, kMaxDim> c{};
    auto r = static_cast<std::int64_t>(s);
    for (int a = 0; a < n_; ++a) {
      c[a] = static_cast<int>(r % ext_[a]);
      r /= ext_[a];
    }
    return c;
  }

  SiteId site(const std::array<int, kMaxDim>& c) const {
    std::int64_t id = 0;
    for (int a = n_ - 1; a >= 0; --a) {
      int x = c[a] % ext_[a];
      if (x < 0) x += ext_[a];
      id = id * ext_[a] + x;
    }
    return static_cast<SiteId>(id);
  }

  /// Guard for periodic stencils: a footprint of `span` links along one axis
  /// touches span+1 consecutive sites, which must all be distinct.
  void require_span(int span) const {
    if (span + 1 > min_extent())
      throw LatticeTooSmall(
          "stencil spans " + std::to_string(span + 1) +
          " sites along one axis but the smallest extent is " +
          std::to_string(min_extent()));
  }

  bool same_shape(const Lattice& o) const noexcept {
    if (n_ != o.n_ || h_ != o.h_) return false;
    for (int a = 0; a < n_; ++a)
      if (ext_[a] != o.ext_[a]) return false;
    return true;
  }

 private:
  void check_axis(int axis) const {
    if (axis < 0 || axis >= n_)
      throw ArgumentError("axis " + std::to_string(axis) +
                          " out of range for dimension " + std::to_string(n_));
  }

  void build_neighbors() {
    nbr_.resize(static_cast<std::size_t>(nsites_) * n_ * 2);
    for (std::int64_t s = 0; s < nsites_; ++s) {
      auto c = coords(static_cast<SiteId>(s));
      for (int a = 0; a < n_; ++a) {
        auto cm = c;
        auto cp = c;
        cm[a] = (c[a] - 1 + ext_[a]) % ext_[a];
        cp[a] = (c[a] + 1) % ext_[a];
        nbr_[(s * n_ + a) * 2 + 0] = site(cm);
        nbr_[(s * n_ + a) * 2 + 1] = site(cp);
      }
    }
  }

  int n_ = 0;
  std::array<int, kMaxDim> ext_{};
  double h_ = 0.0;
  double cell_vol_ = 0.0;
  std::int64_t nsites_ = 0;
  std::vector<SiteId> nbr_;
};

}  // namespace ymhk
