#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kbte/geometry.hpp"
#include "kbte/types.hpp"

namespace kbte {

/// A point on the boundary used to evaluate the diffuse closure.
struct BoundaryStation {
  Vec3 x = Vec3::Zero();
  Vec3 n = Vec3::UnitX();
  /// Share of the boundary area represented by this station.
  double area = 0.0;
};

/// Cell-centred Cartesian nodes of the bounding cube of a domain, keeping
/// only nodes with xi < 0. Nodes are stored in lexicographic lattice order.
class SpatialGrid {
 public:
  SpatialGrid(const LevelSetDomain& domain, int points_per_axis);

  int points_per_axis() const { return n_; }
  double spacing() const { return h_; }
  double weight() const { return h_ * h_ * h_; }
  std::size_t size() const { return nodes_.size(); }
  const Vec3& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  int lookup(int i, int j, int k) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_ || k < 0 || k >= n_) return -1;
    return lookup_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k];
  }
  const std::array<int, 3>& coords(std::size_t i) const { return coords_[i]; }

  /// Trilinear stencil restricted to interior nodes, weights renormalized to
  /// sum to 1. Falls back to the nearest interior node when no corner is
  /// interior. Returns the number of entries.
  int stencil(const Vec3& p, std::array<int, 8>& idx, std::array<double, 8>& w) const;
  /// Tricubic Lagrange stencil; returns 0 unless all 64 nodes are interior.
  int cubic_stencil(const Vec3& p, std::array<int, 64>& idx, std::array<double, 64>& w) const;
  std::size_t nearest(const Vec3& p) const;

  /// Boundary projections of interior nodes that have an exterior neighbour.
  const std::vector<BoundaryStation>& stations() const { return stations_; }
  std::size_t nearest_station(const Vec3& p) const;
  /// Volume of the interior cells, sum of node weights.
  double volume() const { return weight() * static_cast<double>(size()); }

 private:
  Vec3 center_shift_ = Vec3::Zero();
  int n_;
  double h_;
  std::vector<int> lookup_;
  std::vector<Vec3> nodes_;
  std::vector<std::array<int, 3>> coords_;
  std::vector<BoundaryStation> stations_;
};

}  // namespace kbte
