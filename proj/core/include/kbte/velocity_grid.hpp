#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kbte/types.hpp"

namespace kbte {

enum class VelocityTruncation {
  /// Keep lattice nodes with |v| <= R.
  Ball,
  /// Keep the full cube [-R, R]^3.
  Cube,
};

/// Cell-centred uniform lattice on [-R, R]^3 with midpoint weights h^3,
/// optionally truncated to the ball |v| <= R. Nodes are stored in
/// lexicographic lattice order, so v -> -v maps node a to size()-1-a.
class VelocityGrid {
 public:
  VelocityGrid(double cutoff, int points_per_axis,
               VelocityTruncation truncation = VelocityTruncation::Ball);

  double cutoff() const { return cutoff_; }
  int points_per_axis() const { return n_; }
  double spacing() const { return h_; }
  double weight() const { return weight_; }
  std::size_t size() const { return nodes_.size(); }

  const Vec3& node(std::size_t a) const { return nodes_[a]; }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& sqrt_mu() const { return sqrt_mu_; }

  VelocityTruncation truncation() const { return truncation_; }

  /// Node index of lattice point (i,j,k), or -1 if it is not an active node.
  int lookup(int i, int j, int k) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_ || k < 0 || k >= n_) return -1;
    return lookup_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k];
  }
  std::size_t index(int i, int j, int k) const { return static_cast<std::size_t>(lookup(i, j, k)); }
  const std::array<int, 3>& coords(std::size_t a) const { return coords_[a]; }
  bool in_range(int i, int j, int k) const { return lookup(i, j, k) >= 0; }
  /// Node a' with v_{a'} = -v_a.
  std::size_t mirror(std::size_t a) const { return size() - 1 - a; }

  /// Trilinear stencil of an arbitrary velocity. Nodes outside the grid act as
  /// a ring of zero-valued ghosts, so only in-range corners are returned.
  /// Returns the number of corners written (0 beyond the ghost ring).
  int stencil(const Vec3& p, std::array<int, 8>& idx, std::array<double, 8>& w) const;

  double integrate(const std::vector<double>& f) const;

 private:
  double cutoff_;
  int n_;
  VelocityTruncation truncation_;
  std::vector<int> lookup_;
  std::vector<std::array<int, 3>> coords_;
  double h_;
  double weight_;
  std::vector<Vec3> nodes_;
  std::vector<double> mu_;
  std::vector<double> sqrt_mu_;
};

}  // namespace kbte
