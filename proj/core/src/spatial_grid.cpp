#include "kbte/spatial_grid.hpp"

#include <cmath>
#include <limits>

#include "kbte/errors.hpp"

namespace kbte {

SpatialGrid::SpatialGrid(const LevelSetDomain& domain, int points_per_axis)
    : n_(points_per_axis) {
  if (points_per_axis < 2) throw ValidationError("spatial points per axis must be at least 2");
  const double r = domain.bounding_radius();
  const Vec3& c = domain.center();
  h_ = 2.0 * r / n_;
  center_shift_ = c - Vec3::Constant(r);
  lookup_.assign(static_cast<std::size_t>(n_) * n_ * n_, -1);
  auto position = [&](int i, int j, int k) {
    return Vec3(center_shift_.x() + (i + 0.5) * h_, center_shift_.y() + (j + 0.5) * h_,
                center_shift_.z() + (k + 0.5) * h_);
  };
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        const Vec3 x = position(i, j, k);
        if (!domain.contains(x)) continue;
        lookup_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k] = static_cast<int>(nodes_.size());
        nodes_.push_back(x);
        coords_.push_back({i, j, k});
      }
  if (nodes_.empty()) throw ValidationError("spatial grid has no interior nodes");

  for (std::size_t a = 0; a < nodes_.size(); ++a) {
    const auto& ijk = coords_[a];
    bool edge = false;
    for (int d = 0; d < 27 && !edge; ++d) {
      if (d == 13) continue;
      edge = lookup(ijk[0] + d / 9 - 1, ijk[1] + (d / 3) % 3 - 1, ijk[2] + d % 3 - 1) < 0;
    }
    if (!edge) continue;
    BoundaryStation s;
    s.x = project_to_boundary(domain, nodes_[a]);
    s.n = outward_normal(domain, s.x);
    stations_.push_back(s);
  }
  // Equal-area split of the surface estimated from int_{dOmega} x.n = 3 |Omega|.
  double support = 0.0;
  for (const auto& s : stations_) support += (s.x - c).dot(s.n);
  const double vol = volume();
  for (auto& s : stations_) s.area = 3.0 * vol / support;
}

int SpatialGrid::stencil(const Vec3& p, std::array<int, 8>& idx, std::array<double, 8>& w) const {
  int base[3];
  double frac[3];
  for (int d = 0; d < 3; ++d) {
    const double s = (p[d] - center_shift_[d]) / h_ - 0.5;
    const double f = std::floor(s);
    base[d] = static_cast<int>(f);
    frac[d] = s - f;
  }
  int count = 0;
  double total = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int node = lookup(base[0] + ((c >> 2) & 1), base[1] + ((c >> 1) & 1), base[2] + (c & 1));
    if (node < 0) continue;
    const double wc = ((c & 4) ? frac[0] : 1.0 - frac[0]) * ((c & 2) ? frac[1] : 1.0 - frac[1]) *
                      ((c & 1) ? frac[2] : 1.0 - frac[2]);
    if (wc <= 0.0) continue;
    idx[count] = node;
    w[count] = wc;
    total += wc;
    ++count;
  }
  if (count == 0) {
    idx[0] = static_cast<int>(nearest(p));
    w[0] = 1.0;
    return 1;
  }
  for (int k = 0; k < count; ++k) w[k] /= total;
  return count;
}

int SpatialGrid::cubic_stencil(const Vec3& p, std::array<int, 64>& idx,
                               std::array<double, 64>& w) const {
  int base[3];
  double lw[3][4];
  for (int d = 0; d < 3; ++d) {
    const double s = (p[d] - center_shift_[d]) / h_ - 0.5;
    const double f = std::floor(s);
    base[d] = static_cast<int>(f) - 1;
    const double t = s - f;
    lw[d][0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    lw[d][1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    lw[d][2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    lw[d][3] = (t + 1.0) * t * (t - 1.0) / 6.0;
  }
  int count = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        const int node = lookup(base[0] + a, base[1] + b, base[2] + c);
        if (node < 0) return 0;
        idx[count] = node;
        w[count] = lw[0][a] * lw[1][b] * lw[2][c];
        ++count;
      }
  return count;
}

std::size_t SpatialGrid::nearest(const Vec3& p) const {
  std::size_t best = 0;
  double d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double d = (nodes_[i] - p).squaredNorm();
    if (d < d2) {
      d2 = d;
      best = i;
    }
  }
  return best;
}

std::size_t SpatialGrid::nearest_station(const Vec3& p) const {
  std::size_t best = 0;
  double d2 = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < stations_.size(); ++s) {
    const double d = (stations_[s].x - p).squaredNorm();
    if (d < d2) {
      d2 = d;
      best = s;
    }
  }
  return best;
}

}  // namespace kbte
