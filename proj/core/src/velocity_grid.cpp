#include "kbte/velocity_grid.hpp"

#include <cmath>

#include "kbte/errors.hpp"
#include "kbte/fields.hpp"

namespace kbte {

VelocityGrid::VelocityGrid(double cutoff, int points_per_axis, VelocityTruncation truncation)
    : cutoff_(cutoff), n_(points_per_axis), truncation_(truncation) {
  if (!(cutoff > 0.0)) throw ValidationError("velocity cutoff must be positive");
  if (points_per_axis < 2 || points_per_axis % 2 != 0) {
    throw ValidationError("velocity points per axis must be even and at least 2");
  }
  h_ = 2.0 * cutoff / n_;
  weight_ = h_ * h_ * h_;
  lookup_.assign(static_cast<std::size_t>(n_) * n_ * n_, -1);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      for (int k = 0; k < n_; ++k) {
        const Vec3 v(-cutoff + (i + 0.5) * h_, -cutoff + (j + 0.5) * h_,
                     -cutoff + (k + 0.5) * h_);
        if (truncation == VelocityTruncation::Ball && v.norm() > cutoff) continue;
        lookup_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k] =
            static_cast<int>(nodes_.size());
        nodes_.push_back(v);
        coords_.push_back({i, j, k});
      }
    }
  }
  const std::size_t total = nodes_.size();
  mu_.resize(total);
  sqrt_mu_.resize(total);
  for (std::size_t a = 0; a < total; ++a) {
    mu_[a] = global_maxwellian(nodes_[a]);
    sqrt_mu_[a] = std::sqrt(mu_[a]);
  }
}

int VelocityGrid::stencil(const Vec3& p, std::array<int, 8>& idx,
                          std::array<double, 8>& w) const {
  int base[3];
  double frac[3];
  for (int d = 0; d < 3; ++d) {
    const double s = (p[d] + cutoff_) / h_ - 0.5;
    const double f = std::floor(s);
    if (f < -1.0 || f > n_ - 1.0) return 0;
    base[d] = static_cast<int>(f);
    frac[d] = s - f;
  }
  int count = 0;
  for (int c = 0; c < 8; ++c) {
    const int i = base[0] + ((c >> 2) & 1);
    const int j = base[1] + ((c >> 1) & 1);
    const int k = base[2] + (c & 1);
    const int node = lookup(i, j, k);
    if (node < 0) continue;
    const double wi = (c & 4) ? frac[0] : 1.0 - frac[0];
    const double wj = (c & 2) ? frac[1] : 1.0 - frac[1];
    const double wk = (c & 1) ? frac[2] : 1.0 - frac[2];
    idx[count] = node;
    w[count] = wi * wj * wk;
    ++count;
  }
  return count;
}

double VelocityGrid::integrate(const std::vector<double>& f) const {
  double sum = 0.0;
  for (double x : f) sum += x;
  return sum * weight_;
}

}  // namespace kbte
