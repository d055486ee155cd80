#pragma once

#include <array>
#include <map>

namespace kbte {

/// Polynomial in (v1, v2, v3) with exact Gaussian integration.
class Polynomial {
 public:
  using Monomial = std::array<int, 3>;

  Polynomial() = default;
  static Polynomial constant(double c);
  static Polynomial monomial(Monomial exps, double c = 1.0);
  /// |v|^2.
  static Polynomial speed_squared();

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;

  const std::map<Monomial, double>& terms() const { return terms_; }

 private:
  std::map<Monomial, double> terms_;
};

/// int p(v) exp(-|v|^2/2) dv, exact (products of (k-1)!! sqrt(2 pi)).
double gaussian_moment(const Polynomial& p);

/// int v1^a v2^b v3^c |v|^{2 r} exp(-|v|^2/2) dv.
double gaussian_moment(std::array<int, 3> exps, int radial_power);

struct GaussianMomentConstants {
  double beta_c;
  double beta_b;
  double A;
};

/// beta_c from int (|v|^2 - beta_c) v_i^2 mu = 0, beta_b from int (v_i^2 - beta_b) mu = 0,
/// A = int (|v|^2 - beta_c) v_i^2 (|v|^2 - 3)/sqrt(6) mu.
GaussianMomentConstants gaussian_moment_constants();

}  // namespace kbte
