#include "kbte/moments.hpp"

#include <cmath>
#include <numbers>

namespace kbte {

Polynomial Polynomial::constant(double c) { return monomial({0, 0, 0}, c); }

Polynomial Polynomial::monomial(Monomial exps, double c) {
  Polynomial p;
  if (c != 0.0) p.terms_[exps] = c;
  return p;
}

Polynomial Polynomial::speed_squared() {
  return monomial({2, 0, 0}) + monomial({0, 2, 0}) + monomial({0, 0, 2});
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial out = *this;
  for (const auto& [m, c] : o.terms_) out.terms_[m] += c;
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial out;
  for (const auto& [m1, c1] : terms_) {
    for (const auto& [m2, c2] : o.terms_) {
      out.terms_[{m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]}] += c1 * c2;
    }
  }
  return out;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial out = *this;
  for (auto& [m, c] : out.terms_) c *= s;
  return out;
}

namespace {

/// int x^k exp(-x^2/2) dx.
double moment_1d(int k) {
  if (k % 2 != 0) return 0.0;
  double value = std::sqrt(2.0 * std::numbers::pi);
  for (int m = k - 1; m > 0; m -= 2) value *= m;
  return value;
}

}  // namespace

double gaussian_moment(const Polynomial& p) {
  double sum = 0.0;
  for (const auto& [m, c] : p.terms()) {
    sum += c * moment_1d(m[0]) * moment_1d(m[1]) * moment_1d(m[2]);
  }
  return sum;
}

double gaussian_moment(std::array<int, 3> exps, int radial_power) {
  Polynomial p = Polynomial::monomial(exps);
  for (int k = 0; k < radial_power; ++k) p = p * Polynomial::speed_squared();
  return gaussian_moment(p);
}

GaussianMomentConstants gaussian_moment_constants() {
  const Polynomial v1sq = Polynomial::monomial({2, 0, 0});
  const Polynomial s = Polynomial::speed_squared();
  GaussianMomentConstants out{};
  out.beta_c = gaussian_moment(s * v1sq) / gaussian_moment(v1sq);
  out.beta_b = gaussian_moment(v1sq) / gaussian_moment(Polynomial::constant(1.0));
  const Polynomial integrand =
      (s - Polynomial::constant(out.beta_c)) * v1sq * (s - Polynomial::constant(3.0)) *
      (1.0 / std::sqrt(6.0));
  out.A = gaussian_moment(integrand);
  return out;
}

}  // namespace kbte
