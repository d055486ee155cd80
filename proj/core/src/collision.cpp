#include "kbte/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kbte/errors.hpp"
#include "kbte/parallel.hpp"
#include "kbte/quadrature.hpp"

namespace kbte {

void KernelSpec::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
  if (polar_order < 1 || azimuth_order < 1) {
    throw ValidationError("sphere quadrature orders must be positive");
  }
  const double cb = bound();
  if (!(cb > 0.0)) throw ValidationError("angular bound C_b must be positive");
  for (int k = 0; k <= 2000; ++k) {
    const double c = -1.0 + k / 1000.0;
    const double value = b(c);
    if (!(value >= 0.0) || value > cb * std::abs(c) * (1.0 + 1e-12) + 1e-300) {
      throw ValidationError("angular kernel must satisfy 0 <= b(c) <= C_b |c|");
    }
  }
}

DirectionRule make_direction_rule(const KernelSpec& kernel) {
  const QuadratureRule polar = gauss_legendre(kernel.polar_order, 0.0, 1.0);
  const int na = kernel.azimuth_order;
  DirectionRule rule;
  for (int p = 0; p < kernel.polar_order; ++p) {
    const double c = polar.nodes[p];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double wc = (kernel.b(c) + kernel.b(-c)) * polar.weights[p];
    for (int q = 0; q < na; ++q) {
      const double phi = 2.0 * std::numbers::pi * (q + 0.5) / na;
      rule.cos_theta.push_back(c);
      rule.sin_theta.push_back(s);
      rule.cos_phi.push_back(std::cos(phi));
      rule.sin_phi.push_back(std::sin(phi));
      rule.weight.push_back(wc * 2.0 * std::numbers::pi / na);
    }
  }
  for (double w : rule.weight) rule.total += w;
  return rule;
}

void complete_frame(const Vec3& e, Vec3& e1, Vec3& e2) {
  const Vec3 a = std::abs(e.x()) < 0.6 ? Vec3::UnitX()
                 : std::abs(e.y()) < 0.6 ? Vec3::UnitY()
                                         : Vec3::UnitZ();
  e1 = (a - a.dot(e) * e).normalized();
  e2 = e.cross(e1);
}

namespace {

inline double relative_power(double norm, double gamma) {
  if (gamma == 0.0) return 1.0;
  if (gamma == 1.0) return norm;
  return std::pow(norm, gamma);
}

}  // namespace

CollisionModel::CollisionModel(VelocityGrid grid, KernelSpec kernel)
    : grid_(std::move(grid)), kernel_(std::move(kernel)) {
  kernel_.validate();
  dirs_ = make_direction_rule(kernel_);
  const std::size_t n = grid_.size();
  nu_.resize(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) nu_[a] = collision_frequency(grid_.node(a));
  });
  nu0_ = *std::min_element(nu_.begin(), nu_.end());
  const double max_speed = 2.0 * std::sqrt(3.0) * grid_.cutoff();
  nu_table_step_ = 0.02;
  const int entries = static_cast<int>(std::ceil(max_speed / nu_table_step_)) + 2;
  nu_table_.resize(entries);
  parallel_for(static_cast<std::size_t>(entries), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      nu_table_[k] = collision_frequency(Vec3(k * nu_table_step_, 0.0, 0.0));
    }
  });
}

double CollisionModel::collision_frequency(const Vec3& v) const {
  const auto& nodes = grid_.nodes();
  const auto& mu = grid_.mu();
  double sum = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    sum += relative_power((v - nodes[j]).norm(), kernel_.gamma) * mu[j];
  }
  return dirs_.total * grid_.weight() * sum;
}

double CollisionModel::nu_radial(double speed) const {
  const double s = speed / nu_table_step_;
  const std::size_t k = static_cast<std::size_t>(s);
  if (k + 1 >= nu_table_.size()) return nu_table_.back();
  const double t = s - k;
  return (1.0 - t) * nu_table_[k] + t * nu_table_[k + 1];
}

const Eigen::MatrixXd& CollisionModel::loss_matrix() const {
  if (loss_matrix_.size() == 0) {
    const std::size_t n = grid_.size();
    Eigen::MatrixXd m(n, n);
    const double scale = dirs_.total * grid_.weight();
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t a = 0; a < n; ++a) {
        m(a, b) = scale * relative_power((grid_.node(a) - grid_.node(b)).norm(), kernel_.gamma);
      }
    }
    loss_matrix_ = std::move(m);
  }
  return loss_matrix_;
}

void CollisionModel::gain_row(std::size_t a, const double* q1, const double* o1,
                              const double* q2, const double* o2, std::size_t nx, double* out,
                              std::vector<double>& scratch) const {
  scratch.assign(3 * nx, 0.0);
  double* acc = scratch.data();
  double* i1 = acc + nx;
  double* i2 = i1 + nx;
  const auto& nodes = grid_.nodes();
  const auto& mu = grid_.mu();
  const Vec3& va = nodes[a];
  std::array<int, 8> idx1, idx2;
  std::array<double, 8> w1, w2;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const Vec3 g = va - nodes[j];
    const double gn = g.norm();
    const double pref = grid_.weight() * mu[j] * relative_power(gn, kernel_.gamma);
    if (pref == 0.0) continue;
    const Vec3 e = gn > 0.0 ? Vec3(g / gn) : Vec3(Vec3::UnitX());
    Vec3 e1, e2;
    complete_frame(e, e1, e2);
    for (std::size_t d = 0; d < dirs_.size(); ++d) {
      const Vec3 omega = dirs_.cos_theta[d] * e +
                         dirs_.sin_theta[d] * (dirs_.cos_phi[d] * e1 + dirs_.sin_phi[d] * e2);
      const Vec3 kick = (gn * dirs_.cos_theta[d]) * omega;
      const int n1 = grid_.stencil(nodes[j] + kick, idx1, w1);
      const int n2 = grid_.stencil(va - kick, idx2, w2);
      const double coef = pref * dirs_.weight[d];
      for (std::size_t x = 0; x < nx; ++x) {
        i1[x] = o1[x];
        i2[x] = o2[x];
      }
      for (int k = 0; k < n1; ++k) {
        const double* src = q1 + static_cast<std::size_t>(idx1[k]) * nx;
        const double wk = w1[k];
        for (std::size_t x = 0; x < nx; ++x) i1[x] += wk * src[x];
      }
      for (int k = 0; k < n2; ++k) {
        const double* src = q2 + static_cast<std::size_t>(idx2[k]) * nx;
        const double wk = w2[k];
        for (std::size_t x = 0; x < nx; ++x) i2[x] += wk * src[x];
      }
      for (std::size_t x = 0; x < nx; ++x) acc[x] += coef * i1[x] * i2[x];
    }
  }
  for (std::size_t x = 0; x < nx; ++x) out[a * nx + x] = mu[a] * acc[x];
}

void CollisionModel::gain_batch(const double* q1, double o1, const double* q2, double o2,
                                std::size_t nx, double* out, int workers) const {
  const std::vector<double> c1(nx, o1), c2(nx, o2);
  gain_batch(q1, c1.data(), q2, c2.data(), nx, out, workers);
}

void CollisionModel::gain_batch(const double* q1, const double* o1, const double* q2,
                                const double* o2, std::size_t nx, double* out,
                                int workers) const {
  parallel_for(grid_.size(), workers, [&](std::size_t b, std::size_t e) {
    std::vector<double> scratch;
    for (std::size_t a = b; a < e; ++a) gain_row(a, q1, o1, q2, o2, nx, out, scratch);
  });
}

void CollisionModel::gain_batch(const double* q1, double o1, const double* q2, double o2,
                                std::size_t nx, double* out) const {
  gain_batch(q1, o1, q2, o2, nx, out, default_workers());
}

double collision_frequency(const CollisionModel& model, const Vec3& v) {
  return model.collision_frequency(v);
}

namespace {

double extension_offset(Extension ext) { return ext == Extension::Maxwellian ? 1.0 : 0.0; }

std::vector<double> ratio_perturbation(const VelocityGrid& grid, const std::vector<double>& F,
                                       double offset) {
  if (F.size() != grid.size()) throw ValidationError("node vector does not match the grid");
  std::vector<double> q(F.size());
  for (std::size_t a = 0; a < F.size(); ++a) q[a] = F[a] / grid.mu()[a] - offset;
  return q;
}

}  // namespace

double q_gain(const CollisionModel& model, const std::vector<double>& F1,
              const std::vector<double>& F2, std::size_t a, Extension ext) {
  const double o = extension_offset(ext);
  const auto q1 = ratio_perturbation(model.grid(), F1, o);
  const auto q2 = ratio_perturbation(model.grid(), F2, o);
  std::vector<double> out(model.grid().size(), 0.0);
  model.gain_batch(q1.data(), o, q2.data(), o, 1, out.data(), 1);
  return out[a];
}

std::vector<double> q_gain_all(const CollisionModel& model, const std::vector<double>& F1,
                               const std::vector<double>& F2, Extension ext) {
  const double o = extension_offset(ext);
  const auto q1 = ratio_perturbation(model.grid(), F1, o);
  const auto q2 = ratio_perturbation(model.grid(), F2, o);
  std::vector<double> out(model.grid().size(), 0.0);
  model.gain_batch(q1.data(), o, q2.data(), o, 1, out.data());
  return out;
}

double q_loss(const CollisionModel& model, const std::vector<double>& F1,
              const std::vector<double>& F2, std::size_t a) {
  const auto& grid = model.grid();
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    sum += relative_power((grid.node(a) - grid.node(j)).norm(), model.kernel().gamma) * F1[j];
  }
  return F2[a] * model.directions().total * grid.weight() * sum;
}

std::vector<double> q_loss_all(const CollisionModel& model, const std::vector<double>& F1,
                               const std::vector<double>& F2) {
  std::vector<double> out(model.grid().size());
  parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) out[a] = q_loss(model, F1, F2, a);
  });
  return out;
}

bool project_collision(const VelocityGrid& grid, int i, int j, const Vec3& v_post,
                       CollisionStencil& out) {
  const double h = grid.spacing();
  const double R = grid.cutoff();
  std::array<int, 3> l;
  for (int d = 0; d < 3; ++d) {
    l[d] = static_cast<int>(std::lround((v_post[d] + R) / h - 0.5));
  }
  const auto ci = grid.coords(i);
  const auto cj = grid.coords(j);
  const std::array<int, 3> m{ci[0] + cj[0] - l[0], ci[1] + cj[1] - l[1], ci[2] + cj[2] - l[2]};
  if (!grid.in_range(l[0], l[1], l[2]) || !grid.in_range(m[0], m[1], m[2])) return false;
  const int lam = static_cast<int>(grid.index(l[0], l[1], l[2]));
  const int mu = static_cast<int>(grid.index(m[0], m[1], m[2]));
  const Vec3& vl = grid.node(lam);
  const Vec3& vm = grid.node(mu);
  const double energy = grid.node(i).squaredNorm() + grid.node(j).squaredNorm();
  const double e0 = vl.squaredNorm() + vm.squaredNorm();
  const double de = energy - e0;
  out.i = i;
  out.j = j;
  out.lam = lam;
  out.mu = mu;
  if (std::abs(de) <= 1e-12 * std::max(1.0, energy)) {
    out.lam_s = lam;
    out.mu_s = mu;
    out.r = 0.0;
    return true;
  }
  const Vec3 diff = vl - vm;
  double best_gap = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int sx = -1; sx <= 1; ++sx) {
    for (int sy = -1; sy <= 1; ++sy) {
      for (int sz = -1; sz <= 1; ++sz) {
        if (sx == 0 && sy == 0 && sz == 0) continue;
        const double s2 = sx * sx + sy * sy + sz * sz;
        const double gap = 2.0 * h * (sx * diff.x() + sy * diff.y() + sz * diff.z()) +
                           2.0 * h * h * s2;
        if (gap == 0.0) continue;
        const double r = de / gap;
        if (!(r >= 0.0 && r <= 1.0)) continue;
        if (std::abs(gap) >= best_gap) continue;
        if (!grid.in_range(l[0] + sx, l[1] + sy, l[2] + sz) ||
            !grid.in_range(m[0] - sx, m[1] - sy, m[2] - sz)) {
          continue;
        }
        best_gap = std::abs(gap);
        out.lam_s = static_cast<int>(grid.index(l[0] + sx, l[1] + sy, l[2] + sz));
        out.mu_s = static_cast<int>(grid.index(m[0] - sx, m[1] - sy, m[2] - sz));
        out.r = r;
        found = true;
      }
    }
  }
  return found;
}

void for_each_projected_collision(
    const CollisionModel& model, int workers,
    const std::function<void(int chunk, double c, const CollisionStencil&)>& visit, int chunks) {
  const VelocityGrid& grid = model.grid();
  const DirectionRule& dirs = model.directions();
  const int n = static_cast<int>(grid.size());
  const double gamma = model.kernel().gamma;
  const double w2 = grid.weight() * grid.weight();
  chunks = std::max(1, chunks);
  parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t chunk = cb; chunk < ce; ++chunk) {
      // Balance the triangular pair count i < j across chunks.
      auto boundary = [&](std::size_t c) {
        const double frac = static_cast<double>(c) / chunks;
        return static_cast<int>(std::lround(n * (1.0 - std::sqrt(1.0 - frac))));
      };
      const int i_begin = boundary(chunk);
      const int i_end = boundary(chunk + 1);
      CollisionStencil st;
      for (int i = i_begin; i < i_end; ++i) {
        const Vec3& vi = grid.node(i);
        for (int j = i + 1; j < n; ++j) {
          const Vec3 g = vi - grid.node(j);
          const double gn = g.norm();
          const double base = w2 * relative_power(gn, gamma);
          const Vec3 e = g / gn;
          Vec3 e1, e2;
          complete_frame(e, e1, e2);
          for (std::size_t d = 0; d < dirs.size(); ++d) {
            const Vec3 omega = dirs.cos_theta[d] * e +
                               dirs.sin_theta[d] * (dirs.cos_phi[d] * e1 + dirs.sin_phi[d] * e2);
            const Vec3 v_post = vi - (gn * dirs.cos_theta[d]) * omega;
            if (!project_collision(grid, i, j, v_post, st)) continue;
            if (st.r == 0.0 && ((st.lam == i && st.mu == j) || (st.lam == j && st.mu == i))) {
              continue;
            }
            visit(static_cast<int>(chunk), base * dirs.weight[d], st);
          }
        }
      }
    }
  });
}

std::vector<double> q_symmetrized(const CollisionModel& model, const std::vector<double>& F,
                                  int workers) {
  const VelocityGrid& grid = model.grid();
  if (F.size() != grid.size()) throw ValidationError("node vector does not match the grid");
  const auto& mu = grid.mu();
  std::vector<double> g(F.size());
  for (std::size_t a = 0; a < F.size(); ++a) g[a] = F[a] / mu[a];
  const int chunks = std::max(1, workers);
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(F.size(), 0.0));
  for_each_projected_collision(
      model, workers,
      [&](int chunk, double c, const CollisionStencil& st) {
        const double pre = F[st.i] * F[st.j];
        const double post = mu[st.i] * mu[st.j] *
                            ((1.0 - st.r) * g[st.lam] * g[st.mu] + st.r * g[st.lam_s] * g[st.mu_s]);
        const double flow = c * (pre - post);
        const auto nodes = st.nodes();
        const auto coeffs = st.coeffs();
        auto& acc = partial[chunk];
        for (int k = 0; k < 6; ++k) acc[nodes[k]] += flow * coeffs[k];
      },
      chunks);
  std::vector<double> out(F.size(), 0.0);
  const double scale = 0.5 / grid.weight();
  for (const auto& p : partial) {
    for (std::size_t a = 0; a < out.size(); ++a) out[a] += p[a];
  }
  for (double& x : out) x *= scale;
  return out;
}

Eigen::MatrixXd LinearOperatorMatrix::L() const {
  Eigen::MatrixXd l = -K;
  for (std::size_t a = 0; a < nu.size(); ++a) l(a, a) += nu[a];
  return l;
}

std::vector<double> LinearOperatorMatrix::apply_K(const std::vector<double>& f) const {
  const Eigen::Map<const Eigen::VectorXd> fv(f.data(), f.size());
  const Eigen::VectorXd r = K * fv;
  return {r.data(), r.data() + r.size()};
}

std::vector<double> LinearOperatorMatrix::apply_L(const std::vector<double>& f) const {
  std::vector<double> out = apply_K(f);
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = nu[a] * f[a] - out[a];
  return out;
}

LinearOperatorMatrix assemble_linearized(const CollisionModel& model, int workers) {
  const VelocityGrid& grid = model.grid();
  const std::size_t n = grid.size();
  const auto& mu = grid.mu();
  const auto& smu = grid.sqrt_mu();
  const int chunks = std::max(1, workers);
  std::vector<Eigen::MatrixXd> partial(chunks, Eigen::MatrixXd::Zero(n, n));
  for_each_projected_collision(
      model, workers,
      [&](int chunk, double c, const CollisionStencil& st) {
        const auto nodes = st.nodes();
        const auto coeffs = st.coeffs();
        double d[6];
        for (int k = 0; k < 6; ++k) d[k] = coeffs[k] / smu[nodes[k]];
        const double scale = 0.5 * c * mu[st.i] * mu[st.j];
        Eigen::MatrixXd& m = partial[chunk];
        for (int p = 0; p < 6; ++p) {
          const double sp = scale * d[p];
          for (int q = 0; q < 6; ++q) m(nodes[q], nodes[p]) += sp * d[q];
        }
      },
      chunks);
  for (int c = 1; c < chunks; ++c) partial[0] += partial[c];
  LinearOperatorMatrix out;
  out.nu = model.nu();
  out.nu0 = model.nu0();
  out.K = -partial[0] / grid.weight();
  out.K = 0.5 * (out.K + out.K.transpose()).eval();
  for (std::size_t a = 0; a < n; ++a) out.K(a, a) += out.nu[a];
  return out;
}

std::vector<double> apply_Kw(const LinearOperatorMatrix& lin, const VelocityGrid& grid,
                             const WeightSpec& weight, const PotentialField& pot, const Vec3& x,
                             const std::vector<double>& h) {
  const double phi = pot.phi(x);
  std::vector<double> w(grid.size());
  std::vector<double> scaled(grid.size());
  for (std::size_t a = 0; a < grid.size(); ++a) {
    w[a] = weight.of_energy(0.5 * grid.node(a).squaredNorm() + phi);
    scaled[a] = h[a] / w[a];
  }
  std::vector<double> out = lin.apply_K(scaled);
  for (std::size_t a = 0; a < out.size(); ++a) out[a] *= w[a];
  return out;
}

std::vector<double> GammaParts::total() const {
  std::vector<double> out(plus.size());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = plus[a] - minus[a];
  return out;
}

GammaParts gamma_nonlinear(const CollisionModel& model, const std::vector<double>& f1,
                           const std::vector<double>& f2) {
  const VelocityGrid& grid = model.grid();
  const std::size_t n = grid.size();
  const auto& smu = grid.sqrt_mu();
  std::vector<double> q1(n), q2(n), weighted(n);
  for (std::size_t a = 0; a < n; ++a) {
    q1[a] = f1[a] / smu[a];
    q2[a] = f2[a] / smu[a];
    weighted[a] = smu[a] * f1[a];
  }
  GammaParts out;
  out.plus.assign(n, 0.0);
  model.gain_batch(q1.data(), 0.0, q2.data(), 0.0, 1, out.plus.data());
  for (std::size_t a = 0; a < n; ++a) out.plus[a] /= smu[a];
  const Eigen::Map<const Eigen::VectorXd> wv(weighted.data(), n);
  const Eigen::VectorXd rate = model.loss_matrix() * wv;
  out.minus.resize(n);
  for (std::size_t a = 0; a < n; ++a) out.minus[a] = f2[a] * rate[a];
  return out;
}

std::vector<double> r_of_f(const CollisionModel& model, const PotentialField& pot, const Vec3& x,
                           const std::vector<double>& f) {
  const VelocityGrid& grid = model.grid();
  const double phi = pot.phi(x);
  const double e_full = std::exp(-phi);
  const double e_half = std::exp(-0.5 * phi);
  std::vector<double> F(grid.size());
  for (std::size_t a = 0; a < F.size(); ++a) {
    F[a] = e_full * grid.mu()[a] + e_half * grid.sqrt_mu()[a] * f[a];
  }
  const Eigen::Map<const Eigen::VectorXd> Fv(F.data(), F.size());
  const Eigen::VectorXd rate = model.loss_matrix() * Fv;
  std::vector<double> out(rate.data(), rate.data() + rate.size());
  return out;
}

double r_of_f(const CollisionModel& model, const PotentialField& pot, const Vec3& x,
              const std::vector<double>& f, std::size_t a) {
  return r_of_f(model, pot, x, f)[a];
}

std::array<std::vector<double>, 5> kernel_basis(const VelocityGrid& grid) {
  const std::size_t n = grid.size();
  const double norm = std::pow(2.0 * std::numbers::pi, -0.75);
  std::array<std::vector<double>, 5> basis;
  for (auto& e : basis) e.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    const Vec3& v = grid.node(a);
    const double s = norm * grid.sqrt_mu()[a];
    basis[0][a] = s;
    basis[1][a] = v.x() * s;
    basis[2][a] = v.y() * s;
    basis[3][a] = v.z() * s;
    basis[4][a] = (v.squaredNorm() - 3.0) / std::sqrt(6.0) * s;
  }
  const double w = grid.weight();
  for (int k = 0; k < 5; ++k) {
    for (int m = 0; m < k; ++m) {
      double dot = 0.0;
      for (std::size_t a = 0; a < n; ++a) dot += w * basis[k][a] * basis[m][a];
      for (std::size_t a = 0; a < n; ++a) basis[k][a] -= dot * basis[m][a];
    }
    double nrm = 0.0;
    for (std::size_t a = 0; a < n; ++a) nrm += w * basis[k][a] * basis[k][a];
    nrm = std::sqrt(nrm);
    for (std::size_t a = 0; a < n; ++a) basis[k][a] /= nrm;
  }
  return basis;
}

ProjectionResult project_PL(const VelocityGrid& grid, const std::vector<double>& f,
                            ProjectionBasis basis) {
  const std::size_t n = grid.size();
  if (f.size() != n) throw ValidationError("node vector does not match the grid");
  const double w = grid.weight();
  std::array<std::vector<double>, 5> e;
  if (basis == ProjectionBasis::Orthonormal) {
    e = kernel_basis(grid);
  } else {
    for (auto& v : e) v.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      const Vec3& v = grid.node(a);
      const double s = grid.sqrt_mu()[a];
      e[0][a] = s;
      e[1][a] = v.x() * s;
      e[2][a] = v.y() * s;
      e[3][a] = v.z() * s;
      e[4][a] = (v.squaredNorm() - 3.0) / std::sqrt(6.0) * s;
    }
  }
  std::array<double, 5> coef{};
  for (int k = 0; k < 5; ++k) {
    double dot = 0.0;
    for (std::size_t a = 0; a < n; ++a) dot += w * f[a] * e[k][a];
    coef[k] = dot;
  }
  ProjectionResult out;
  out.moments.a = coef[0];
  out.moments.b = Vec3(coef[1], coef[2], coef[3]);
  out.moments.c = coef[4];
  out.projected.assign(n, 0.0);
  for (int k = 0; k < 5; ++k) {
    for (std::size_t a = 0; a < n; ++a) out.projected[a] += coef[k] * e[k][a];
  }
  return out;
}

std::vector<double> project_Pgamma(const VelocityGrid& grid, const std::vector<double>& f,
                                   const Vec3& n, FluxNormalizer normalizer) {
  double flux_mu = 0.0;
  double flux_f = 0.0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const double nv = n.dot(grid.node(a));
    if (nv <= 0.0) continue;
    flux_mu += grid.mu()[a] * nv;
    flux_f += f[a] * grid.sqrt_mu()[a] * nv;
  }
  flux_mu *= grid.weight();
  flux_f *= grid.weight();
  const double c_mu =
      normalizer == FluxNormalizer::Discrete ? 1.0 / flux_mu : 1.0 / (2.0 * std::numbers::pi);
  std::vector<double> out(grid.size());
  for (std::size_t a = 0; a < grid.size(); ++a) out[a] = c_mu * grid.sqrt_mu()[a] * flux_f;
  return out;
}

double gamma_plus_inner(const VelocityGrid& grid, const std::vector<double>& f,
                        const std::vector<double>& g, const Vec3& n) {
  double sum = 0.0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const double nv = n.dot(grid.node(a));
    if (nv > 0.0) sum += f[a] * g[a] * nv;
  }
  return sum * grid.weight();
}

}  // namespace kbte
