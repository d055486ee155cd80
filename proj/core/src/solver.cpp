#include "kbte/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <Eigen/Dense>

#include "kbte/characteristics.hpp"
#include "kbte/errors.hpp"
#include "kbte/parallel.hpp"

namespace kbte {

void SchemeConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!(t_end >= 0.0)) throw ValidationError("t_end must be nonnegative");
  if (interpolation_order != 1 && interpolation_order != 3) {
    throw ValidationError("interpolation order must be 1 or 3");
  }
  if (kind == SchemeKind::Positivity && interpolation_order != 1) {
    throw ValidationError("the positivity scheme needs trilinear interpolation");
  }
  if (picard_max_iterations < 1) throw ValidationError("picard_max_iterations must be >= 1");
  if (!(picard_tolerance > 0.0)) throw ValidationError("picard_tolerance must be positive");
  if (!(picard_t_end >= 0.0)) throw ValidationError("picard_t_end must be nonnegative");
  if (!(output_every > 0.0)) throw ValidationError("output_every must be positive");
  if (integrator_step < 0.0) throw ValidationError("integrator_step must be nonnegative");
  if (workers < 1) throw ValidationError("workers must be >= 1");
}

double cfl_number(const SchemeConfig& config, const PhaseSpace& space) {
  double vmax = 0.0;
  for (const Vec3& v : space.v_grid().nodes()) vmax = std::max(vmax, v.norm());
  return config.dt * vmax / space.x_grid().spacing();
}

namespace {

struct RowBuffer {
  std::vector<std::size_t> counts;
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
};

}  // namespace

TransportPlan::TransportPlan(const PhaseSpace& s, const CollisionModel& model, double dt,
                             int order, double step, int workers)
    : size_(s.size()), dt_(dt) {
  const std::size_t nx = s.nx(), nv = s.nv();
  const SpatialGrid& xg = s.x_grid();
  const VelocityGrid& vg = s.v_grid();
  const PotentialField& pot = s.potential();
  const auto& stations = xg.stations();
  const std::vector<double>& nu = model.nu();
  if (size_ + stations.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("phase space too large for the transport plan");
  }

  // Diffuse closure at each station.
  std::vector<double> st_nu(stations.size(), 0.0);
  std::vector<double> st_damp(stations.size(), 1.0);
  st_ptr_.push_back(0);
  for (std::size_t st = 0; st < stations.size(); ++st) {
    const BoundaryStation& b = stations[st];
    std::array<int, 8> idx;
    std::array<double, 8> w;
    const int n = xg.stencil(b.x, idx, w);
    double norm = 0.0;
    for (std::size_t a = 0; a < nv; ++a) {
      const double nvel = b.n.dot(vg.node(a));
      if (nvel > 0.0) norm += vg.mu()[a] * nvel;
    }
    for (std::size_t a = 0; a < nv; ++a) {
      const double nvel = b.n.dot(vg.node(a));
      if (nvel <= 0.0) continue;
      const double theta = vg.mu()[a] * nvel / norm;
      st_nu[st] += theta * nu[a];
      for (int k = 0; k < n; ++k) {
        st_cols_.push_back(static_cast<std::uint32_t>(a * nx + idx[k]));
        st_vals_.push_back(theta * w[k]);
      }
    }
    st_ptr_.push_back(st_cols_.size());
    st_damp[st] = std::exp(-pot.phi(b.x));
  }

  elapsed_.assign(size_, dt);
  exposure_.assign(size_, 0.0);
  const int chunks = std::max(1, workers);
  std::vector<RowBuffer> buffers(static_cast<std::size_t>(chunks));
  {
    // parallel_for hands out contiguous ranges in order; remember which chunk
    // got which range so the rows can be concatenated deterministically.
    std::vector<std::pair<std::size_t, std::size_t>> seen;
    std::mutex m;
    parallel_for(size_, chunks, [&](std::size_t begin, std::size_t end) {
      RowBuffer buf;
      std::array<int, 8> xi;
      std::array<double, 8> xw;
      std::array<int, 64> ci;
      std::array<double, 64> cw;
      std::array<int, 8> vi;
      std::array<double, 8> vw;
      for (std::size_t t = begin; t < end; ++t) {
        const std::size_t a = t / nx, i = t % nx;
        const PhasePoint start{xg.node(i), vg.node(a)};
        double exposure = 0.0;
        FlowObserver observer;
        const double nu_a = nu[a];
        const double radial_a = model.nu_radial(vg.node(a).norm());
        double prev_s = 0.0;
        double prev_rate = s.damping_factor(i) * nu_a;
        if (!pot.is_zero()) {
          observer = [&](double sv, const PhasePoint& p) {
            const double scale = radial_a > 0.0 ? model.nu_radial(p.v.norm()) / radial_a : 1.0;
            const double rate = std::exp(-pot.phi(p.x)) * nu_a * scale;
            exposure += 0.5 * (prev_rate + rate) * (prev_s - sv);
            prev_s = sv;
            prev_rate = rate;
          };
        }
        const BackwardTrace tr = trace_backward(s.domain(), pot, start, dt, step, observer);
        if (pot.is_zero()) exposure = nu_a * tr.elapsed;
        elapsed_[t] = tr.elapsed;
        std::size_t count = 0;
        if (tr.hit_boundary) {
          const std::size_t st = xg.nearest_station(tr.end.x);
          exposure += (dt - tr.elapsed) * st_damp[st] * st_nu[st];
          buf.cols.push_back(static_cast<std::uint32_t>(size_ + st));
          buf.vals.push_back(1.0);
          count = 1;
        } else {
          int nvs = 1;
          if (pot.is_zero()) {
            vi[0] = static_cast<int>(a);
            vw[0] = 1.0;
          } else {
            nvs = vg.stencil(tr.end.v, vi, vw);
          }
          int nxs = order == 3 ? xg.cubic_stencil(tr.end.x, ci, cw) : 0;
          if (nxs == 0) {
            nxs = xg.stencil(tr.end.x, xi, xw);
            for (int k = 0; k < nxs; ++k) {
              ci[k] = xi[k];
              cw[k] = xw[k];
            }
          }
          for (int m = 0; m < nvs; ++m) {
            for (int k = 0; k < nxs; ++k) {
              const double w = vw[m] * cw[k];
              if (w == 0.0) continue;
              buf.cols.push_back(static_cast<std::uint32_t>(vi[m] * nx + ci[k]));
              buf.vals.push_back(w);
              ++count;
            }
          }
        }
        exposure_[t] = exposure;
        buf.counts.push_back(count);
      }
      std::lock_guard<std::mutex> lock(m);
      const std::size_t slot = seen.size();
      seen.emplace_back(begin, end);
      buffers[slot] = std::move(buf);
    });
    std::vector<std::size_t> order_idx(seen.size());
    for (std::size_t k = 0; k < seen.size(); ++k) order_idx[k] = k;
    std::sort(order_idx.begin(), order_idx.end(),
              [&](std::size_t x, std::size_t y) { return seen[x].first < seen[y].first; });
    row_ptr_.reserve(size_ + 1);
    row_ptr_.push_back(0);
    for (std::size_t k : order_idx) {
      const RowBuffer& b = buffers[k];
      std::size_t pos = 0;
      for (std::size_t c : b.counts) {
        cols_.insert(cols_.end(), b.cols.begin() + pos, b.cols.begin() + pos + c);
        vals_.insert(vals_.end(), b.vals.begin() + pos, b.vals.begin() + pos + c);
        pos += c;
        row_ptr_.push_back(cols_.size());
      }
    }
  }
}

std::vector<double> TransportPlan::station_values(const std::vector<double>& q) const {
  std::vector<double> sv(st_ptr_.size() - 1, 0.0);
  for (std::size_t st = 0; st + 1 < st_ptr_.size(); ++st) {
    double acc = 0.0;
    for (std::size_t e = st_ptr_[st]; e < st_ptr_[st + 1]; ++e) acc += st_vals_[e] * q[st_cols_[e]];
    sv[st] = acc;
  }
  return sv;
}

void TransportPlan::apply(const std::vector<double>& q, std::vector<double>& out,
                          const std::vector<double>* damping, int workers) const {
  if (q.size() != size_) throw ValidationError("field does not match the transport plan");
  const std::vector<double> sv = station_values(q);
  out.assign(size_, 0.0);
  parallel_for(size_, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      double acc = 0.0;
      for (std::size_t e = row_ptr_[t]; e < row_ptr_[t + 1]; ++e) {
        const std::uint32_t c = cols_[e];
        acc += vals_[e] * (c < size_ ? q[c] : sv[c - size_]);
      }
      out[t] = damping ? acc * (*damping)[t] : acc;
    }
  });
}

KineticSolver::KineticSolver(std::shared_ptr<const PhaseSpace> space,
                             std::shared_ptr<const CollisionModel> model, SchemeConfig config)
    : space_(std::move(space)), model_(std::move(model)), config_(config) {
  config_.validate();
  if (model_->grid().size() != space_->nv()) {
    throw ValidationError("collision model and phase space use different velocity grids");
  }
}

const TransportPlan& KineticSolver::plan() const {
  if (!plan_) {
    const double step =
        config_.integrator_step > 0.0 ? config_.integrator_step : default_step(space_->domain());
    plan_ = std::make_unique<TransportPlan>(*space_, *model_, config_.dt,
                                            config_.interpolation_order, step, config_.workers);
  }
  return *plan_;
}

const LinearOperatorMatrix& KineticSolver::linearized() const {
  if (!lin_) {
    lin_ = std::make_unique<LinearOperatorMatrix>(assemble_linearized(*model_, config_.workers));
    const auto& sm = space_->v_grid().sqrt_mu();
    const Eigen::Map<const Eigen::VectorXd> s(sm.data(), static_cast<Eigen::Index>(sm.size()));
    k_ratio_ = s.cwiseInverse().asDiagonal() * lin_->K * s.asDiagonal();
  }
  return *lin_;
}

std::vector<double> KineticSolver::damping_factors(DampingMode mode,
                                                   const std::vector<double>* rf) const {
  const auto& e = plan().nu_exposure();
  std::vector<double> d(e.size(), 1.0);
  if (mode == DampingMode::None) return d;
  for (std::size_t t = 0; t < e.size(); ++t) {
    const double scale = mode == DampingMode::Rf ? (*rf)[t] : 1.0;
    d[t] = std::exp(-e[t] * scale);
  }
  return d;
}

DistributionField KineticSolver::transport_step(const DistributionField& field) const {
  std::vector<double> out;
  plan().apply(field.ratio_perturbation(), out, nullptr, config_.workers);
  return DistributionField::from_ratio(space_, field.rep, out);
}

DistributionField KineticSolver::damped_semigroup(const DistributionField& h0, DampingMode mode,
                                                  double t, const DistributionField* frozen) const {
  const double steps_real = t / config_.dt;
  const long steps = std::lround(steps_real);
  if (t < 0.0 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real)) {
    throw ValidationError("semigroup time must be a nonnegative multiple of dt");
  }
  std::vector<double> rf;
  if (mode == DampingMode::Rf) {
    if (!frozen) throw ValidationError("R(f) damping needs a frozen field");
    rf = rf_ratio(*frozen, *model_);
  }
  const std::vector<double> damp = damping_factors(mode, mode == DampingMode::Rf ? &rf : nullptr);
  std::vector<double> q = h0.ratio_perturbation();
  std::vector<double> next;
  for (long k = 0; k < steps; ++k) {
    plan().apply(q, next, &damp, config_.workers);
    q.swap(next);
  }
  return DistributionField::from_ratio(space_, h0.rep, q);
}

void KineticSolver::tilt_columns(const std::vector<double>& reference,
                                 std::vector<double>& q) const {
  // Multiplies each spatial column of F = mu_E (1 + q) by exp(lambda . phi(v)),
  // phi = (1, v, |v|^2), with lambda chosen so the five moments match those of
  // the reference column. The dual problem is convex; damped Newton.
  const PhaseSpace& s = *space_;
  const std::size_t nx = s.nx(), nv = s.nv();
  const VelocityGrid& vg = s.v_grid();
  using Vec5 = Eigen::Matrix<double, 5, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;
  std::vector<Vec5> phi(nv);
  for (std::size_t a = 0; a < nv; ++a) {
    const Vec3& v = vg.node(a);
    phi[a] << 1.0, v.x(), v.y(), v.z(), v.squaredNorm();
  }
  parallel_for(nx, config_.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> base(nv), tilted(nv);
    for (std::size_t i = begin; i < end; ++i) {
      Vec5 target = Vec5::Zero(), scale = Vec5::Zero();
      double mass = 0.0;
      for (std::size_t a = 0; a < nv; ++a) {
        const double f_ref = vg.mu()[a] * (1.0 + reference[a * nx + i]);
        target += f_ref * phi[a];
        scale += f_ref * phi[a].cwiseAbs();
        base[a] = vg.mu()[a] * (1.0 + q[a * nx + i]);
        mass += base[a];
      }
      if (!(mass > 0.0) || !(target[0] > 0.0)) continue;
      Vec5 lambda = Vec5::Zero();
      auto dual = [&](const Vec5& l, Vec5* grad, Mat5* hess) {
        double obj = -l.dot(target);
        if (grad) *grad = -target;
        if (hess) hess->setZero();
        for (std::size_t a = 0; a < nv; ++a) {
          if (base[a] == 0.0) continue;
          const double f = base[a] * std::exp(l.dot(phi[a]));
          obj += f;
          if (grad) *grad += f * phi[a];
          if (hess) hess->noalias() += f * phi[a] * phi[a].transpose();
        }
        return obj;
      };
      Vec5 grad;
      Mat5 hess;
      double obj = dual(lambda, &grad, &hess);
      bool ok = false;
      for (int it = 0; it < 50; ++it) {
        if ((grad.cwiseAbs().array() <= 1e-14 * scale.array()).all()) {
          ok = true;
          break;
        }
        const Vec5 dir = hess.ldlt().solve(-grad);
        if (!dir.allFinite()) break;
        double step = 1.0;
        Vec5 trial;
        double trial_obj = obj;
        for (int ls = 0; ls < 40; ++ls) {
          trial = lambda + step * dir;
          trial_obj = dual(trial, nullptr, nullptr);
          // Near the optimum the decrease is below rounding in obj.
          const double slack = 1e-14 * std::abs(obj);
          if (std::isfinite(trial_obj) && trial_obj <= obj + 1e-4 * step * grad.dot(dir) + slack) break;
          step *= 0.5;
        }
        if (!(trial_obj <= obj + 1e-14 * std::abs(obj)) && step < 1e-10) break;
        lambda = trial;
        obj = dual(lambda, &grad, &hess);
      }
      if (!ok && !(grad.cwiseAbs().array() <= 1e-10 * scale.array()).all()) continue;
      for (std::size_t a = 0; a < nv; ++a) {
        const double f = base[a] * std::exp(lambda.dot(phi[a]));
        q[a * nx + i] = f / vg.mu()[a] - 1.0;
      }
    }
  });
}

void KineticSolver::restore_total_mass(const std::vector<double>& before,
                                       std::vector<double>& q) const {
  // A deficit is filled with mu_E, an excess removed by scaling F; by Jensen
  // neither raises the relative entropy when the mass is the equilibrium one.
  const PhaseSpace& s = *space_;
  const std::size_t nx = s.nx();
  double m0 = 0.0, m1 = 0.0, eq = 0.0;
  for (std::size_t a = 0; a < s.nv(); ++a)
    for (std::size_t i = 0; i < nx; ++i) {
      const double m = s.mu_E(a, i);
      m0 += m * (1.0 + before[a * nx + i]);
      m1 += m * (1.0 + q[a * nx + i]);
      eq += m;
    }
  if (!(m1 > 0.0)) return;
  if (m1 < m0) {
    const double eps = (m0 - m1) / eq;
    for (double& x : q) x += eps;
  } else if (m1 > m0) {
    const double c = m0 / m1;
    for (double& x : q) x = c * (1.0 + x) - 1.0;
  }
}

std::vector<double> KineticSolver::step_ratio(const std::vector<double>& q) const {
  const PhaseSpace& s = *space_;
  const std::size_t nx = s.nx(), nv = s.nv();
  const VelocityGrid& vg = s.v_grid();
  std::vector<double> q_tr;
  plan().apply(q, q_tr, nullptr, config_.workers);

  // g = F_tr / mu_E >= 0; beyond the velocity grid F is continued as the
  // local density times mu_E, so the gain input is g - rho and offset rho.
  std::vector<double> rho(nx, 0.0), shifted(q_tr.size());
  double mu_sum = 0.0;
  for (double m : vg.mu()) mu_sum += m;
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t i = 0; i < nx; ++i) rho[i] += vg.mu()[a] * (1.0 + q_tr[a * nx + i]);
  for (double& r : rho) r /= mu_sum;
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t i = 0; i < nx; ++i) shifted[a * nx + i] = 1.0 + q_tr[a * nx + i] - rho[i];

  std::vector<double> gain(q_tr.size());
  model_->gain_batch(shifted.data(), rho.data(), shifted.data(), rho.data(), nx, gain.data(),
                     config_.workers);

  Eigen::MatrixXd mg(nv, nx);
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t i = 0; i < nx; ++i) mg(a, i) = vg.mu()[a] * (1.0 + q_tr[a * nx + i]);
  const Eigen::MatrixXd loss = model_->loss_matrix() * mg;

  const double dt = config_.dt;
  std::vector<double> out(q_tr.size());
  for (std::size_t a = 0; a < nv; ++a) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = a * nx + i;
      const double e = s.damping_factor(i);
      const double g = 1.0 + q_tr[k];
      const double nu_f = e * std::max(0.0, loss(a, i));
      const double num = g + dt * e * std::max(0.0, gain[k]) / vg.mu()[a];
      out[k] = num / (1.0 + dt * nu_f) - 1.0;
    }
  }
  if (config_.symmetrized) tilt_columns(q_tr, out);
  if (config_.conserve_mass) restore_total_mass(q, out);
  return out;
}

DistributionField KineticSolver::positivity_step(const DistributionField& F) const {
  const PhaseSpace& s = *space_;
  const std::size_t nx = s.nx();
  const DistributionField full = F.as(Representation::Full);
  for (std::size_t a = 0; a < s.nv(); ++a)
    for (std::size_t i = 0; i < nx; ++i)
      if (full.values[a * nx + i] < -1e-12 * s.mu_E(a, i)) {
        throw NegativeInput("positivity step needs a nonnegative distribution");
      }
  std::vector<double> q = full.ratio_perturbation();
  for (double& x : q) x = std::max(x, -1.0);
  return DistributionField::from_ratio(space_, F.rep, step_ratio(q));
}

std::vector<double> KineticSolver::mild_source(const std::vector<double>& q, bool linear,
                                               bool nonlinear) const {
  const PhaseSpace& s = *space_;
  const std::size_t nx = s.nx(), nv = s.nv();
  const VelocityGrid& vg = s.v_grid();
  linearized();
  std::vector<double> out(q.size(), 0.0);
  const Eigen::Map<const Eigen::MatrixXd> Q(q.data(), static_cast<Eigen::Index>(nx),
                                            static_cast<Eigen::Index>(nv));
  // Q is the transpose of the (nv x nx) matrix of columns.
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nv),
                                                static_cast<Eigen::Index>(nx));
  if (linear) total += k_ratio_ * Q.transpose();
  if (nonlinear) {
    std::vector<double> gain(q.size());
    model_->gain_batch(q.data(), 0.0, q.data(), 0.0, nx, gain.data(), config_.workers);
    Eigen::MatrixXd mq(nv, nx);
    for (std::size_t a = 0; a < nv; ++a)
      for (std::size_t i = 0; i < nx; ++i) mq(a, i) = vg.mu()[a] * q[a * nx + i];
    const Eigen::MatrixXd loss = model_->loss_matrix() * mq;
    for (std::size_t a = 0; a < nv; ++a)
      for (std::size_t i = 0; i < nx; ++i)
        total(a, i) += gain[a * nx + i] / vg.mu()[a] - q[a * nx + i] * loss(a, i);
  }
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t i = 0; i < nx; ++i) out[a * nx + i] = s.damping_factor(i) * total(a, i);
  return out;
}

PicardResult KineticSolver::picard_mild_iteration(const DistributionField& h0,
                                                  bool throw_on_failure,
                                                  int max_iterations) const {
  const PhaseSpace& s = *space_;
  const double dt = config_.dt;
  const long steps = std::lround(config_.picard_t_end / dt);
  const std::size_t n = s.size();
  const std::vector<double> damp = damping_factors(DampingMode::Nu, nullptr);

  std::vector<std::vector<double>> H(static_cast<std::size_t>(steps) + 1);
  H[0] = h0.ratio_perturbation();
  for (long k = 1; k <= steps; ++k) plan().apply(H[k - 1], H[k], &damp, config_.workers);

  PicardResult result;
  for (long k = 0; k <= steps; ++k) result.times.push_back(static_cast<double>(k) * dt);
  std::vector<std::vector<double>> prev(H.size(), std::vector<double>(n, 0.0));
  std::vector<double> hw(n);
  for (std::size_t a = 0, t = 0; a < s.nv(); ++a)
    for (std::size_t i = 0; i < s.nx(); ++i, ++t) hw[t] = s.weights()[t] * s.sqrt_mu_E(a, i);

  const int limit = max_iterations > 0 ? max_iterations : config_.picard_max_iterations;
  for (int m = 0; m < limit; ++m) {
    std::vector<std::vector<double>> g(H.size());
    for (std::size_t k = 0; k < H.size(); ++k) g[k] = mild_source(prev[k]);
    std::vector<std::vector<double>> next(H.size());
    std::vector<double> D(n, 0.0), tmp(n), moved;
    next[0] = H[0];
    for (std::size_t k = 1; k < H.size(); ++k) {
      for (std::size_t t = 0; t < n; ++t) tmp[t] = D[t] + 0.5 * dt * g[k - 1][t];
      plan().apply(tmp, moved, &damp, config_.workers);
      for (std::size_t t = 0; t < n; ++t) D[t] = moved[t] + 0.5 * dt * g[k][t];
      next[k].resize(n);
      for (std::size_t t = 0; t < n; ++t) next[k][t] = H[k][t] + D[t];
    }
    double res = 0.0;
    for (std::size_t k = 0; k < H.size(); ++k)
      for (std::size_t t = 0; t < n; ++t)
        res = std::max(res, std::abs(hw[t] * (next[k][t] - prev[k][t])));
    if (!std::isfinite(res)) res = std::numeric_limits<double>::infinity();
    if (!result.residuals.empty()) result.ratios.push_back(res / result.residuals.back());
    result.residuals.push_back(res);
    prev.swap(next);
    if (res < config_.picard_tolerance) {
      result.converged = true;
      break;
    }
    if (!result.ratios.empty() && !(result.ratios.back() < 1.0)) {
      result.contractive = false;
      break;
    }
  }
  if (!result.converged && max_iterations <= 0) result.contractive = false;
  for (const auto& q : prev) {
    result.trajectory.push_back(
        DistributionField::from_ratio(space_, Representation::WeightedPerturbation, q));
  }
  if (!result.contractive && throw_on_failure) {
    throw NonContractive("Picard iteration did not contract; data too large for the "
                         "small-perturbation regime");
  }
  return result;
}

SimulationResult KineticSolver::run_simulation(const DistributionField& F0,
                                               const SnapshotHook& snapshot) const {
  const double dt = config_.dt;
  const long steps = std::lround(config_.t_end / dt);
  const long every = std::max(1L, std::lround(config_.output_every / dt));
  const bool nonlinear = config_.kind == SchemeKind::Positivity;
  SimulationResult result;
  result.series = DiagnosticsSeries(simulation_channels());
  result.series.metadata()["seed"] = std::to_string(config_.seed);
  result.series.metadata()["workers"] = std::to_string(config_.workers);

  std::vector<double> damp;
  if (!nonlinear && config_.damping != DampingMode::Rf) damp = damping_factors(config_.damping, nullptr);
  auto record = [&](double t, const DistributionField& F) {
    const FieldNorms nm = norms(F);
    double entropy = std::numeric_limits<double>::quiet_NaN();
    try {
      entropy = relative_entropy(F);
    } catch (const NegativeDistribution&) {
    }
    result.series.append(t, {total_mass(F), entropy, nm.l2, nm.weighted_sup,
                             nm.boundary_gamma_plus, rf_lower_bound_monitor(F, *model_)});
  };

  // Linear runs keep h = w f so small perturbations are not rounded against mu_E.
  const Representation rep =
      nonlinear ? Representation::Full : Representation::WeightedPerturbation;
  DistributionField F = F0.as(rep);
  if (nonlinear) {
    for (double x : F.values)
      if (x < 0.0) throw NegativeInput("initial distribution has negative entries");
  }
  std::vector<double> q = F.ratio_perturbation();
  record(0.0, F);
  if (snapshot) snapshot(0, 0.0, F);
  std::vector<double> next;
  std::vector<double> rf_damp;
  for (long k = 1; k <= steps; ++k) {
    if (nonlinear) {
      q = step_ratio(q);
    } else if (config_.damping == DampingMode::Rf) {
      const auto rf = rf_ratio(DistributionField::from_ratio(space_, rep, q), *model_);
      rf_damp = damping_factors(DampingMode::Rf, &rf);
      plan().apply(q, next, &rf_damp, config_.workers);
      q.swap(next);
    } else {
      plan().apply(q, next, &damp, config_.workers);
      q.swap(next);
    }
    const double t = static_cast<double>(k) * dt;
    if (nonlinear || k % every == 0 || k == steps) {
      const DistributionField cur = DistributionField::from_ratio(space_, rep, q);
      result.step_mass.push_back(total_mass(cur));
      if (nonlinear) result.step_entropy.push_back(relative_entropy(cur));
      if (k % every == 0 || k == steps) {
        record(t, cur);
        if (snapshot) snapshot(static_cast<int>(k), t, cur);
      }
    }
  }
  result.final_state = DistributionField::from_ratio(space_, rep, q);
  return result;
}

ContractionSweep contraction_sweep(const KineticSolver& solver, std::uint64_t seed, double start,
                                   double factor, double max_amplitude, int iterations) {
  if (!(start > 0.0) || !(factor > 1.0)) throw ValidationError("sweep needs start > 0, factor > 1");
  const auto& space = solver.space_ptr();
  ContractionSweep sweep;
  sweep.threshold = std::numeric_limits<double>::infinity();
  for (double amp = start; amp <= max_amplitude * (1.0 + 1e-12); amp *= factor) {
    const PicardResult r = solver.picard_mild_iteration(random_perturbation(space, amp, seed),
                                                        false, iterations);
    double worst = 0.0;
    for (double x : r.ratios) worst = std::max(worst, x);
    sweep.amplitudes.push_back(amp);
    sweep.max_ratios.push_back(worst);
    sweep.contractive.push_back(r.contractive);
    if (!r.contractive) {
      sweep.threshold = amp;
      break;
    }
    sweep.last_contractive = amp;
  }
  return sweep;
}

DistributionField transport_step(const KineticSolver& solver, const DistributionField& field) {
  return solver.transport_step(field);
}

DistributionField damped_semigroup(const KineticSolver& solver, const DistributionField& h0,
                                   DampingMode mode, double t, const DistributionField* frozen) {
  return solver.damped_semigroup(h0, mode, t, frozen);
}

DistributionField positivity_step(const KineticSolver& solver, const DistributionField& F) {
  return solver.positivity_step(F);
}

PicardResult picard_mild_iteration(const KineticSolver& solver, const DistributionField& h0) {
  return solver.picard_mild_iteration(h0);
}

SimulationResult run_simulation(const KineticSolver& solver, const DistributionField& F0,
                                const SnapshotHook& snapshot) {
  return solver.run_simulation(F0, snapshot);
}

}  // namespace kbte
