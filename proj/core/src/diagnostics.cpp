#include "kbte/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "kbte/errors.hpp"

namespace kbte {

DiagnosticsSeries::DiagnosticsSeries(std::vector<std::string> channel_names)
    : names_(std::move(channel_names)), channels_(names_.size()) {}

void DiagnosticsSeries::append(double t, const std::vector<double>& values) {
  if (values.size() != names_.size()) throw ValidationError("row does not match channel count");
  if (!times_.empty() && !(t > times_.back())) {
    throw ValidationError("diagnostic times must increase strictly");
  }
  times_.push_back(t);
  for (std::size_t c = 0; c < values.size(); ++c) channels_[c].push_back(values[c]);
}

const std::vector<double>& DiagnosticsSeries::channel(const std::string& name) const {
  for (std::size_t c = 0; c < names_.size(); ++c)
    if (names_[c] == name) return channels_[c];
  throw ValidationError("unknown diagnostic channel: " + name);
}

bool DiagnosticsSeries::has_channel(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::string DiagnosticsSeries::to_csv() const {
  std::string out;
  for (const auto& [k, v] : metadata_) out += fmt::format("# {}={}\n", k, v);
  out += "t";
  for (const auto& n : names_) out += "," + n;
  out += "\n";
  for (std::size_t r = 0; r < times_.size(); ++r) {
    out += fmt::format("{:.17g}", times_[r]);
    for (const auto& ch : channels_) out += fmt::format(",{:.17g}", ch[r]);
    out += "\n";
  }
  return out;
}

DiagnosticsSeries DiagnosticsSeries::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  DiagnosticsSeries series;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      if (cells.empty() || cells[0] != "t") throw ParseError("expected a 't' column", lineno);
      series = DiagnosticsSeries(std::vector<std::string>(cells.begin() + 1, cells.end()));
      have_header = true;
      continue;
    }
    if (cells.size() != series.names_.size() + 1) throw ParseError("ragged row", lineno);
    std::vector<double> row;
    try {
      for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(std::stod(cells[c]));
      series.append(std::stod(cells[0]), row);
    } catch (const std::invalid_argument&) {
      throw ParseError("non-numeric cell", lineno);
    }
  }
  if (!have_header) throw ParseError("missing header row");
  series.metadata_ = std::move(meta);
  return series;
}

double total_mass(const DistributionField& field) {
  if (field.rep == Representation::Full) {
    double s = 0.0;
    for (double x : field.values) s += x;
    return s * field.space->cell_weight();
  }
  return total_mass(field.as(Representation::Full));
}

double relative_entropy(const DistributionField& field, double tolerance) {
  const PhaseSpace& s = *field.space;
  const std::vector<double> q = field.ratio_perturbation();
  const std::size_t nx = s.nx();
  double sum = 0.0;
  for (std::size_t a = 0; a < s.nv(); ++a) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double g = 1.0 + q[a * nx + i];
      const double m = s.mu_E(a, i);
      if (g < -tolerance) throw NegativeDistribution("relative entropy of a negative distribution");
      if (g < 1e-300) {
        sum += m;
        continue;
      }
      sum += m * (g * std::log(g) - g + 1.0);
    }
  }
  return sum * s.cell_weight();
}

EntropyL1L2Report entropy_l1l2_check(const DistributionField& field, double E0, double tolerance) {
  const PhaseSpace& s = *field.space;
  const std::vector<double> f = field.perturbation();
  const std::size_t nx = s.nx();
  EntropyL1L2Report r;
  for (std::size_t a = 0; a < s.nv(); ++a) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double af = std::abs(f[a * nx + i]);
      const double sm = s.sqrt_mu_E(a, i);
      if (af <= sm) {
        r.quadratic += af * af;
      } else {
        r.linear += sm * af;
      }
    }
  }
  r.quadratic *= 0.25 * s.cell_weight();
  r.linear *= 0.25 * s.cell_weight();
  r.bound = E0 + tolerance;
  r.holds = r.lhs() <= r.bound;
  return r;
}

std::vector<double> boundary_trace(const DistributionField& field) {
  const PhaseSpace& s = *field.space;
  const std::vector<double> f = field.perturbation();
  const auto& stations = s.x_grid().stations();
  const std::size_t nx = s.nx();
  std::vector<double> out(stations.size() * s.nv());
  std::array<int, 8> idx;
  std::array<double, 8> w;
  for (std::size_t st = 0; st < stations.size(); ++st) {
    const int n = s.x_grid().stencil(stations[st].x, idx, w);
    const double sq = std::exp(-0.5 * s.potential().phi(stations[st].x));
    for (std::size_t a = 0; a < s.nv(); ++a) {
      // Interpolate the ratio, which is smooth across the wall, then rescale.
      double q = 0.0;
      for (int k = 0; k < n; ++k) {
        const std::size_t node = static_cast<std::size_t>(idx[k]);
        q += w[k] * f[a * nx + node] / s.sqrt_mu_E(a, node);
      }
      out[st * s.nv() + a] = q * sq * s.v_grid().sqrt_mu()[a];
    }
  }
  return out;
}

FieldNorms norms(const DistributionField& field) {
  const PhaseSpace& s = *field.space;
  const std::vector<double> f = field.perturbation();
  FieldNorms out;
  double l2 = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    l2 += f[k] * f[k];
    out.weighted_sup = std::max(out.weighted_sup, std::abs(s.weights()[k] * f[k]));
  }
  out.l2 = std::sqrt(l2 * s.cell_weight());
  const auto trace = boundary_trace(field);
  const auto& stations = s.x_grid().stations();
  double b = 0.0;
  for (std::size_t st = 0; st < stations.size(); ++st) {
    double row = 0.0;
    for (std::size_t a = 0; a < s.nv(); ++a) {
      const double nv = stations[st].n.dot(s.v_grid().node(a));
      if (nv <= 0.0) continue;
      const double t = trace[st * s.nv() + a];
      row += t * t * nv;
    }
    b += stations[st].area * row;
  }
  out.boundary_gamma_plus = std::sqrt(b * s.v_grid().weight());
  return out;
}

DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double t0,
                        double t1) {
  if (t.size() != y.size()) throw ValidationError("time and channel lengths differ");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t0 || t[k] > t1) continue;
    if (!(y[k] > 0.0)) throw NonPositiveChannel("decay fit needs a positive channel");
    const double ly = std::log(y[k]);
    sx += t[k];
    sy += ly;
    sxx += t[k] * t[k];
    sxy += t[k] * ly;
    syy += ly * ly;
    ++n;
  }
  if (n < 2) throw ValidationError("decay fit window holds fewer than two samples");
  DecayFit fit;
  fit.samples = n;
  const double mx = sx / n, my = sy / n;
  const double cxx = sxx / n - mx * mx;
  const double cxy = sxy / n - mx * my;
  const double cyy = syy / n - my * my;
  const double slope = cxy / cxx;
  fit.rate = -slope;
  fit.intercept = my - slope * mx;
  // A constant channel is fitted exactly.
  fit.r_squared = cyy <= 1e-300 * std::max(1.0, my * my) ? 1.0 : (cxy * cxy) / (cxx * cyy);
  return fit;
}

DecayFit fit_decay_rate(const DiagnosticsSeries& series, const std::string& channel, double t0,
                        double t1) {
  return fit_decay_rate(series.times(), series.channel(channel), t0, t1);
}

std::vector<double> rf_ratio(const DistributionField& field, const CollisionModel& model) {
  const PhaseSpace& s = *field.space;
  const std::size_t nx = s.nx(), nv = s.nv();
  const std::vector<double> q = field.ratio_perturbation();
  // R(f) / (e^{-Phi} nu) = 1 + (A (mu q))_a / nu_a at each x.
  Eigen::MatrixXd mq(nv, nx);
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t i = 0; i < nx; ++i) mq(a, i) = s.v_grid().mu()[a] * q[a * nx + i];
  const Eigen::MatrixXd r = model.loss_matrix() * mq;
  std::vector<double> out(s.size());
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t i = 0; i < nx; ++i) out[a * nx + i] = 1.0 + r(a, i) / model.nu()[a];
  return out;
}

double rf_lower_bound_monitor(const DistributionField& field, const CollisionModel& model) {
  const auto r = rf_ratio(field, model);
  return *std::min_element(r.begin(), r.end());
}

double fitted_warmup(const std::vector<double>& t, const std::vector<double>& ratio,
                     double threshold) {
  double warm = t.empty() ? std::numeric_limits<double>::infinity() : t.front();
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (ratio[k] < threshold) {
      warm = k + 1 < t.size() ? t[k + 1] : std::numeric_limits<double>::infinity();
    }
  }
  return warm;
}

CoercivityReport coercivity_report(const LinearOperatorMatrix& lin, const VelocityGrid& grid) {
  CoercivityReport r;
  r.nu0 = lin.nu0;
  const std::size_t n = grid.size();
  std::array<std::vector<double>, 5> e;
  for (auto& x : e) x.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    const Vec3& v = grid.node(a);
    const double s = grid.sqrt_mu()[a];
    e[0][a] = s;
    for (int d = 0; d < 3; ++d) e[1 + d][a] = v[d] * s;
    e[4][a] = (v.squaredNorm() - 3.0) / std::sqrt(6.0) * s;
  }
  for (int k = 0; k < 5; ++k) {
    const auto res = lin.apply_L(e[k]);
    double m = 0.0;
    for (double x : res) m = std::max(m, std::abs(x));
    r.kernel_residuals[k] = m;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lin.L(), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const int keep = static_cast<int>(std::min<std::size_t>(n, 10));
  for (int k = 0; k < keep; ++k) r.eigenvalues.push_back(ev[k]);
  if (keep >= 6) {
    r.spectral_gap = ev[5];
    r.c_L = ev[5];
  }
  return r;
}

KernelDecayFit kernel_row_decay(const LinearOperatorMatrix& lin, const VelocityGrid& grid,
                                const WeightSpec& weight, double alpha, double tail_start,
                                double tail_end) {
  const std::size_t n = grid.size();
  std::vector<double> w(n);
  for (std::size_t a = 0; a < n; ++a) w[a] = weight.of_energy(0.5 * grid.node(a).squaredNorm());
  KernelDecayFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      s += std::abs(lin.K(a, b)) * w[a] / w[b] * std::pow(1.0 + grid.node(b).norm(), -alpha);
    }
    const double speed = grid.node(a).norm();
    fit.speeds.push_back(speed);
    fit.row_sums.push_back(s);
    fit.constant = std::max(fit.constant, s * std::pow(1.0 + speed, 1.0 + alpha));
    if (speed >= tail_start * grid.cutoff() && speed <= tail_end * grid.cutoff() && s > 0.0) {
      const double lx = std::log(1.0 + speed), ly = std::log(s);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++m;
    }
  }
  if (m >= 2) fit.exponent = (sxy / m - (sx / m) * (sy / m)) / (sxx / m - (sx / m) * (sx / m));
  return fit;
}

}  // namespace kbte
