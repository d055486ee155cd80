#include "commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>

#include "kbte/characteristics.hpp"
#include "kbte/diagnostics.hpp"
#include "kbte/errors.hpp"
#include "kbte/rng.hpp"
#include "kbte/snapshot.hpp"
#include "svg_plot.hpp"
#include "table.hpp"

namespace kbte::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  Scenario sc;
  RunOptions opt;
  fs::path out;
  std::map<std::string, std::string> meta;
  std::ostream* log = nullptr;

  json header() const {
    json j;
    for (const auto& [k, v] : meta) j[k] = v;
    return j;
  }
  std::string provenance() const {
    return fmt::format("scenario_hash={} seed={} workers={}", meta.at("scenario_hash"),
                       meta.at("seed"), meta.at("workers"));
  }
  void write(const std::string& name, const std::string& text) const {
    write_text(out / name, text);
    *log << "  wrote " << (out / name).string() << '\n';
  }
};

Context make_context(const std::string& command, Scenario sc, const RunOptions& opt,
                     std::ostream& log) {
  Context c;
  if (opt.seed) sc.seed = *opt.seed;
  sc.scheme.seed = sc.seed;
  sc.scheme.workers = std::max(1, opt.workers);
  sc.validate();
  c.out = opt.out ? *opt.out : sc.output_dir;
  c.meta = {{"scenario_hash", sc.hash},
            {"scenario", sc.name},
            {"seed", std::to_string(sc.seed)},
            {"workers", std::to_string(sc.scheme.workers)},
            {"command", command}};
  c.sc = std::move(sc);
  c.opt = opt;
  c.log = &log;
  return c;
}

double relative_entropy_or_nan(const DistributionField& F) {
  try {
    return relative_entropy(F);
  } catch (const NegativeDistribution&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::vector<double> full_values(const DistributionField& F) {
  return F.as(Representation::Full).values;
}

SnapshotHook snapshot_hook(const Context& c, std::function<void(int, double, const DistributionField&)> also) {
  auto counter = std::make_shared<int>(0);
  const int every = c.opt.snapshot_every;
  const fs::path dir = c.out / "snapshots";
  const auto meta = c.meta;
  return [=](int step, double t, const DistributionField& F) {
    if (also) also(step, t, F);
    if (every > 0 && (*counter)++ % every == 0) {
      write_snapshot(dir / fmt::format("step_{:06d}", step), F, step, t, meta);
    }
  };
}

void cmd_simulate(const Context& c) {
  const auto space = c.sc.make_space();
  const KineticSolver solver(space, c.sc.make_model(), c.sc.scheme);
  const auto F0 = c.sc.make_initial(space);
  *c.log << fmt::format("simulate: {} x {} nodes, dt {}, t_end {}\n", space->nx(), space->nv(),
                        c.sc.scheme.dt, c.sc.scheme.t_end);
  auto r = solver.run_simulation(F0, snapshot_hook(c, {}));
  for (const auto& [k, v] : c.meta) r.series.metadata()[k] = v;
  c.write("simulate.csv", r.series.to_csv());

  const double m0 = total_mass(F0);
  double drift = 0.0, worst_entropy_step = -std::numeric_limits<double>::infinity();
  for (double m : r.step_mass) drift = std::max(drift, std::abs(m - m0) / m0);
  double prev = relative_entropy_or_nan(F0);
  for (double e : r.step_entropy) {
    if (std::isfinite(prev) && std::isfinite(e) && prev > 0.0) {
      worst_entropy_step = std::max(worst_entropy_step, (e - prev) / prev);
    }
    prev = e;
  }
  const auto Ffinal = full_values(r.final_state);
  const auto& winf = r.series.channel("winf_norm");
  const auto& rf = r.series.channel("rf_min_ratio");
  json j = c.header();
  j["steps"] = r.step_mass.size();
  j["max_relative_mass_drift"] = drift;
  j["max_relative_entropy_step_change"] = number(worst_entropy_step);
  j["min_F_final"] = *std::min_element(Ffinal.begin(), Ffinal.end());
  j["winf_initial"] = winf.front();
  j["winf_final"] = winf.back();
  j["rf_min_ratio"] = number(*std::min_element(rf.begin(), rf.end()));
  c.write("simulate.json", j.dump(2) + "\n");
}

void cmd_semigroup(const Context& c) {
  const auto space = c.sc.make_space();
  const KineticSolver solver(space, c.sc.make_model(), c.sc.scheme);
  const auto F0 = c.sc.make_initial(space);
  auto h = F0.as(Representation::WeightedPerturbation);
  if (std::all_of(h.values.begin(), h.values.end(), [](double x) { return x == 0.0; })) {
    throw ValidationError("semigroup needs a nonzero initial perturbation");
  }
  const DampingMode mode = c.sc.scheme.damping;
  const DistributionField frozen = F0.as(Representation::Full);
  const double dt = c.sc.scheme.dt, every = c.sc.scheme.output_every;
  const long outputs = std::lround(c.sc.scheme.t_end / every);
  DiagnosticsSeries series({"winf_norm", "l2_norm"});
  for (const auto& [k, v] : c.meta) series.metadata()[k] = v;
  auto record = [&](double t) {
    const auto n = norms(h);
    series.append(t, {n.weighted_sup, n.l2});
  };
  record(0.0);
  *c.log << fmt::format("semigroup: {} outputs of {} ({} steps each)\n", outputs, every,
                        std::lround(every / dt));
  for (long k = 1; k <= outputs; ++k) {
    h = solver.damped_semigroup(h, mode, every, mode == DampingMode::Rf ? &frozen : nullptr);
    record(static_cast<double>(k) * every);
  }
  c.write("semigroup.csv", series.to_csv());
  const auto fit = fit_decay_rate(series, "winf_norm", c.sc.semigroup.fit_start, c.sc.semigroup.fit_end);
  const double nu0 = solver.model().nu0();
  json j = c.header();
  j["nu0"] = nu0;
  j["rate"] = fit.rate;
  j["rate_over_nu0"] = fit.rate / nu0;
  j["r_squared"] = fit.r_squared;
  j["fit_samples"] = fit.samples;
  j["fit_window"] = {c.sc.semigroup.fit_start, c.sc.semigroup.fit_end};
  c.write("semigroup.json", j.dump(2) + "\n");
  *c.log << fmt::format("  rate {:.4g} = {:.4f} nu0, r^2 {:.6f}\n", fit.rate, fit.rate / nu0,
                        fit.r_squared);
}

void cmd_cycles(const Context& c) {
  const LevelSetDomain dom = c.sc.make_domain();
  const PotentialField pot(c.sc.potential, dom);
  const auto& cy = c.sc.cycles;
  *c.log << fmt::format("cycles: t = {}, {} samples\n", cy.t, cy.samples);
  const auto est = cycle_reach_curve(dom, pot, cy.t, PhasePoint{cy.position, cy.velocity}, cy.ks,
                                     cy.samples, c.sc.seed, c.sc.scheme.workers);
  Table t;
  t.metadata = c.meta;
  t.columns = {"k", "estimate", "std_error", "samples"};
  for (const auto& e : est) {
    t.rows.push_back({static_cast<double>(e.k), e.estimate, e.std_error, static_cast<double>(e.n_samples)});
  }
  c.write("cycles.csv", t.to_csv());
  bool monotone = true;
  for (std::size_t k = 1; k < est.size(); ++k) {
    const double se = std::hypot(est[k].std_error, est[k - 1].std_error);
    if (est[k].estimate > est[k - 1].estimate + 2.0 * se) monotone = false;
  }
  json j = c.header();
  j["nonincreasing_within_2se"] = monotone;
  j["last_over_first"] = number(est.front().estimate > 0.0 ? est.back().estimate / est.front().estimate
                                                           : std::numeric_limits<double>::quiet_NaN());
  c.write("cycles.json", j.dump(2) + "\n");
}

void cmd_kernel_check(const Context& c) {
  const auto model = c.sc.make_model();
  const VelocityGrid& g = model->grid();
  const int workers = c.sc.scheme.workers;
  *c.log << fmt::format("kernel-check: {} velocity nodes\n", g.size());
  const auto lin = assemble_linearized(*model, workers);
  const auto rep = coercivity_report(lin, g);
  const auto& kc = c.sc.kernel_check;
  const auto decay = kernel_row_decay(lin, g, WeightSpec(c.sc.beta), kc.alpha, kc.tail_start, kc.tail_end);

  const auto& mu = g.mu();
  const auto gain = q_gain_all(*model, mu, mu);
  const auto loss = q_loss_all(*model, mu, mu);
  double eq_residual = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a) {
    eq_residual = std::max(eq_residual, std::abs(gain[a] - loss[a]) / (mu[a] * model->nu()[a]));
  }
  RngStream rng(c.sc.seed, 0);
  std::vector<double> F(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) F[a] = mu[a] * (1.0 + 0.5 * (2.0 * rng.uniform() - 1.0));
  const auto Q = q_symmetrized(*model, F, workers);
  const auto lossF = q_loss_all(*model, F, F);
  double scale = 0.0, inv[5] = {0, 0, 0, 0, 0};
  for (std::size_t a = 0; a < g.size(); ++a) {
    const Vec3& v = g.node(a);
    scale += lossF[a];
    inv[0] += Q[a];
    for (int d = 0; d < 3; ++d) inv[1 + d] += Q[a] * v[d];
    inv[4] += Q[a] * v.squaredNorm();
  }
  double inv_residual = 0.0;
  for (double x : inv) inv_residual = std::max(inv_residual, std::abs(x) / scale);

  Table rows;
  rows.metadata = c.meta;
  rows.columns = {"speed", "row_sum"};
  for (std::size_t a = 0; a < decay.speeds.size(); ++a) rows.rows.push_back({decay.speeds[a], decay.row_sums[a]});
  c.write("kernel_rows.csv", rows.to_csv());

  json j = c.header();
  j["nu0"] = rep.nu0;
  j["kernel_residuals"] = rep.kernel_residuals;
  j["eigenvalues"] = rep.eigenvalues;
  j["spectral_gap"] = rep.spectral_gap;
  j["c_L"] = rep.c_L;
  j["equilibrium_residual"] = eq_residual;
  j["symmetrized_invariant_residual"] = inv_residual;
  j["row_decay_exponent"] = decay.exponent;
  j["row_decay_constant"] = decay.constant;
  j["alpha"] = kc.alpha;
  c.write("kernel_check.json", j.dump(2) + "\n");
  *c.log << fmt::format("  gap {:.4g}, decay exponent {:.3f}\n", rep.spectral_gap, decay.exponent);
}

void cmd_entropy(const Context& c) {
  const auto space = c.sc.make_space();
  const KineticSolver solver(space, c.sc.make_model(), c.sc.scheme);
  const auto F0 = c.sc.make_initial(space);
  const double E0 = relative_entropy(F0);
  DiagnosticsSeries series({"entropy", "quadratic", "linear", "lhs", "bound", "holds"});
  for (const auto& [k, v] : c.meta) series.metadata()[k] = v;
  series.metadata()["E0"] = fmt::format("{:.17g}", E0);
  bool all = true;
  auto check = [&](int, double t, const DistributionField& F) {
    const auto r = entropy_l1l2_check(F, E0);
    all = all && r.holds;
    series.append(t, {relative_entropy(F), r.quadratic, r.linear, r.lhs(), r.bound, r.holds ? 1.0 : 0.0});
  };
  *c.log << fmt::format("entropy: E0 = {:.6g}\n", E0);
  solver.run_simulation(F0, snapshot_hook(c, check));
  c.write("entropy.csv", series.to_csv());
  json j = c.header();
  j["E0"] = E0;
  j["holds_at_every_output"] = all;
  j["outputs"] = series.size();
  c.write("entropy.json", j.dump(2) + "\n");
}

void cmd_picard(const Context& c) {
  const auto space = c.sc.make_space();
  const KineticSolver solver(space, c.sc.make_model(), c.sc.scheme);
  const auto h0 = c.sc.make_initial(space).as(Representation::WeightedPerturbation);
  double amplitude = 0.0;
  for (double x : h0.values) amplitude = std::max(amplitude, std::abs(x));
  *c.log << fmt::format("picard: amplitude {:.4g}, horizon {}\n", amplitude, c.sc.scheme.picard_t_end);
  const auto r = solver.picard_mild_iteration(h0, false);
  Table t;
  t.metadata = c.meta;
  t.columns = {"iteration", "residual", "ratio"};
  for (std::size_t m = 0; m < r.residuals.size(); ++m) {
    t.rows.push_back({static_cast<double>(m), r.residuals[m],
                      m == 0 ? std::numeric_limits<double>::quiet_NaN() : r.ratios[m - 1]});
  }
  c.write("picard.csv", t.to_csv());
  const double max_ratio =
      r.ratios.empty() ? 0.0 : *std::max_element(r.ratios.begin(), r.ratios.end());
  json j = c.header();
  j["amplitude"] = amplitude;
  j["converged"] = r.converged;
  j["contractive"] = r.contractive;
  j["iterations"] = r.residuals.size();
  j["max_ratio"] = max_ratio;
  j["ratios"] = r.ratios;
  if (c.sc.sweep.enabled) {
    const auto& sw = c.sc.sweep;
    const auto s = contraction_sweep(solver, c.sc.seed, sw.start, sw.factor, sw.max_amplitude, sw.iterations);
    Table st;
    st.metadata = c.meta;
    st.columns = {"amplitude", "max_ratio", "contractive"};
    for (std::size_t k = 0; k < s.amplitudes.size(); ++k) {
      st.rows.push_back({s.amplitudes[k], s.max_ratios[k], s.contractive[k] ? 1.0 : 0.0});
    }
    c.write("picard_sweep.csv", st.to_csv());
    j["sweep_last_contractive"] = s.last_contractive;
    j["sweep_threshold"] = number(s.threshold);
    *c.log << fmt::format("  contraction threshold in ({:.4g}, {:.4g}]\n", s.last_contractive, s.threshold);
  }
  c.write("picard.json", j.dump(2) + "\n");
  if (!r.contractive) {
    throw NonContractive(fmt::format(
        "Picard iteration is not contractive at amplitude {:.4g} (residual ratio {:.4g})", amplitude,
        max_ratio));
  }
  if (!r.converged) {
    throw NoConvergence(fmt::format("Picard iteration did not reach tolerance in {} iterations",
                                    r.residuals.size()));
  }
  *c.log << fmt::format("  converged in {} iterations, max ratio {:.4g}\n", r.residuals.size(), max_ratio);
}

Table read_table(const fs::path& p) { return Table::from_csv(read_text(p)); }

void cmd_report(const Context& c) {
  json j = c.header();
  j["outputs"] = json::object();
  PlotSpec base;
  base.provenance = c.provenance();
  int found = 0;
  auto plot = [&](const std::string& name, PlotSpec spec, std::vector<PlotSeries> s) {
    spec.provenance = base.provenance;
    c.write(name, render_svg(spec, s));
  };
  auto source = [](const Table& t) {
    json m;
    for (const auto& [k, v] : t.metadata) m[k] = v;
    return m;
  };
  if (fs::exists(c.out / "simulate.csv")) {
    ++found;
    const Table t = read_table(c.out / "simulate.csv");
    const auto time = t.column("t"), mass = t.column("mass"), ent = t.column("entropy"),
               winf = t.column("winf_norm"), l2 = t.column("l2_norm"), rf = t.column("rf_min_ratio");
    double drift = 0.0;
    for (double m : mass) drift = std::max(drift, std::abs(m - mass.front()) / mass.front());
    json s = source(t);
    s["rows"] = t.rows.size();
    s["max_relative_mass_drift"] = drift;
    s["entropy_initial"] = number(ent.front());
    s["entropy_final"] = number(ent.back());
    s["winf_initial"] = winf.front();
    s["winf_final"] = winf.back();
    s["rf_min_ratio"] = number(*std::min_element(rf.begin(), rf.end()));
    j["outputs"]["simulate"] = s;
    plot("simulate_norms.svg", {"Perturbation norms", "t", "norm", true, {}},
         {{"sup |w f|", time, winf}, {"L2", time, l2}});
    plot("simulate_entropy.svg", {"Relative entropy", "t", "E(F)", true, {}}, {{"E", time, ent}});
  }
  if (fs::exists(c.out / "semigroup.csv")) {
    ++found;
    const Table t = read_table(c.out / "semigroup.csv");
    const auto time = t.column("t"), winf = t.column("winf_norm");
    const auto fit = fit_decay_rate(time, winf, c.sc.semigroup.fit_start, c.sc.semigroup.fit_end);
    json s = source(t);
    s["rate"] = fit.rate;
    s["r_squared"] = fit.r_squared;
    j["outputs"]["semigroup"] = s;
    std::vector<double> model(time.size());
    for (std::size_t k = 0; k < time.size(); ++k) model[k] = std::exp(fit.intercept - fit.rate * time[k]);
    plot("semigroup.svg", {"Damped semigroup", "t", "sup |w h|", true, {}},
         {{"measured", time, winf}, {"fit", time, model}});
  }
  if (fs::exists(c.out / "cycles.csv")) {
    ++found;
    const Table t = read_table(c.out / "cycles.csv");
    json s = source(t);
    s["k"] = t.column("k");
    s["estimate"] = t.column("estimate");
    s["std_error"] = t.column("std_error");
    j["outputs"]["cycles"] = s;
    plot("cycles.svg", {"Back-time cycles reaching t_k > 0", "k", "probability", false, {}},
         {{"estimate", t.column("k"), t.column("estimate")}});
  }
  if (fs::exists(c.out / "picard.csv")) {
    ++found;
    const Table t = read_table(c.out / "picard.csv");
    json s = source(t);
    s["residuals"] = t.column("residual");
    j["outputs"]["picard"] = s;
    plot("picard.svg", {"Picard residuals", "iteration", "sup |h^(m+1) - h^m|", true, {}},
         {{"residual", t.column("iteration"), t.column("residual")}});
  }
  if (fs::exists(c.out / "entropy.csv")) {
    ++found;
    const Table t = read_table(c.out / "entropy.csv");
    const auto holds = t.column("holds");
    json s = source(t);
    s["holds_at_every_output"] = std::all_of(holds.begin(), holds.end(), [](double x) { return x == 1.0; });
    j["outputs"]["entropy"] = s;
    plot("entropy_l1l2.svg", {"L1/L2 entropy control", "t", "value", false, {}},
         {{"functional", t.column("t"), t.column("lhs")}, {"E(F0)", t.column("t"), t.column("bound")}});
  }
  if (fs::exists(c.out / "kernel_check.json")) {
    ++found;
    j["outputs"]["kernel_check"] = json::parse(read_text(c.out / "kernel_check.json"));
  }
  if (found == 0) throw IoError("no outputs to report in " + c.out.string());
  c.write("report.json", j.dump(2) + "\n");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "semigroup", "cycles", "kernel-check",
                                              "entropy",  "picard",    "report"};
  return names;
}

void run_command(const std::string& command, Scenario scenario, const RunOptions& options,
                 std::ostream& log) {
  static const std::map<std::string, std::function<void(const Context&)>> table{
      {"simulate", cmd_simulate}, {"semigroup", cmd_semigroup}, {"cycles", cmd_cycles},
      {"kernel-check", cmd_kernel_check}, {"entropy", cmd_entropy}, {"picard", cmd_picard},
      {"report", cmd_report}};
  const auto it = table.find(command);
  if (it == table.end()) throw ValidationError("unknown command '" + command + "'");
  it->second(make_context(command, std::move(scenario), options, log));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  return 1;
}

int dispatch(const std::string& command, const Scenario& scenario, const RunOptions& options,
             std::ostream& log, std::ostream& err) {
  try {
    run_command(command, scenario, options, log);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace kbte::cli
