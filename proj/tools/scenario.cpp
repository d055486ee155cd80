#include "scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kbte/errors.hpp"
#include "kbte/snapshot.hpp"

namespace kbte::cli {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? -1 : n.Mark().line + 1; }

class Block {
 public:
  Block(const YAML::Node& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ParseError("'" + path_ + "' must be a mapping", line_of(node_), path_);
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        throw ParseError("unknown key '" + qualified(key) + "'", line_of(kv.first), qualified(key));
      }
    }
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  YAML::Node child(const std::string& key) const { return node_[key]; }
  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <typename T>
  void get(const std::string& key, T& out) const {
    const YAML::Node n = node_[key];
    if (!n) return;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      throw ParseError("bad value for '" + qualified(key) + "'", line_of(n), qualified(key));
    }
  }

  void get_vec(const std::string& key, Vec3& out) const {
    const YAML::Node n = node_[key];
    if (!n) return;
    if (!n.IsSequence() || n.size() != 3) {
      throw ParseError("'" + qualified(key) + "' must be a list of three numbers", line_of(n),
                       qualified(key));
    }
    std::vector<double> v;
    get(key, v);
    out = Vec3(v[0], v[1], v[2]);
  }

  template <typename E>
  void get_enum(const std::string& key, E& out, const std::map<std::string, E>& names) const {
    if (!has(key)) return;
    std::string s;
    get(key, s);
    const auto it = names.find(s);
    if (it == names.end()) {
      std::string options;
      for (const auto& [k, v] : names) options += (options.empty() ? "" : ", ") + k;
      throw ParseError("'" + qualified(key) + "' must be one of: " + options, line_of(node_[key]),
                       qualified(key));
    }
    out = it->second;
  }

 private:
  YAML::Node node_;
  std::string path_;
};

void read_domain(const Block& b, DomainSpec& d) {
  b.get_enum("kind", d.kind,
             std::map<std::string, DomainKind>{{"ball", DomainKind::Ball},
                                               {"ellipsoid", DomainKind::Ellipsoid}});
  b.get("radius", d.radius);
  b.get_vec("semi_axes", d.semi_axes);
  b.get_vec("center", d.center);
}

void read_potential(const Block& b, PotentialSpec& p) {
  b.get_enum("kind", p.kind,
             std::map<std::string, PotentialKind>{{"zero", PotentialKind::Zero},
                                                  {"harmonic", PotentialKind::Harmonic},
                                                  {"gaussian_bump", PotentialKind::GaussianBump}});
  b.get("kappa", p.kappa);
  b.get("amplitude", p.amplitude);
  b.get("width", p.width);
  b.get_vec("center", p.center);
}

void read_scheme(const Block& b, SchemeConfig& s) {
  b.get("dt", s.dt);
  b.get("t_end", s.t_end);
  b.get("interpolation_order", s.interpolation_order);
  b.get_enum("damping", s.damping,
             std::map<std::string, DampingMode>{
                 {"none", DampingMode::None}, {"nu", DampingMode::Nu}, {"rf", DampingMode::Rf}});
  b.get_enum("kind", s.kind,
             std::map<std::string, SchemeKind>{{"positivity", SchemeKind::Positivity},
                                               {"linear", SchemeKind::Linear}});
  b.get("picard_max_iterations", s.picard_max_iterations);
  b.get("picard_tolerance", s.picard_tolerance);
  b.get("picard_t_end", s.picard_t_end);
  b.get("symmetrized", s.symmetrized);
  b.get("conserve_mass", s.conserve_mass);
  b.get("output_every", s.output_every);
  b.get("integrator_step", s.integrator_step);
}

}  // namespace

void Scenario::validate() const {
  if (domain.kind == DomainKind::Ball && !(domain.radius > 0.0)) {
    throw ValidationError("domain radius must be positive");
  }
  if (domain.kind == DomainKind::Ellipsoid && !(domain.semi_axes.minCoeff() > 0.0)) {
    throw ValidationError("ellipsoid semi-axes must be positive");
  }
  if (potential.kind == PotentialKind::Harmonic && !(potential.kappa >= 0.0)) {
    throw ValidationError("harmonic kappa must be nonnegative");
  }
  if (potential.kind == PotentialKind::GaussianBump && !(potential.width > 0.0)) {
    throw ValidationError("gaussian potential width must be positive");
  }
  kernel.validate();
  WeightSpec{beta};
  if (grid.spatial_points < 2) throw ValidationError("spatial points per axis must be at least 2");
  if (!(grid.velocity_cutoff > 0.0)) throw ValidationError("velocity cutoff must be positive");
  if (grid.velocity_points < 2 || grid.velocity_points % 2 != 0) {
    throw ValidationError("velocity points per axis must be even and at least 2");
  }
  if (initial.kind == InitialKind::Bump && !(initial.radius > 0.0)) {
    throw ValidationError("bump radius must be positive");
  }
  if (!(initial.amplitude >= 0.0)) throw ValidationError("initial amplitude must be nonnegative");
  scheme.validate();
  if (!(semigroup.fit_end > semigroup.fit_start)) {
    throw ValidationError("semigroup fit window must be nonempty");
  }
  if (!(cycles.t > 0.0) || cycles.samples < 1 || cycles.ks.empty()) {
    throw ValidationError("cycles need t > 0, samples >= 1 and at least one k");
  }
  for (int k : cycles.ks) {
    if (k < 1) throw ValidationError("cycle counts must be >= 1");
  }
  if (sweep.enabled && (!(sweep.start > 0.0) || !(sweep.factor > 1.0) || sweep.iterations < 2)) {
    throw ValidationError("sweep needs start > 0, factor > 1 and iterations >= 2");
  }
  if (!(kernel_check.tail_start < kernel_check.tail_end)) {
    throw ValidationError("kernel tail window must be nonempty");
  }
}

LevelSetDomain Scenario::make_domain() const {
  if (domain.kind == DomainKind::Ellipsoid) return LevelSetDomain::ellipsoid(domain.semi_axes, domain.center);
  return LevelSetDomain::ball(domain.radius, domain.center);
}

std::shared_ptr<const PhaseSpace> Scenario::make_space() const {
  const LevelSetDomain dom = make_domain();
  return std::make_shared<const PhaseSpace>(dom, PotentialField(potential, dom),
                                            SpatialGrid(dom, grid.spatial_points),
                                            VelocityGrid(grid.velocity_cutoff, grid.velocity_points),
                                            WeightSpec(beta));
}

std::shared_ptr<const CollisionModel> Scenario::make_model() const {
  return std::make_shared<const CollisionModel>(
      VelocityGrid(grid.velocity_cutoff, grid.velocity_points), kernel);
}

DistributionField Scenario::make_initial(const std::shared_ptr<const PhaseSpace>& space) const {
  switch (initial.kind) {
    case InitialKind::Equilibrium:
      return DistributionField::equilibrium(space);
    case InitialKind::SmallPerturbation:
      if (initial.mode == PerturbationMode::Smooth) return smooth_perturbation(space, initial.amplitude);
      return random_perturbation(space, initial.amplitude, seed);
    case InitialKind::Bump:
      return bump_initial(space, initial.amplitude, initial.center, initial.radius);
    case InitialKind::RandomNonnegative:
      return random_nonnegative(space, seed);
  }
  throw ValidationError("unknown initial condition");
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1);
  }
  Scenario s;
  s.hash = git_blob_hash(text);
  if (root.IsNull()) {
    s.validate();
    return s;
  }
  const Block top(root, "",
                  {"name", "seed", "domain", "potential", "kernel", "grid", "weight", "initial",
                   "scheme", "semigroup", "cycles", "sweep", "kernel_check", "output"});
  top.get("name", s.name);
  top.get("seed", s.seed);
  if (top.has("domain")) {
    read_domain(Block(top.child("domain"), "domain", {"kind", "radius", "semi_axes", "center"}),
                s.domain);
  }
  if (top.has("potential")) {
    read_potential(Block(top.child("potential"), "potential",
                         {"kind", "kappa", "amplitude", "width", "center"}),
                   s.potential);
  }
  if (top.has("kernel")) {
    const Block b(top.child("kernel"), "kernel",
                  {"gamma", "angular_scale", "polar_order", "azimuth_order"});
    b.get("gamma", s.kernel.gamma);
    b.get("angular_scale", s.kernel.angular_scale);
    b.get("polar_order", s.kernel.polar_order);
    b.get("azimuth_order", s.kernel.azimuth_order);
  }
  if (top.has("grid")) {
    const Block b(top.child("grid"), "grid",
                  {"spatial_points", "velocity_cutoff", "velocity_points"});
    b.get("spatial_points", s.grid.spatial_points);
    b.get("velocity_cutoff", s.grid.velocity_cutoff);
    b.get("velocity_points", s.grid.velocity_points);
  }
  if (top.has("weight")) Block(top.child("weight"), "weight", {"beta"}).get("beta", s.beta);
  if (top.has("initial")) {
    const Block b(top.child("initial"), "initial", {"kind", "amplitude", "mode", "center", "radius"});
    b.get_enum("kind", s.initial.kind,
               std::map<std::string, InitialKind>{
                   {"equilibrium", InitialKind::Equilibrium},
                   {"small_perturbation", InitialKind::SmallPerturbation},
                   {"bump", InitialKind::Bump},
                   {"random_nonnegative", InitialKind::RandomNonnegative}});
    b.get("amplitude", s.initial.amplitude);
    b.get_enum("mode", s.initial.mode,
               std::map<std::string, PerturbationMode>{{"random", PerturbationMode::Random},
                                                       {"smooth", PerturbationMode::Smooth}});
    b.get_vec("center", s.initial.center);
    b.get("radius", s.initial.radius);
  }
  if (top.has("scheme")) {
    read_scheme(Block(top.child("scheme"), "scheme",
                      {"dt", "t_end", "interpolation_order", "damping", "kind",
                       "picard_max_iterations", "picard_tolerance", "picard_t_end", "symmetrized",
                       "conserve_mass", "output_every", "integrator_step"}),
                s.scheme);
  }
  if (top.has("semigroup")) {
    const Block b(top.child("semigroup"), "semigroup", {"fit_start", "fit_end"});
    b.get("fit_start", s.semigroup.fit_start);
    b.get("fit_end", s.semigroup.fit_end);
  }
  if (top.has("cycles")) {
    const Block b(top.child("cycles"), "cycles", {"t", "ks", "samples", "position", "velocity"});
    b.get("t", s.cycles.t);
    b.get("ks", s.cycles.ks);
    b.get("samples", s.cycles.samples);
    b.get_vec("position", s.cycles.position);
    b.get_vec("velocity", s.cycles.velocity);
  }
  if (top.has("sweep")) {
    const Block b(top.child("sweep"), "sweep", {"start", "factor", "max_amplitude", "iterations"});
    s.sweep.enabled = true;
    b.get("start", s.sweep.start);
    b.get("factor", s.sweep.factor);
    b.get("max_amplitude", s.sweep.max_amplitude);
    b.get("iterations", s.sweep.iterations);
  }
  if (top.has("kernel_check")) {
    const Block b(top.child("kernel_check"), "kernel_check", {"alpha", "tail_start", "tail_end"});
    b.get("alpha", s.kernel_check.alpha);
    b.get("tail_start", s.kernel_check.tail_start);
    b.get("tail_end", s.kernel_check.tail_end);
  }
  if (top.has("output")) {
    std::string dir = s.output_dir.string();
    Block(top.child("output"), "output", {"directory"}).get("directory", dir);
    s.output_dir = dir;
  }
  s.scheme.seed = s.seed;
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace kbte::cli
