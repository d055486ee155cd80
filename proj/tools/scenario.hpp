#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "kbte/collision.hpp"
#include "kbte/phase_space.hpp"
#include "kbte/solver.hpp"

namespace kbte::cli {

struct DomainSpec {
  DomainKind kind = DomainKind::Ball;
  double radius = 1.0;
  Vec3 semi_axes = Vec3::Ones();
  Vec3 center = Vec3::Zero();
};

struct GridSpec {
  int spatial_points = 8;
  double velocity_cutoff = 4.0;
  int velocity_points = 8;
};

enum class InitialKind { Equilibrium, SmallPerturbation, Bump, RandomNonnegative };
enum class PerturbationMode { Random, Smooth };

struct InitialSpec {
  InitialKind kind = InitialKind::Equilibrium;
  double amplitude = 0.0;
  PerturbationMode mode = PerturbationMode::Random;
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
};

struct SemigroupSpec {
  double fit_start = 0.5;
  double fit_end = 5.0;
};

struct CyclesSpec {
  double t = 5.0;
  std::vector<int> ks{5, 10, 20, 40};
  int samples = 10000;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3(1.0, 0.0, 0.0);
};

struct SweepSpec {
  bool enabled = false;
  double start = 1.0;
  double factor = 3.1622776601683795;
  double max_amplitude = 1e4;
  int iterations = 6;
};

struct KernelCheckSpec {
  double alpha = 1.0;
  double tail_start = 0.5;
  double tail_end = 0.9;
};

struct Scenario {
  std::string name = "scenario";
  DomainSpec domain;
  PotentialSpec potential;
  KernelSpec kernel = KernelSpec::hard_sphere();
  GridSpec grid;
  double beta = 6.0;
  InitialSpec initial;
  SchemeConfig scheme;
  SemigroupSpec semigroup;
  CyclesSpec cycles;
  SweepSpec sweep;
  KernelCheckSpec kernel_check;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  /// git blob hash of the scenario text.
  std::string hash;

  /// Checks every sub-spec invariant; throws ValidationError.
  void validate() const;

  LevelSetDomain make_domain() const;
  std::shared_ptr<const PhaseSpace> make_space() const;
  std::shared_ptr<const CollisionModel> make_model() const;
  DistributionField make_initial(const std::shared_ptr<const PhaseSpace>& space) const;
};

/// Strict loader: unknown keys and malformed values raise ParseError with the
/// offending line and key; violated invariants raise ValidationError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace kbte::cli
