#include <benchmark/benchmark.h>

#include <memory>

#include "kbte/characteristics.hpp"
#include "kbte/collision.hpp"
#include "kbte/solver.hpp"

using namespace kbte;

namespace {

KernelSpec cheap_kernel() {
  KernelSpec k = KernelSpec::hard_sphere();
  k.polar_order = 1;
  k.azimuth_order = 4;
  return k;
}

struct Small {
  std::shared_ptr<const PhaseSpace> space;
  std::shared_ptr<const CollisionModel> model;
};

const Small& small() {
  static const Small s = [] {
    const auto dom = LevelSetDomain::ball();
    Small r;
    r.space = std::make_shared<const PhaseSpace>(dom, PotentialField::zero(dom), SpatialGrid(dom, 6),
                                                 VelocityGrid(4.0, 8), WeightSpec(6.0));
    r.model = std::make_shared<const CollisionModel>(VelocityGrid(4.0, 8), cheap_kernel());
    return r;
  }();
  return s;
}

}  // namespace

static void BM_VerletFlow(benchmark::State& state) {
  const auto dom = LevelSetDomain::ball();
  PotentialSpec spec;
  spec.kind = PotentialKind::Harmonic;
  const PotentialField pot(spec, dom, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow(pot, {Vec3(0.1, 0.2, 0.3), Vec3(0.5, -0.2, 0.1)}, 0.0, -1.0, 1e-3));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_VerletFlow);

static void BM_DiffuseSample(benchmark::State& state) {
  RngStream rng(1, 0);
  const Vec3 n(0.0, 0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_diffuse_velocity(rng, n));
}
BENCHMARK(BM_DiffuseSample);

static void BM_GainAllMaxwellian(benchmark::State& state) {
  const CollisionModel m(VelocityGrid(6.0, static_cast<int>(state.range(0))), KernelSpec::hard_sphere());
  const auto& mu = m.grid().mu();
  for (auto _ : state) benchmark::DoNotOptimize(q_gain_all(m, mu, mu));
  state.counters["nodes"] = static_cast<double>(mu.size());
}
BENCHMARK(BM_GainAllMaxwellian)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_GainBatch(benchmark::State& state) {
  const auto& s = small();
  const std::size_t nx = s.space->nx();
  std::vector<double> q(s.space->size(), 0.1), out(q.size());
  for (auto _ : state) s.model->gain_batch(q.data(), 1.0, q.data(), 1.0, nx, out.data(), 1);
}
BENCHMARK(BM_GainBatch)->Unit(benchmark::kMillisecond);

static void BM_AssembleLinearized(benchmark::State& state) {
  const CollisionModel m(VelocityGrid(5.0, 10), KernelSpec::hard_sphere());
  for (auto _ : state) benchmark::DoNotOptimize(assemble_linearized(m));
}
BENCHMARK(BM_AssembleLinearized)->Unit(benchmark::kMillisecond);

static void BM_TransportApply(benchmark::State& state) {
  const auto& s = small();
  const KineticSolver solver(s.space, s.model, SchemeConfig{});
  const auto& plan = solver.plan();
  std::vector<double> q(s.space->size(), 0.1), out;
  for (auto _ : state) {
    plan.apply(q, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["entries"] = static_cast<double>(plan.entries());
}
BENCHMARK(BM_TransportApply)->Unit(benchmark::kMicrosecond);

static void BM_PositivityStep(benchmark::State& state) {
  const auto& s = small();
  const KineticSolver solver(s.space, s.model, SchemeConfig{});
  const auto F = random_nonnegative(s.space, 1);
  for (auto _ : state) benchmark::DoNotOptimize(solver.positivity_step(F));
}
BENCHMARK(BM_PositivityStep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
