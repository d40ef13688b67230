#include <benchmark/benchmark.h>

#include <cmath>

#include "vff/control.hpp"
#include "vff/plan.hpp"
#include "vff/reference.hpp"
#include "vff/sim.hpp"
#include "vff/spline.hpp"

namespace {

using namespace vff;

BSplineTrajectory make_curve(Index n_ctrl) {
  Matrix ctrl(n_ctrl, 2);
  for (Index i = 0; i < n_ctrl; ++i) {
    ctrl(i, 0) = std::sin(0.3 * static_cast<double>(i));
    ctrl(i, 1) = std::cos(0.2 * static_cast<double>(i));
  }
  return BSplineTrajectory(3, make_clamped_uniform_knots(n_ctrl, 3, 0.0, 1.0), ctrl);
}

TrajectorySamples make_samples(Index count) {
  TrajectorySamples s;
  s.positions.resize(count, 2);
  for (Index j = 0; j < count; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(count - 1);
    s.times.push_back(t);
    s.positions(j, 0) = std::sin(6.0 * t);
    s.positions(j, 1) = t * t;
  }
  return s;
}

void BM_SplineEval(benchmark::State& state) {
  const auto curve = make_curve(state.range(0));
  const int order = static_cast<int>(state.range(1));
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(curve.eval(t, order));
    t += 0.0137;
    if (t > 1.0) t -= 1.0;
  }
}
BENCHMARK(BM_SplineEval)->ArgsProduct({{8, 64, 512}, {0, 2}});

void BM_SplineReference(benchmark::State& state) {
  const auto curve = make_curve(32);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spline_reference(curve, t));
    t += 0.0137;
    if (t > 1.0) t -= 1.0;
  }
}
BENCHMARK(BM_SplineReference);

void BM_FitLeastSquares(benchmark::State& state) {
  const auto samples = make_samples(state.range(0));
  const Index n_ctrl = default_control_point_count(samples.size());
  for (auto _ : state) benchmark::DoNotOptimize(fit_least_squares(samples, n_ctrl));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitLeastSquares)->RangeMultiplier(4)->Range(16, 16384)->Complexity(benchmark::oN);

void BM_ControllerStep(benchmark::State& state) {
  const Gains gains = Gains::defaults(2);
  ControllerState s = ControllerState::at_rest(Vector::Zero(2));
  const ReferenceSample ref{Vector::Constant(2, 0.01), Vector::Constant(2, 0.1), Vector::Zero(2)};
  const Vector f = Vector::Zero(2);
  const auto integrator = static_cast<Integrator>(state.range(0));
  for (auto _ : state) {
    s = step(s, ref, f, gains, 0.002, integrator);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_ControllerStep)->Arg(0)->Arg(1);

void BM_ContactForce(benchmark::State& state) {
  const Scenario peg = Scenario::peg_in_hole();
  Vector x(2);
  x << 0.0007, -0.01;
  const Vector v = Vector::Zero(2);
  for (auto _ : state) benchmark::DoNotOptimize(contact_force(peg, x, v));
}
BENCHMARK(BM_ContactForce);

void BM_Episode(benchmark::State& state) {
  const PegInHoleGeometry geometry;
  Vector start(2);
  start << 0.25, 0.2;
  const Plan plan = make_insertion_plan(start, geometry, {}, 0);
  const Scenario scenario = Scenario::peg_in_hole(geometry);
  EpisodeConfig cfg;
  cfg.mode = static_cast<ReferenceMode>(state.range(0));
  cfg.f_action = 15.0;
  std::int64_t steps = 0;
  for (auto _ : state) {
    const auto trace = run_episode(plan, cfg, scenario);
    steps += trace.steps();
    benchmark::DoNotOptimize(trace.success_time);
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Episode)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
