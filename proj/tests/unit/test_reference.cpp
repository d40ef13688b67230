#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vff/errors.hpp"
#include "vff/plan.hpp"
#include "vff/reference.hpp"

namespace vff {
namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

ActionChunk chunk_1d(std::initializer_list<double> xs, double dt, double start = 0.0) {
  ActionChunk c;
  c.start_time = start;
  c.dt_action = dt;
  for (double x : xs) c.targets.push_back(v1(x));
  return c;
}

TEST(Zoh, HoldsFloorTarget) {
  const auto c = chunk_1d({1.0, 2.0}, 0.1);
  const auto r = zoh_reference(c, 0.05);
  EXPECT_EQ(r.x_d[0], 1.0);
  EXPECT_EQ(r.xd_dot[0], 0.0);
  EXPECT_EQ(r.xd_ddot[0], 0.0);
}

TEST(Zoh, RightContinuousAtTicks) {
  const auto c = chunk_1d({1.0, 2.0, 3.0}, 0.1);
  EXPECT_EQ(zoh_reference(c, 0.1).x_d[0], 2.0);
  EXPECT_EQ(zoh_reference(c, 0.2).x_d[0], 3.0);
  EXPECT_EQ(zoh_reference(c, 0.3 - 1e-6).x_d[0], 3.0);
}

TEST(Zoh, TerminalHoldAndEarlyQuery) {
  const auto c = chunk_1d({1.0, 2.0}, 0.1, 5.0);
  EXPECT_EQ(zoh_reference(c, 9.0).x_d[0], 2.0);
  EXPECT_THROW(zoh_reference(c, 4.99), InvalidArgument);
}

TEST(Fd, InterpolatesWithChordVelocity) {
  const auto c = chunk_1d({0.0, 1.0, 3.0}, 0.1);
  auto r = fd_reference(c, 0.05);
  EXPECT_NEAR(r.x_d[0], 0.5, 1e-12);
  EXPECT_NEAR(r.xd_dot[0], 10.0, 1e-12);
  r = fd_reference(c, 0.15);
  EXPECT_NEAR(r.x_d[0], 2.0, 1e-12);
  EXPECT_NEAR(r.xd_dot[0], 20.0, 1e-12);
  EXPECT_EQ(r.xd_ddot[0], 0.0);
}

TEST(Fd, DegenerateChunks) {
  const auto single = chunk_1d({4.0}, 0.1);
  for (double t : {0.0, 0.05, 1.0}) {
    EXPECT_EQ(fd_reference(single, t).x_d[0], 4.0);
    EXPECT_EQ(fd_reference(single, t).xd_dot[0], 0.0);
  }
  const auto flat = chunk_1d({2.0, 2.0, 2.0}, 0.1);
  for (double t : {0.0, 0.07, 0.15, 0.5}) {
    EXPECT_EQ(fd_reference(flat, t).x_d[0], 2.0);
    EXPECT_EQ(fd_reference(flat, t).xd_dot[0], 0.0);
  }
}

TEST(Fd, TerminalHoldHasZeroVelocity) {
  const auto c = chunk_1d({0.0, 1.0, 3.0}, 0.1);
  const auto r = fd_reference(c, 0.25);
  EXPECT_EQ(r.x_d[0], 3.0);
  EXPECT_EQ(r.xd_dot[0], 0.0);
  EXPECT_THROW(fd_reference(c, -0.01), InvalidArgument);
}

TEST(Fd, VelocityIntegratesToDisplacement) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> draw(-1.0, 1.0);
  ActionChunk c;
  c.start_time = 0.4;
  c.dt_action = 1.0 / 15.0;
  for (int j = 0; j < 12; ++j) c.targets.push_back(Vector::NullaryExpr(2, [&](Index) { return draw(rng); }));
  // midpoint quadrature is exact on piecewise-constant integrands
  Vector integral = Vector::Zero(2);
  for (Index j = 0; j + 1 < c.horizon(); ++j) {
    integral += c.dt_action * fd_reference(c, c.tick(j) + 0.5 * c.dt_action).xd_dot;
  }
  EXPECT_NEAR((integral - (c.targets.back() - c.targets.front())).norm(), 0.0, 1e-12);
}

TEST(Fd, AgreesWithZohAtTicks) {
  const auto c = chunk_1d({0.3, -1.0, 2.5, 2.0, 0.0}, 0.2, 1.0);
  for (Index j = 0; j < c.horizon(); ++j) {
    EXPECT_EQ(zoh_reference(c, c.tick(j)).x_d[0], fd_reference(c, c.tick(j)).x_d[0]) << j;
  }
}

TEST(Chunk, Validation) {
  ActionChunk c;
  c.dt_action = 0.1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.targets.push_back(v1(0.0));
  c.dt_action = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.dt_action = 0.1;
  c.velocities = std::vector<Vector>{v1(0.0), v1(1.0)};
  EXPECT_THROW(c.validate(), InvalidArgument);
}

BSplineTrajectory test_spline() {
  Matrix ctrl(7, 2);
  ctrl << 0, 0, 0.1, 0.3, 0.5, 0.2, 0.9, -0.4, 1.2, 0.0, 1.3, 0.6, 1.0, 1.0;
  return BSplineTrajectory(3, make_clamped_uniform_knots(7, 3, 2.0, 3.0), ctrl);
}

TEST(SplineReference, ConstantTrajectory) {
  const BSplineTrajectory c(3, make_clamped_uniform_knots(5, 3, 0.0, 1.0), Matrix::Constant(5, 2, 0.4));
  const auto r = spline_reference(c, 0.6);
  EXPECT_NEAR(r.x_d[0], 0.4, 1e-15);
  EXPECT_NEAR(r.xd_dot.norm(), 0.0, 1e-13);
  EXPECT_NEAR(r.xd_ddot.norm(), 0.0, 1e-12);
}

TEST(SplineReference, VelocityMatchesFiniteDifference) {
  const auto c = test_spline();
  for (double t = 2.01; t < 2.99; t += 0.0173) {
    const double h = 1e-6;
    const Vector fd = (spline_reference(c, t + h).x_d - spline_reference(c, t - h).x_d) / (2 * h);
    const Vector v = spline_reference(c, t).xd_dot;
    EXPECT_LE((fd - v).norm(), 1e-6 * std::max(1.0, v.norm())) << "t=" << t;
  }
}

TEST(SplineReference, ClampsOutsideDomain) {
  const auto c = test_spline();
  SplineQueryStats stats;
  const auto after = spline_reference(c, 3.5, &stats);
  EXPECT_NEAR((after.x_d - c.eval(3.0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(after.xd_dot.norm(), 0.0);
  EXPECT_EQ(after.xd_ddot.norm(), 0.0);
  const auto before = spline_reference(c, 1.0, &stats);
  EXPECT_NEAR((before.x_d - c.eval(2.0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(before.xd_dot.norm(), 0.0);
  spline_reference(c, 2.5, &stats);
  EXPECT_EQ(stats.clamped_after, 1u);
  EXPECT_EQ(stats.clamped_before, 1u);
}

TrajectorySamples ramp_samples(double rate, double duration, double v, double noise, std::mt19937_64* rng) {
  TrajectorySamples s;
  const int count = static_cast<int>(std::lround(duration * rate)) + 1;
  s.positions.resize(count, 1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int j = 0; j < count; ++j) {
    const double t = j / rate;
    s.times.push_back(t);
    s.positions(j, 0) = v * t + (rng ? noise * n(*rng) : 0.0);
  }
  return s;
}

TEST(Lowpass, ConstantPositionsGiveZero) {
  TrajectorySamples s;
  s.positions = Matrix::Constant(50, 2, 1.5);
  for (int j = 0; j < 50; ++j) s.times.push_back(0.002 * j);
  EXPECT_EQ(lowpass_differentiate(s, 20.0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lowpass, RampConvergesToSlope) {
  const double cutoff = 10.0;
  const auto s = ramp_samples(500.0, 2.0, 0.5, 0.0, nullptr);
  const Matrix v = lowpass_differentiate(s, cutoff);
  EXPECT_EQ(v(0, 0), 0.0);
  const double tau = 1.0 / (2.0 * M_PI * cutoff);
  for (Index j = 0; j < s.size(); ++j) {
    // first-order step response: v (1 - alpha-weighted decay), settled after 10 tau
    if (s.times[static_cast<std::size_t>(j)] > 10.0 * tau) EXPECT_NEAR(v(j, 0), 0.5, 0.005);
  }
  // discrete step response of y_j = (1-a) y_{j-1} + a * 0.5 with y_0 = 0
  const double dt = 1.0 / 500.0;
  const double a = dt / (tau + dt);
  for (Index j = 1; j < 20; ++j) {
    EXPECT_NEAR(v(j, 0), 0.5 * (1.0 - std::pow(1.0 - a, static_cast<double>(j))), 1e-12);
  }
}

TEST(Lowpass, ReducesNoiseVariance) {
  std::mt19937_64 rng(2024);
  int wins = 0;
  double filtered_total = 0.0;
  double raw_total = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const auto s = ramp_samples(500.0, 0.4, 0.3, 1e-4, &rng);
    const Matrix v = lowpass_differentiate(s, 15.0);
    double mf = 0, mr = 0;
    const Index first = 100;
    const auto n = static_cast<double>(s.size() - first);
    std::vector<double> raw;
    for (Index j = first; j < s.size(); ++j) {
      const auto k = static_cast<std::size_t>(j);
      raw.push_back((s.positions(j, 0) - s.positions(j - 1, 0)) / (s.times[k] - s.times[k - 1]));
      mf += v(j, 0);
      mr += raw.back();
    }
    mf /= n;
    mr /= n;
    double vf = 0, vr = 0;
    for (Index j = first; j < s.size(); ++j) {
      vf += (v(j, 0) - mf) * (v(j, 0) - mf);
      const double r = raw[static_cast<std::size_t>(j - first)];
      vr += (r - mr) * (r - mr);
    }
    filtered_total += vf;
    raw_total += vr;
    if (vf < vr) ++wins;
  }
  EXPECT_EQ(wins, 1000);
  EXPECT_LT(filtered_total, raw_total);
}

TEST(Lowpass, RejectsInvalidCutoff) {
  const auto s = ramp_samples(100.0, 1.0, 1.0, 0.0, nullptr);
  EXPECT_THROW(lowpass_differentiate(s, 0.0), InvalidArgument);
  EXPECT_THROW(lowpass_differentiate(s, -1.0), InvalidArgument);
  EXPECT_THROW(lowpass_differentiate(s, 50.0), InvalidArgument);
  EXPECT_NO_THROW(lowpass_differentiate(s, 49.0));
}

ReferenceSource constant_source(double x, double v) {
  return [=](double) { return ReferenceSample{v1(x), v1(v), v1(0.0)}; };
}

TEST(Blend, IdenticalSourcesPassThrough) {
  const ReferenceSource ramp = [](double t) { return ReferenceSample{v1(2 * t), v1(2.0), v1(0.0)}; };
  for (double t = 0.9; t < 1.3; t += 0.01) {
    const auto r = blend_chunks(ramp, ramp, 1.0, 0.1, t);
    EXPECT_NEAR(r.x_d[0], 2 * t, 1e-15);
    EXPECT_NEAR(r.xd_dot[0], 2.0, 1e-15);
  }
}

TEST(Blend, WindowBoundaries) {
  const auto prev = constant_source(0.0, 1.0);
  const auto next = constant_source(1.0, 3.0);
  EXPECT_EQ(blend_chunks(prev, next, 2.0, 0.1, 2.0).x_d[0], 0.0);
  EXPECT_EQ(blend_chunks(prev, next, 2.0, 0.1, 2.0).xd_dot[0], 1.0);
  EXPECT_EQ(blend_chunks(prev, next, 2.0, 0.1, 2.1).x_d[0], 1.0);
  EXPECT_EQ(blend_chunks(prev, next, 2.0, 0.1, 1.9).x_d[0], 0.0);
  EXPECT_EQ(blend_chunks(prev, next, 2.0, 0.1, 2.5).xd_dot[0], 3.0);
  EXPECT_NEAR(blend_chunks(prev, next, 2.0, 0.1, 2.05).x_d[0], 0.5, 1e-12);
}

TEST(Blend, ZeroOverlapIsHardSwitch) {
  const auto prev = constant_source(0.0, 0.0);
  const auto next = constant_source(1.0, 0.0);
  EXPECT_EQ(blend_chunks(prev, next, 2.0, 0.0, 2.0 - 1e-12).x_d[0], 0.0);
  EXPECT_EQ(blend_chunks(prev, next, 2.0, 0.0, 2.0).x_d[0], 1.0);
  EXPECT_THROW(blend_chunks(prev, next, 2.0, -0.1, 2.0), InvalidArgument);
}

TEST(Blend, TraversesJumpMonotonically) {
  const auto prev = constant_source(0.2, 0.0);
  const auto next = constant_source(-0.3, 0.0);
  double last = 0.2;
  for (int s = 0; s <= 1000; ++s) {
    const double x = blend_chunks(prev, next, 1.0, 0.1, 1.0 + 0.1 * s / 1000.0).x_d[0];
    EXPECT_LE(x, last + 1e-15);
    EXPECT_GE(x, -0.3 - 1e-15);
    last = x;
  }
  EXPECT_NEAR(last, -0.3, 1e-15);
}

TEST(Blend, Smoothstep) {
  EXPECT_EQ(smoothstep(0.0), 0.0);
  EXPECT_EQ(smoothstep(1.0), 1.0);
  EXPECT_EQ(smoothstep(0.5), 0.5);
  EXPECT_EQ(smoothstep(-1.0), 0.0);
  EXPECT_EQ(smoothstep(2.0), 1.0);
}

double total_variation(const std::vector<double>& v) {
  double tv = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
  return tv;
}

// Standard test trajectory: a minimum-jerk transfer predicted at 15 Hz with
// small seeded prediction noise, queried at 500 Hz.
TEST(Modes, VelocityTotalVariationOrdering) {
  const Plan plan = make_transfer_plan(v1(0.0), v1(0.3), 0.5, 0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1e-3);
    ActionChunk chunk;
    chunk.dt_action = 1.0 / 15.0;
    TrajectorySamples targets;
    const int horizon = 24;
    targets.positions.resize(horizon, 1);
    for (int j = 0; j < horizon; ++j) {
      const double t = chunk.tick(j);
      Vector x = plan.sample(t).x_d;
      x[0] += noise(rng);
      chunk.targets.push_back(x);
      targets.times.push_back(t);
      targets.positions(j, 0) = x[0];
    }
    const auto spline = fit_least_squares(targets, 8);

    const double dt = 1.0 / 500.0;
    const double end = chunk.tick(horizon - 1);
    std::vector<double> v_zoh, v_fd, v_spline;
    double last_zoh = zoh_reference(chunk, 0.0).x_d[0];
    for (double t = dt; t <= end; t += dt) {
      const double x = zoh_reference(chunk, t).x_d[0];
      v_zoh.push_back((x - last_zoh) / dt);
      last_zoh = x;
      v_fd.push_back(fd_reference(chunk, t).xd_dot[0]);
      v_spline.push_back(spline_reference(spline, t).xd_dot[0]);
    }
    const double tv_zoh = total_variation(v_zoh);
    const double tv_fd = total_variation(v_fd);
    const double tv_spline = total_variation(v_spline);
    EXPECT_LT(tv_spline, tv_fd) << "seed " << seed;
    EXPECT_LT(tv_fd, tv_zoh) << "seed " << seed;
  }
}

TEST(Modes, NamesRoundTrip) {
  for (auto m : {ReferenceMode::PositionOnly, ReferenceMode::FiniteDifference, ReferenceMode::Spline}) {
    EXPECT_EQ(parse_reference_mode(to_string(m)), m);
  }
  EXPECT_EQ(to_string(ReferenceMode::PositionOnly), "zoh");
  EXPECT_THROW(parse_reference_mode("linear"), InvalidArgument);
}

}  // namespace
}  // namespace vff
