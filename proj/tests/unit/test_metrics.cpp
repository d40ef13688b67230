#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vff/errors.hpp"
#include "vff/metrics.hpp"

namespace vff {
namespace {

// Reference values below were computed with scipy.stats and frozen.

EpisodeTrace offset_trace(double offset, int steps) {
  EpisodeTrace trace;
  trace.x_d = Matrix::Zero(steps, 2);
  trace.x = Matrix::Zero(steps, 2);
  trace.x_plan = Matrix::Zero(steps, 2);
  for (int i = 0; i < steps; ++i) {
    trace.times.push_back(0.01 * i);
    trace.x(i, 1) = offset;
  }
  return trace;
}

TEST(Rms, PerfectTrackingIsZero) { EXPECT_EQ(rms_tracking_error(offset_trace(0.0, 20)), 0.0); }

TEST(Rms, ConstantOffset) {
  EXPECT_NEAR(rms_tracking_error(offset_trace(0.003, 20)), 0.003, 1e-16);
  EXPECT_NEAR(rms_tracking_error(offset_trace(-0.003, 20), {}, TrackingTarget::Plan), 0.003, 1e-16);
}

TEST(Rms, Window) {
  EpisodeTrace trace = offset_trace(0.0, 100);
  for (int i = 50; i < 100; ++i) trace.x(i, 0) = 1.0;
  EXPECT_EQ(rms_tracking_error(trace, TimeWindow{0.0, 0.49}), 0.0);
  EXPECT_NEAR(rms_tracking_error(trace, TimeWindow{0.5, 0.99}), 1.0, 1e-15);
  EXPECT_NEAR(rms_tracking_error(trace), std::sqrt(0.5), 1e-15);
  EXPECT_THROW(rms_tracking_error(trace, TimeWindow{5.0, 6.0}), InvalidArgument);
  EXPECT_THROW(rms_tracking_error(EpisodeTrace{}), InvalidArgument);
}

TEST(Summary, FromSamples) {
  const std::vector<double> xs{1.0, 2.0, 4.0, 7.0};
  const auto s = SampleSummary::from_samples(xs);
  EXPECT_EQ(s.n, 4);
  EXPECT_DOUBLE_EQ(s.mean, 3.5);
  EXPECT_DOUBLE_EQ(s.variance, 7.0);
}

TEST(Summary, Validation) {
  EXPECT_THROW((SampleSummary{1.0, 1.0, 1}.validate()), InvalidArgument);
  EXPECT_THROW((SampleSummary{1.0, -1.0, 5}.validate()), InvalidArgument);
  EXPECT_THROW((SampleSummary{NAN, 1.0, 5}.validate()), InvalidArgument);
  EXPECT_THROW(pooled_t_test({1.0, 1.0, 1}, {1.0, 1.0, 5}, Alternative::Less), InvalidArgument);
}

TEST(IncompleteBeta, FrozenValues) {
  EXPECT_NEAR(regularized_incomplete_beta(2, 3, 0.4), 0.5248, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(0.5, 0.5, 0.3), 0.36901011956554536, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(10, 2, 0.9), 0.6973568802000002, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(50, 0.5, 0.97), 0.08169933372182259, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(1.5, 7, 0.05), 0.13693162173125475, 1e-12);
}

TEST(IncompleteBeta, EdgesAndErrors) {
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 1.0), 1.0);
  EXPECT_THROW(regularized_incomplete_beta(0, 3, 0.5), InvalidArgument);
  EXPECT_THROW(regularized_incomplete_beta(2, 3, 1.5), InvalidArgument);
}

TEST(IncompleteBeta, Symmetry) {
  for (double x : {0.01, 0.2, 0.5, 0.77, 0.99}) {
    EXPECT_NEAR(regularized_incomplete_beta(3.5, 1.2, x) + regularized_incomplete_beta(1.2, 3.5, 1 - x),
                1.0, 1e-12);
  }
}

TEST(StudentT, FrozenValues) {
  EXPECT_NEAR(student_t_cdf(0.5, 3), 0.6742760175759246, 1e-12);
  EXPECT_NEAR(student_t_cdf(-2, 10), 0.036694017385370196, 1e-12);
  EXPECT_NEAR(student_t_cdf(1.3, 7.5), 0.8839366105921957, 1e-12);
  EXPECT_NEAR(student_t_cdf(4, 100), 0.9999392381778497, 1e-12);
  EXPECT_NEAR(student_t_cdf(-0.1, 1), 0.4682744825694464, 1e-12);
  EXPECT_NEAR(student_t_cdf(2.5, 2), 0.9351941398892446, 1e-12);
}

TEST(StudentT, CdfProperties) {
  for (double dof : {1.0, 2.5, 10.0, 137.0}) {
    EXPECT_EQ(student_t_cdf(0.0, dof), 0.5);
    double last = 0.0;
    for (double t = -8.0; t <= 8.0; t += 0.25) {
      const double c = student_t_cdf(t, dof);
      EXPECT_NEAR(c + student_t_cdf(-t, dof), 1.0, 1e-10);
      EXPECT_GE(c, last);
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
      last = c;
    }
  }
  EXPECT_THROW(student_t_cdf(1.0, 0.0), InvalidArgument);
}

TEST(StudentT, ApproachesNormal) {
  for (double dof : {200.0, 500.0, 5000.0}) {
    for (double t = -4.0; t <= 4.0; t += 0.1) {
      EXPECT_NEAR(student_t_cdf(t, dof), 0.5 * std::erfc(-t / std::sqrt(2.0)), 2e-3);
    }
  }
}

const SampleSummary kBaseline{7.35, 1.99, 71};

TEST(TTest, PooledFrozenValues) {
  auto r = pooled_t_test({6.05, 1.71, 70}, kBaseline, Alternative::Less);
  EXPECT_NEAR(r.t_stat, -5.672936691644224, 1e-12);
  EXPECT_NEAR(r.p_one_tailed, 3.9198793513873603e-8, 1e-8 * 3.92e-8);
  EXPECT_EQ(r.dof, 139.0);
  r = pooled_t_test({7.45, 4.75, 94}, kBaseline, Alternative::Less);
  EXPECT_NEAR(r.t_stat, 0.3368512617938682, 1e-12);
  EXPECT_NEAR(r.p_one_tailed, 0.6316688292643362, 1e-10);
  r = pooled_t_test({10.01, 6.10, 49}, kBaseline, Alternative::Greater);
  EXPECT_NEAR(r.t_stat, 7.484574204464804, 1e-12);
  EXPECT_NEAR(r.p_one_tailed, 7.058572956240979e-12, 1e-8 * 7.06e-12);
}

TEST(TTest, WelchFrozenValues) {
  auto r = welch_t_test({6.05, 1.71, 70}, kBaseline, Alternative::Less);
  EXPECT_NEAR(r.t_stat, -5.676004117826146, 1e-12);
  EXPECT_NEAR(r.p_one_tailed, 3.8852502932703035e-8, 1e-8 * 3.89e-8);
  r = welch_t_test({7.45, 4.75, 94}, kBaseline, Alternative::Less);
  EXPECT_NEAR(r.t_stat, 0.35677879197973156, 1e-12);
  EXPECT_NEAR(r.p_one_tailed, 0.6391356038045006, 1e-10);
  r = welch_t_test({10.01, 6.10, 49}, kBaseline, Alternative::Greater);
  EXPECT_NEAR(r.t_stat, 6.811160837213927, 1e-12);
  EXPECT_NEAR(r.p_one_tailed, 1.4073400063245736e-9, 1e-8 * 1.41e-9);
}

TEST(TTest, PublishedPolicyStatistics) {
  // printed: -5.70, 0.32 (p 0.626), 7.47
  EXPECT_NEAR(pooled_t_test({6.05, 1.71, 70}, kBaseline, Alternative::Less).t_stat, -5.70, 0.12);
  const auto spline = pooled_t_test({7.45, 4.75, 94}, kBaseline, Alternative::Less);
  EXPECT_NEAR(spline.t_stat, 0.32, 0.12);
  EXPECT_NEAR(spline.p_one_tailed, 0.626, 0.02);
  EXPECT_NEAR(pooled_t_test({10.01, 6.10, 49}, kBaseline, Alternative::Greater).t_stat, 7.47, 0.12);
}

TEST(TTest, TeleopFrozenValues) {
  struct Row {
    SampleSummary velocity;
    SampleSummary baseline;
    double t;
    double p;
    double printed;
  };
  const auto sd = [](double mean, double s, std::int64_t n) { return SampleSummary{mean, s * s, n}; };
  const std::vector<Row> rows{
      {sd(7.64, 3.00, 88), sd(9.58, 3.97, 68), -3.4770188501096495, 3.2956646044831055e-4, -3.45},
      {sd(5.85, 2.27, 120), sd(8.48, 3.04, 83), -7.053679168838056, 1.3754716387187203e-11, -7.02},
      {sd(5.34, 1.41, 122), sd(9.31, 3.19, 84), -12.140634048462976, 3.4872014500797346e-26, -12.06},
      {sd(5.37, 1.55, 121), sd(8.37, 3.49, 76), -8.256338185265248, 1.117790924844742e-14, -8.20},
  };
  for (const auto& row : rows) {
    const auto r = pooled_t_test(row.velocity, row.baseline, Alternative::Less);
    EXPECT_NEAR(r.t_stat, row.t, 1e-11);
    EXPECT_NEAR(r.p_one_tailed, row.p, 1e-8 * row.p);
    EXPECT_NEAR(r.t_stat, row.printed, 0.12);
    EXPECT_LT(r.p_one_tailed, 1e-3);
  }
}

TEST(TTest, IdenticalSummaries) {
  const SampleSummary s{5.0, 2.0, 30};
  for (auto variant : {TestVariant::Pooled, TestVariant::Welch}) {
    for (auto alt : {Alternative::Less, Alternative::Greater}) {
      const auto r = t_test(s, s, alt, variant);
      EXPECT_EQ(r.t_stat, 0.0);
      EXPECT_EQ(r.p_one_tailed, 0.5);
    }
  }
}

TEST(TTest, Antisymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mean(1.0, 10.0);
  std::uniform_real_distribution<double> var(0.1, 5.0);
  std::uniform_int_distribution<int> n(2, 150);
  for (int trial = 0; trial < 200; ++trial) {
    const SampleSummary a{mean(rng), var(rng), n(rng)};
    const SampleSummary b{mean(rng), var(rng), n(rng)};
    for (auto variant : {TestVariant::Pooled, TestVariant::Welch}) {
      const auto ab = t_test(a, b, Alternative::Less, variant);
      const auto ba = t_test(b, a, Alternative::Greater, variant);
      const auto ab_greater = t_test(a, b, Alternative::Greater, variant);
      EXPECT_NEAR(ab.t_stat, -ba.t_stat, 1e-12);
      EXPECT_NEAR(ab.p_one_tailed, ba.p_one_tailed, 1e-12);
      EXPECT_NEAR(ab.p_one_tailed, 1.0 - ab_greater.p_one_tailed, 1e-12);
      EXPECT_GE(ab.p_one_tailed, 0.0);
      EXPECT_LE(ab.p_one_tailed, 1.0);
    }
  }
}

TEST(TTest, ZeroVarianceWithDifferentMeans) {
  const auto r = pooled_t_test({1.0, 0.0, 5}, {2.0, 0.0, 5}, Alternative::Less);
  EXPECT_TRUE(std::isinf(r.t_stat));
  EXPECT_LT(r.t_stat, 0.0);
  EXPECT_EQ(r.p_one_tailed, 0.0);
}

TEST(TTest, AlternativeNames) {
  EXPECT_EQ(parse_alternative("less"), Alternative::Less);
  EXPECT_EQ(to_string(Alternative::Greater), "greater");
  EXPECT_THROW(parse_alternative("two-sided"), InvalidArgument);
}

TEST(SuccessCurve, NoSuccesses) {
  const std::vector<std::optional<double>> times(4);
  const auto grid = uniform_grid(10.0, 1.0);
  for (double c : cumulative_success_curve(times, grid)) EXPECT_EQ(c, 0.0);
}

TEST(SuccessCurve, StepAtSuccessTime) {
  const std::vector<std::optional<double>> times(3, 5.0);
  const std::vector<double> grid{0.0, 4.99, 5.0, 5.01, 20.0};
  EXPECT_EQ(cumulative_success_curve(times, grid), (std::vector<double>{0, 0, 1, 1, 1}));
}

TEST(SuccessCurve, FinalValueIsSuccessRate) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 25.0);
  std::vector<std::optional<double>> times;
  int within = 0;
  for (int i = 0; i < 97; ++i) {
    const double t = u(rng);
    if (i % 7 == 0) {
      times.emplace_back();
    } else {
      times.emplace_back(t);
      if (t <= 20.0) ++within;
    }
  }
  const auto grid = uniform_grid(20.0, 0.1);
  const auto curve = cumulative_success_curve(times, grid);
  EXPECT_DOUBLE_EQ(curve.back(), within / 97.0);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GE(curve[i], curve[i - 1]);
  EXPECT_GE(curve.front(), 0.0);
  EXPECT_LE(curve.back(), 1.0);
}

TEST(SuccessCurve, FromTraces) {
  std::vector<EpisodeTrace> traces(4);
  traces[0].success_time = 1.0;
  traces[2].success_time = 3.0;
  const std::vector<double> grid{0.0, 2.0, 4.0};
  EXPECT_EQ(cumulative_success_curve(traces, grid), (std::vector<double>{0.0, 0.25, 0.5}));
  EXPECT_THROW(cumulative_success_curve(std::span<const EpisodeTrace>(), grid), InvalidArgument);
}

TEST(Grid, Uniform) {
  const auto g = uniform_grid(1.0, 0.1);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 1.0, 1e-15);
  EXPECT_EQ(uniform_grid(0.0, 0.5).size(), 1u);
  EXPECT_THROW(uniform_grid(1.0, 0.0), InvalidArgument);
}

}  // namespace
}  // namespace vff
