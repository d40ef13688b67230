#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vff/sim.hpp"

namespace vff {

struct TimeWindow {
  double begin;
  double end;
};

/// What the plant position is compared against.
enum class TrackingTarget {
  /// The reference handed to the controller (x_d).
  Reference,
  /// The ground-truth plan the reference was generated from.
  Plan,
};

/// RMS of |target - x| over the samples whose time lies in `window`.
/// Throws InvalidArgument when no sample falls inside.
double rms_tracking_error(const EpisodeTrace& trace, std::optional<TimeWindow> window = {},
                          TrackingTarget target = TrackingTarget::Reference);

/// Mean, unbiased variance and count of a sample.
struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t n = 0;

  static SampleSummary from_samples(std::span<const double> values);
  void validate() const;
};

enum class Alternative {
  /// mean_a < mean_b
  Less,
  /// mean_a > mean_b
  Greater,
};

std::string_view to_string(Alternative alternative);
Alternative parse_alternative(std::string_view name);

enum class TestVariant {
  /// Student's test with pooled variance.
  Pooled,
  Welch,
};

struct TestResult {
  double t_stat = 0.0;
  double p_one_tailed = 0.0;
  double dof = 0.0;
};

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// CDF of Student's t distribution with `dof` degrees of freedom (dof may be
/// fractional).
double student_t_cdf(double t, double dof);

/// Two-sample t-test with pooled variance; one-tailed p-value for
/// `alternative`.
TestResult pooled_t_test(const SampleSummary& a, const SampleSummary& b, Alternative alternative);

/// Welch's unequal-variance test with Welch-Satterthwaite degrees of freedom.
TestResult welch_t_test(const SampleSummary& a, const SampleSummary& b, Alternative alternative);

TestResult t_test(const SampleSummary& a, const SampleSummary& b, Alternative alternative,
                  TestVariant variant);

/// Fraction of episodes with success_time <= tau, for each tau in `grid`.
std::vector<double> cumulative_success_curve(std::span<const std::optional<double>> success_times,
                                             std::span<const double> grid);
std::vector<double> cumulative_success_curve(std::span<const EpisodeTrace> episodes,
                                             std::span<const double> grid);

/// Steps of `step` from 0 to `end` inclusive.
std::vector<double> uniform_grid(double end, double step);

}  // namespace vff
