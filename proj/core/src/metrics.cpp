#include "vff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vff/errors.hpp"

namespace vff {

double rms_tracking_error(const EpisodeTrace& trace, std::optional<TimeWindow> window,
                          TrackingTarget target) {
  const Matrix& goal = target == TrackingTarget::Plan ? trace.x_plan : trace.x_d;
  double sum = 0.0;
  std::size_t count = 0;
  for (Index i = 0; i < trace.steps(); ++i) {
    const double t = trace.times[static_cast<std::size_t>(i)];
    if (window && (t < window->begin || t > window->end)) continue;
    sum += (goal.row(i) - trace.x.row(i)).squaredNorm();
    ++count;
  }
  if (count == 0) throw InvalidArgument("no trace samples inside the requested window");
  return std::sqrt(sum / static_cast<double>(count));
}

SampleSummary SampleSummary::from_samples(std::span<const double> values) {
  SampleSummary s;
  s.n = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.variance = values.size() > 1 ? ss / static_cast<double>(values.size() - 1) : 0.0;
  return s;
}

void SampleSummary::validate() const {
  if (n < 2) throw InvalidArgument("a sample summary needs n >= 2, got " + std::to_string(n));
  if (!std::isfinite(mean)) throw InvalidArgument("sample mean must be finite");
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw InvalidArgument("sample variance must be finite and non-negative");
  }
}

std::string_view to_string(Alternative alternative) {
  return alternative == Alternative::Less ? "less" : "greater";
}

Alternative parse_alternative(std::string_view name) {
  if (name == "less") return Alternative::Less;
  if (name == "greater") return Alternative::Greater;
  throw InvalidArgument("unknown alternative '" + std::string(name) + "' (expected less or greater)");
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIterations = 100000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

TestResult finish(double t, double dof, Alternative alternative) {
  return {t, student_t_cdf(alternative == Alternative::Less ? t : -t, dof), dof};
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

TestResult pooled_t_test(const SampleSummary& a, const SampleSummary& b, Alternative alternative) {
  a.validate();
  b.validate();
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double dof = na + nb - 2.0;
  const double pooled = ((na - 1.0) * a.variance + (nb - 1.0) * b.variance) / dof;
  const double diff = a.mean - b.mean;
  const double se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  double t = 0.0;
  if (se > 0.0) {
    t = diff / se;
  } else if (diff != 0.0) {
    t = std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return finish(t, dof, alternative);
}

TestResult welch_t_test(const SampleSummary& a, const SampleSummary& b, Alternative alternative) {
  a.validate();
  b.validate();
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double va = a.variance / na;
  const double vb = b.variance / nb;
  const double se2 = va + vb;
  const double diff = a.mean - b.mean;
  if (se2 == 0.0) {
    const double t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    return finish(t, na + nb - 2.0, alternative);
  }
  const double dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  return finish(diff / std::sqrt(se2), dof, alternative);
}

TestResult t_test(const SampleSummary& a, const SampleSummary& b, Alternative alternative,
                  TestVariant variant) {
  return variant == TestVariant::Welch ? welch_t_test(a, b, alternative)
                                       : pooled_t_test(a, b, alternative);
}

std::vector<double> cumulative_success_curve(std::span<const std::optional<double>> success_times,
                                             std::span<const double> grid) {
  if (success_times.empty()) throw InvalidArgument("success curve needs at least one episode");
  std::vector<double> sorted;
  for (const auto& s : success_times) {
    if (s) sorted.push_back(*s);
  }
  std::sort(sorted.begin(), sorted.end());
  const double total = static_cast<double>(success_times.size());
  std::vector<double> curve;
  curve.reserve(grid.size());
  for (double tau : grid) {
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), tau) - sorted.begin();
    curve.push_back(static_cast<double>(count) / total);
  }
  return curve;
}

std::vector<double> cumulative_success_curve(std::span<const EpisodeTrace> episodes,
                                             std::span<const double> grid) {
  std::vector<std::optional<double>> times;
  times.reserve(episodes.size());
  for (const auto& e : episodes) times.push_back(e.success_time);
  return cumulative_success_curve(times, grid);
}

std::vector<double> uniform_grid(double end, double step) {
  if (!(step > 0.0) || !(end >= 0.0)) throw InvalidArgument("grid needs step > 0 and end >= 0");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor(end / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * step);
  return grid;
}

}  // namespace vff
