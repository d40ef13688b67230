#include "vff/spline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "vff/errors.hpp"

namespace vff {

namespace {

constexpr double kSingularRatio = 1e-10;

std::size_t as_size(Index i) { return static_cast<std::size_t>(i); }

void check_knots(std::span<const double> knots) {
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i])) throw InvalidArgument("knot vector contains a non-finite value");
    if (i > 0 && knots[i] < knots[i - 1]) {
      throw InvalidArgument("knot vector must be non-decreasing (index " + std::to_string(i) + ")");
    }
  }
}

double basis0(Index i, double t, std::span<const double> knots) {
  const double lo = knots[as_size(i)];
  const double hi = knots[as_size(i + 1)];
  if (lo <= t && t < hi) return 1.0;
  if (t == knots.back() && lo < hi && hi == knots.back()) return 1.0;
  return 0.0;
}

double basis_rec(Index i, int k, double t, std::span<const double> knots) {
  if (k == 0) return basis0(i, t, knots);
  double value = 0.0;
  const double left_span = knots[as_size(i + k)] - knots[as_size(i)];
  if (left_span > 0.0) {
    value += (t - knots[as_size(i)]) / left_span * basis_rec(i, k - 1, t, knots);
  }
  const double right_span = knots[as_size(i + k + 1)] - knots[as_size(i + 1)];
  if (right_span > 0.0) {
    value += (knots[as_size(i + k + 1)] - t) / right_span * basis_rec(i + 1, k - 1, t, knots);
  }
  return value;
}

double derivative_rec(Index i, int k, double t, std::span<const double> knots, int order) {
  if (order == 0) return basis_rec(i, k, t, knots);
  double value = 0.0;
  const double left_span = knots[as_size(i + k)] - knots[as_size(i)];
  if (left_span > 0.0) value += derivative_rec(i, k - 1, t, knots, order - 1) / left_span;
  const double right_span = knots[as_size(i + k + 1)] - knots[as_size(i + 1)];
  if (right_span > 0.0) value -= derivative_rec(i + 1, k - 1, t, knots, order - 1) / right_span;
  return k * value;
}

void check_basis_args(Index i, int degree, double t, std::span<const double> knots) {
  if (degree < 0) throw InvalidArgument("degree must be non-negative");
  if (i < 0 || as_size(i + degree + 1) >= knots.size()) {
    throw std::out_of_range("basis index " + std::to_string(i) + " out of range for degree " +
                            std::to_string(degree) + " and " + std::to_string(knots.size()) +
                            " knots");
  }
  if (!(t >= knots.front() && t <= knots.back())) {
    throw DomainError("basis evaluated outside the knot range");
  }
}

// Upper-triangular banded factor: row c holds columns c .. c+degree.
struct BandedFactor {
  Matrix r;
  Index n = 0;
  Index width = 0;

  Vector multiply(const Vector& v) const {
    Vector out = Vector::Zero(n);
    for (Index c = 0; c < n; ++c) {
      for (Index l = 0; l < width && c + l < n; ++l) out[c] += r(c, l) * v[c + l];
    }
    return out;
  }

  Vector multiply_transposed(const Vector& v) const {
    Vector out = Vector::Zero(n);
    for (Index c = 0; c < n; ++c) {
      for (Index l = 0; l < width && c + l < n; ++l) out[c + l] += r(c, l) * v[c];
    }
    return out;
  }

  // Solves R x = b.
  Vector solve_upper(const Vector& b) const {
    Vector x(n);
    for (Index c = n - 1; c >= 0; --c) {
      double acc = b[c];
      for (Index l = 1; l < width && c + l < n; ++l) acc -= r(c, l) * x[c + l];
      x[c] = acc / r(c, 0);
    }
    return x;
  }

  // Solves R^T x = b.
  Vector solve_lower_transposed(const Vector& b) const {
    Vector x(n);
    for (Index c = 0; c < n; ++c) {
      double acc = b[c];
      for (Index l = 1; l < width && c - l >= 0; ++l) acc -= r(c - l, l) * x[c - l];
      x[c] = acc / r(c, 0);
    }
    return x;
  }

  // Power and inverse iteration on R^T R. The inverse-iteration estimate
  // approaches the smallest singular value from above.
  double condition_ratio() const {
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector start(n);
    for (Index i = 0; i < n; ++i) start[i] = dist(rng);
    start.normalize();

    Vector v = start;
    double largest = 0.0;
    for (int it = 0; it < 60; ++it) {
      Vector w = multiply_transposed(multiply(v));
      largest = w.norm();
      if (largest == 0.0) return 0.0;
      v = w / largest;
    }

    v = start;
    double inverse = 0.0;
    for (int it = 0; it < 60; ++it) {
      Vector w = solve_upper(solve_lower_transposed(v));
      inverse = w.norm();
      if (!std::isfinite(inverse) || inverse == 0.0) return 0.0;
      v = w / inverse;
    }
    return std::sqrt(1.0 / inverse) / std::sqrt(largest);
  }
};

}  // namespace

void TrajectorySamples::validate(Index min_samples) const {
  if (positions.rows() != size()) {
    throw InvalidArgument("sample count mismatch: " + std::to_string(times.size()) + " times, " +
                          std::to_string(positions.rows()) + " position rows");
  }
  if (size() < min_samples) {
    throw InvalidArgument("need at least " + std::to_string(min_samples) + " samples, got " +
                          std::to_string(size()));
  }
  if (dims() < 1) throw InvalidArgument("samples must have at least one axis");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!std::isfinite(times[j])) throw InvalidArgument("non-finite sample time");
    if (j > 0 && !(times[j] > times[j - 1])) {
      throw InvalidArgument("sample times must be strictly increasing (sample " +
                            std::to_string(j) + ")");
    }
  }
  if (!positions.allFinite()) throw InvalidArgument("non-finite sample position");
}

BSplineTrajectory::BSplineTrajectory(int degree, std::vector<double> knots, Matrix control_points,
                                     double fit_residual_rms)
    : degree_(degree),
      knots_(std::move(knots)),
      control_points_(std::move(control_points)),
      fit_residual_rms_(fit_residual_rms) {
  if (degree_ < 0) throw InvalidArgument("degree must be non-negative");
  if (control_points_.rows() < degree_ + 1) {
    throw InvalidArgument("need at least degree+1 control points");
  }
  if (control_points_.cols() < 1) throw InvalidArgument("control points need at least one axis");
  if (knots_.size() != as_size(control_points_.rows() + degree_ + 1)) {
    throw InvalidArgument("knot count " + std::to_string(knots_.size()) +
                          " != control points + degree + 1 = " +
                          std::to_string(control_points_.rows() + degree_ + 1));
  }
  check_knots(knots_);
  if (!(t_end() > t_begin())) throw InvalidArgument("empty evaluation domain");
  if (!control_points_.allFinite()) throw InvalidArgument("non-finite control point");
  if (!(fit_residual_rms_ >= 0.0)) throw InvalidArgument("residual RMS must be non-negative");
}

Index BSplineTrajectory::find_span(double t) const {
  const Index n = num_control_points() - 1;
  if (t >= t_end()) {
    Index m = n;
    while (m > degree_ && !(knots_[as_size(m)] < knots_[as_size(m + 1)])) --m;
    return m;
  }
  const auto first = knots_.begin() + degree_;
  const auto last = knots_.begin() + n + 1;
  const auto it = std::upper_bound(first, last, t);
  return std::clamp<Index>(static_cast<Index>(it - knots_.begin()) - 1, degree_, n);
}

Vector BSplineTrajectory::eval(double t, int order) const {
  if (order < 0) throw InvalidArgument("derivative order must be non-negative");
  if (!contains(t)) {
    throw DomainError("t=" + std::to_string(t) + " outside [" + std::to_string(t_begin()) + ", " +
                      std::to_string(t_end()) + "]");
  }
  if (order > degree_) return Vector::Zero(dims());
  const Index span = find_span(t);
  const Matrix ders = local_basis_derivatives(span, degree_, t, knots_, order);
  Vector out = Vector::Zero(dims());
  for (Index j = 0; j <= degree_; ++j) {
    out += ders(order, j) * control_points_.row(span - degree_ + j).transpose();
  }
  return out;
}

std::vector<double> make_clamped_uniform_knots(Index n_ctrl, int degree, double t_start,
                                               double t_end) {
  if (degree < 0) throw InvalidArgument("degree must be non-negative");
  if (n_ctrl < degree + 1) {
    throw InvalidArgument("n_ctrl=" + std::to_string(n_ctrl) + " below degree+1=" +
                          std::to_string(degree + 1));
  }
  if (!(t_end > t_start)) throw InvalidArgument("t_end must exceed t_start");
  const Index interior = n_ctrl - degree - 1;
  std::vector<double> knots;
  knots.reserve(as_size(n_ctrl + degree + 1));
  for (int i = 0; i <= degree; ++i) knots.push_back(t_start);
  const double width = t_end - t_start;
  for (Index i = 1; i <= interior; ++i) {
    knots.push_back(t_start + width * static_cast<double>(i) / static_cast<double>(interior + 1));
  }
  for (int i = 0; i <= degree; ++i) knots.push_back(t_end);
  return knots;
}

double basis(Index i, int degree, double t, std::span<const double> knots) {
  check_basis_args(i, degree, t, knots);
  return basis_rec(i, degree, t, knots);
}

double basis_derivative(Index i, int degree, double t, std::span<const double> knots, int order) {
  if (order != 1 && order != 2) throw InvalidArgument("derivative order must be 1 or 2");
  if (order > degree) throw InvalidArgument("derivative order exceeds degree");
  check_basis_args(i, degree, t, knots);
  return derivative_rec(i, degree, t, knots, order);
}

Matrix local_basis_derivatives(Index span, int degree, double t, std::span<const double> knots,
                               int max_order) {
  const int p = degree;
  const int top = std::min(max_order, p);
  Matrix ders = Matrix::Zero(max_order + 1, p + 1);
  Matrix ndu(p + 1, p + 1);
  std::vector<double> left(as_size(p + 1)), right(as_size(p + 1));
  const auto knot = [&](Index idx) { return knots[as_size(idx)]; };

  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[as_size(j)] = t - knot(span + 1 - j);
    right[as_size(j)] = knot(span + j) - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[as_size(r + 1)] + left[as_size(j - r)];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[as_size(r + 1)] * temp;
      saved = left[as_size(j - r)] * temp;
    }
    ndu(j, j) = saved;
  }
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  Matrix a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= top; ++k) {
    ders.row(k) *= factor;
    factor *= (p - k);
  }
  return ders;
}

Index default_control_point_count(Index n_samples, int degree) {
  return std::max<Index>(degree + 1, n_samples / 4);
}

BSplineTrajectory fit_least_squares(const TrajectorySamples& samples, Index n_ctrl, int degree) {
  if (degree < 0) throw InvalidArgument("degree must be non-negative");
  if (n_ctrl < degree + 1) {
    throw InvalidArgument("n_ctrl=" + std::to_string(n_ctrl) + " below degree+1=" +
                          std::to_string(degree + 1));
  }
  samples.validate(1);
  if (samples.size() < n_ctrl) {
    throw InvalidArgument("n_ctrl=" + std::to_string(n_ctrl) + " exceeds sample count " +
                          std::to_string(samples.size()));
  }

  const Index n = n_ctrl;
  const Index d = samples.dims();
  const Index width = degree + 1;
  std::vector<double> knots =
      make_clamped_uniform_knots(n, degree, samples.times.front(), samples.times.back());
  // Zero control points: only used to locate spans.
  const BSplineTrajectory locator(degree, knots, Matrix::Zero(n, d));

  BandedFactor factor{Matrix::Zero(n, width), n, width};
  Matrix rhs = Matrix::Zero(n, d);
  std::vector<bool> filled(as_size(n), false);
  std::vector<double> work(as_size(n + width), 0.0);
  Vector y(d);

  for (Index j = 0; j < samples.size(); ++j) {
    const double t = samples.times[as_size(j)];
    const Index span = locator.find_span(t);
    const Matrix local = local_basis_derivatives(span, degree, t, knots, 0);
    const Index c0 = span - degree;
    for (Index q = 0; q < width; ++q) work[as_size(c0 + q)] = local(0, q);
    y = samples.positions.row(j).transpose();

    for (Index c = c0; c < n; ++c) {
      const double a = work[as_size(c)];
      if (a == 0.0) {
        bool rest_zero = true;
        for (Index l = 1; l < width && c + l < n; ++l) rest_zero &= work[as_size(c + l)] == 0.0;
        if (rest_zero) break;
        continue;
      }
      if (!filled[as_size(c)]) {
        for (Index l = 0; l < width && c + l < n; ++l) {
          factor.r(c, l) = work[as_size(c + l)];
          work[as_size(c + l)] = 0.0;
        }
        rhs.row(c) = y.transpose();
        filled[as_size(c)] = true;
        break;
      }
      const double pivot = factor.r(c, 0);
      const double radius = std::hypot(pivot, a);
      const double cs = pivot / radius;
      const double sn = a / radius;
      for (Index l = 0; l < width && c + l < n; ++l) {
        const double rv = factor.r(c, l);
        const double wv = work[as_size(c + l)];
        factor.r(c, l) = cs * rv + sn * wv;
        work[as_size(c + l)] = -sn * rv + cs * wv;
      }
      work[as_size(c)] = 0.0;
      const Vector z = rhs.row(c).transpose();
      rhs.row(c) = (cs * z + sn * y).transpose();
      y = -sn * z + cs * y;
    }
    std::fill(work.begin() + c0, work.begin() + std::min(n + width, c0 + 2 * width), 0.0);
  }

  double diag_max = 0.0;
  for (Index c = 0; c < n; ++c) diag_max = std::max(diag_max, std::abs(factor.r(c, 0)));
  for (Index c = 0; c < n; ++c) {
    if (!filled[as_size(c)] || !(std::abs(factor.r(c, 0)) > 1e-300) ||
        std::abs(factor.r(c, 0)) < 1e-14 * diag_max) {
      throw SingularFitError("rank-deficient spline fit: control point " + std::to_string(c) +
                                 " is not determined by the samples",
                             0.0);
    }
  }
  const double ratio = factor.condition_ratio();
  if (!(ratio >= kSingularRatio)) {
    throw SingularFitError("rank-deficient spline fit: singular value ratio " +
                               std::to_string(ratio) + " below 1e-10",
                           ratio);
  }

  Matrix control(n, d);
  for (Index axis = 0; axis < d; ++axis) control.col(axis) = factor.solve_upper(rhs.col(axis));

  BSplineTrajectory fitted(degree, std::move(knots), std::move(control));
  const double rms = residual_rms(fitted, samples);
  return BSplineTrajectory(fitted.degree(), fitted.knots(), fitted.control_points(), rms);
}

double residual_rms(const BSplineTrajectory& traj, const TrajectorySamples& samples) {
  if (samples.size() == 0) return 0.0;
  if (samples.dims() != traj.dims()) throw InvalidArgument("sample/trajectory dimension mismatch");
  double sum = 0.0;
  for (Index j = 0; j < samples.size(); ++j) {
    const Vector diff =
        samples.positions.row(j).transpose() - traj.eval(samples.times[as_size(j)], 0);
    sum += diff.squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

BSplineTrajectory extract_window(const BSplineTrajectory& traj, double t0, double t1) {
  if (!(t1 > t0)) throw InvalidArgument("window end must exceed window start");
  if (!traj.contains(t0) || !traj.contains(t1)) throw DomainError("window outside trajectory domain");
  const int k = traj.degree();
  const auto& knots = traj.knots();
  const Index first = traj.find_span(t0);
  Index last = traj.find_span(t1);
  while (last > first && t1 <= knots[as_size(last)]) --last;

  std::vector<double> sub_knots(knots.begin() + (first - k), knots.begin() + (last + k + 2));
  Matrix sub_ctrl = traj.control_points().middleRows(first - k, last - first + k + 1);
  return BSplineTrajectory(k, std::move(sub_knots), std::move(sub_ctrl), traj.fit_residual_rms());
}

namespace {

TrajectorySamples slice_samples(const TrajectorySamples& samples, double t0, double t1) {
  TrajectorySamples out;
  std::vector<Index> rows;
  for (Index j = 0; j < samples.size(); ++j) {
    const double t = samples.times[as_size(j)];
    if (t >= t0 && t <= t1) rows.push_back(j);
  }
  out.positions.resize(static_cast<Index>(rows.size()), samples.dims());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.times.push_back(samples.times[as_size(rows[r])]);
    out.positions.row(static_cast<Index>(r)) = samples.positions.row(rows[r]);
  }
  return out;
}

}  // namespace

std::vector<BSplineTrajectory> fit_chunks(const TrajectorySamples& samples, double chunk_duration,
                                          Index n_ctrl, ChunkFitMode mode, int degree) {
  samples.validate(2);
  if (!(chunk_duration > 0.0)) throw InvalidArgument("chunk duration must be positive");
  const double t_first = samples.times.front();
  const double t_last = samples.times.back();
  const auto n_windows = static_cast<Index>(
      std::max(1.0, std::ceil((t_last - t_first) / chunk_duration - 1e-9)));

  std::vector<BSplineTrajectory> out;
  out.reserve(as_size(n_windows));

  if (mode == ChunkFitMode::GlobalWindows) {
    const Index count = n_ctrl > 0 ? n_ctrl : default_control_point_count(samples.size(), degree);
    const BSplineTrajectory global = fit_least_squares(samples, count, degree);
    for (Index w = 0; w < n_windows; ++w) {
      const double a = t_first + static_cast<double>(w) * chunk_duration;
      const double b = w + 1 == n_windows ? t_last : std::min(t_last, a + chunk_duration);
      const BSplineTrajectory window = extract_window(global, a, b);
      const double rms = residual_rms(global, slice_samples(samples, a, b));
      out.emplace_back(window.degree(), window.knots(), window.control_points(), rms);
    }
    return out;
  }

  for (Index w = 0; w < n_windows; ++w) {
    const double a = t_first + static_cast<double>(w) * chunk_duration;
    const double b = w + 1 == n_windows ? t_last : std::min(t_last, a + chunk_duration);
    const TrajectorySamples window = slice_samples(samples, a, b);
    const Index count = n_ctrl > 0 ? n_ctrl : default_control_point_count(window.size(), degree);
    try {
      out.push_back(fit_least_squares(window, count, degree));
    } catch (const SingularFitError& e) {
      throw SingularFitError("chunk " + std::to_string(w) + ": " + e.what(), e.condition_ratio());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("chunk " + std::to_string(w) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vff
