#pragma once

#include <span>
#include <vector>

#include "vff/types.hpp"

namespace vff {

/// Time-stamped positions, one row per sample.
struct TrajectorySamples {
  std::vector<double> times;
  Matrix positions;

  Index size() const { return static_cast<Index>(times.size()); }
  Index dims() const { return positions.cols(); }

  /// Throws InvalidArgument unless times are strictly increasing, finite, and
  /// match the row count, with at least `min_samples` rows.
  void validate(Index min_samples = 1) const;
};

/// Piecewise-polynomial curve x(t) = sum_i B_{i,k}(t) P_i.
///
/// Control points are stored one per row. The curve is evaluable on the
/// closed interval [knots[k], knots[n+1]], where n+1 is the number of control
/// points; at the right end the last non-empty span is used so clamped
/// curves interpolate their final control point.
class BSplineTrajectory {
 public:
  BSplineTrajectory(int degree, std::vector<double> knots, Matrix control_points,
                    double fit_residual_rms = 0.0);

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  const Matrix& control_points() const { return control_points_; }
  Index num_control_points() const { return control_points_.rows(); }
  Index dims() const { return control_points_.cols(); }
  double fit_residual_rms() const { return fit_residual_rms_; }

  double t_begin() const { return knots_[static_cast<std::size_t>(degree_)]; }
  double t_end() const { return knots_[static_cast<std::size_t>(num_control_points())]; }
  bool contains(double t) const { return t >= t_begin() && t <= t_end(); }

  /// Position (order 0), velocity (1) or acceleration (2) at `t`.
  /// Touches only the degree+1 control points whose support covers `t`.
  Vector eval(double t, int order = 0) const;

  /// Index m with knots[m] <= t < knots[m+1], degree <= m <= n.
  Index find_span(double t) const;

 private:
  int degree_;
  std::vector<double> knots_;
  Matrix control_points_;
  double fit_residual_rms_;
};

/// Knot vector with degree+1 repeated end knots and uniform interior spacing.
std::vector<double> make_clamped_uniform_knots(Index n_ctrl, int degree, double t_start,
                                               double t_end);

/// B_{i,k}(t) by the Cox-de Boor recursion. Terms with a zero-length knot
/// span contribute 0. At t == knots.back() the last non-empty degree-0 span
/// is treated as closed, so a clamped basis still sums to one there.
double basis(Index i, int degree, double t, std::span<const double> knots);

/// First or second derivative of B_{i,k}(t) via the derivative recurrence.
double basis_derivative(Index i, int degree, double t, std::span<const double> knots,
                        int order);

/// Nonzero basis values and derivatives up to `max_order` at `t` on span
/// `span`: result(r, j) = d^r/dt^r B_{span-degree+j, degree}(t).
Matrix local_basis_derivatives(Index span, int degree, double t,
                               std::span<const double> knots, int max_order);

/// One control point per four samples, never fewer than degree+1.
Index default_control_point_count(Index n_samples, int degree = 3);

/// Least-squares fit on a clamped uniform knot vector spanning the sample
/// times. Axes share the basis matrix and are solved together by a banded
/// Givens QR factorization. Throws SingularFitError when the estimated
/// smallest/largest singular value ratio falls below 1e-10.
BSplineTrajectory fit_least_squares(const TrajectorySamples& samples, Index n_ctrl,
                                    int degree = 3);

/// The sub-curve of `traj` restricted to the spans covering [t0, t1]. The
/// result reproduces `traj` exactly on that interval; its knots are the
/// original ones, so it is generally not clamped.
BSplineTrajectory extract_window(const BSplineTrajectory& traj, double t0, double t1);

/// RMS over samples of |x_j - traj(t_j)|.
double residual_rms(const BSplineTrajectory& traj, const TrajectorySamples& samples);

enum class ChunkFitMode {
  /// One fit over all samples, then cut into windows.
  GlobalWindows,
  /// An independent fit per window.
  PerChunk,
};

/// Splits the sample range into consecutive windows of `chunk_duration`
/// seconds (the last one may be shorter) and produces one trajectory per
/// window. Each trajectory carries the residual RMS of the samples it covers.
/// `n_ctrl` is the control-point count of each fit: the global fit in
/// GlobalWindows mode, each window in PerChunk mode. Zero selects
/// default_control_point_count.
std::vector<BSplineTrajectory> fit_chunks(const TrajectorySamples& samples,
                                          double chunk_duration, Index n_ctrl,
                                          ChunkFitMode mode, int degree = 3);

}  // namespace vff
