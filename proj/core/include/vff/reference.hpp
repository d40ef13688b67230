#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "vff/spline.hpp"
#include "vff/types.hpp"

namespace vff {

/// Controller input at one query time: desired position, velocity and
/// acceleration.
struct ReferenceSample {
  Vector x_d;
  Vector xd_dot;
  Vector xd_ddot;

  /// Stationary reference at `x`.
  static ReferenceSample hold(const Vector& x);
  Index dims() const { return x_d.size(); }
  bool all_finite() const;
};

/// How low-rate actions are turned into a control-rate reference.
enum class ReferenceMode {
  /// Stepwise targets, zero velocity feedforward.
  PositionOnly,
  /// Linear interpolation, piecewise-constant velocity from differences.
  FiniteDifference,
  /// Analytic samples of a cubic B-spline.
  Spline,
};

/// "zoh", "fd" or "spline".
std::string_view to_string(ReferenceMode mode);
/// Accepts the names above; throws InvalidArgument otherwise.
ReferenceMode parse_reference_mode(std::string_view name);

/// Targets emitted at a fixed action period starting at `start_time`.
struct ActionChunk {
  double start_time = 0.0;
  double dt_action = 0.0;
  std::vector<Vector> targets;
  std::optional<std::vector<Vector>> velocities;

  Index horizon() const { return static_cast<Index>(targets.size()); }
  double tick(Index j) const { return start_time + static_cast<double>(j) * dt_action; }
  void validate() const;
};

/// Index of the action active at `t`: floor((t - start) / dt), clamped to the
/// last target. A query within 1e-9 periods below a tick counts as that tick.
Index active_action(const ActionChunk& chunk, double t);

/// Zero-order hold: latest target, no feedforward.
ReferenceSample zoh_reference(const ActionChunk& chunk, double t);

/// Linear interpolation between consecutive targets with velocity
/// (targets[j+1] - targets[j]) / dt. Holds the last target past the chunk.
ReferenceSample fd_reference(const ActionChunk& chunk, double t);

/// Counts of queries that fell outside a spline's domain.
struct SplineQueryStats {
  std::size_t clamped_before = 0;
  std::size_t clamped_after = 0;
};

/// (x, x', x'') of the trajectory at `t`. Outside the domain the nearest end
/// point is held with zero velocity and acceleration.
ReferenceSample spline_reference(const BSplineTrajectory& traj, double t,
                                 SplineQueryStats* stats = nullptr);

/// Backward differences smoothed by a first-order low-pass filter with time
/// constant 1 / (2 pi cutoff_hz). One row per sample; the first row is zero.
Matrix lowpass_differentiate(const TrajectorySamples& samples, double cutoff_hz);

using ReferenceSource = std::function<ReferenceSample(double)>;

/// 3s^2 - 2s^3 on [0, 1], clamped outside.
double smoothstep(double s);

/// Crossfade from `previous` to `next` over [switch_time, switch_time + overlap]
/// with smoothstep weights applied to position, velocity and acceleration.
/// A zero overlap switches to `next` at switch_time.
ReferenceSample blend_chunks(const ReferenceSource& previous, const ReferenceSource& next,
                             double switch_time, double overlap, double t);

}  // namespace vff
