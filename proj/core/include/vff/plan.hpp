#pragma once

#include <cstdint>
#include <vector>

#include "vff/reference.hpp"
#include "vff/types.hpp"

namespace vff {

/// Ground-truth motion with exact derivatives: a sequence of minimum-jerk
/// moves, constant-velocity ramps and holds. Before time zero the start is
/// held; after the last segment the final position is held.
class Plan {
 public:
  explicit Plan(Vector start);

  /// Quintic point-to-point move. `bump` adds bump * 64 s^3 (1-s)^3, which
  /// leaves position, velocity and acceleration at both ends unchanged.
  Plan& move_to(const Vector& goal, double duration, const Vector& bump = Vector());
  Plan& ramp(const Vector& velocity, double duration);
  Plan& hold_for(double duration);

  ReferenceSample sample(double t) const;
  double duration() const { return segments_.empty() ? 0.0 : segments_.back().t1; }
  Index dims() const { return start_.size(); }
  const Vector& start() const { return start_; }
  const Vector& end_position() const { return end_; }

 private:
  enum class Kind { MinJerk, Ramp, Hold };
  struct Segment {
    Kind kind;
    double t0;
    double t1;
    Vector from;
    Vector to;
    Vector bump;
  };

  ReferenceSample sample_segment(const Segment& seg, double t) const;

  Vector start_;
  Vector end_;
  std::vector<Segment> segments_;
};

/// Duration of a quintic move whose peak speed is `peak_speed`: 15 d / (8 v).
double min_jerk_duration(double distance, double peak_speed);

/// Minimum-jerk transfer from `start` to `goal` peaking at `peak_speed`.
/// A non-zero `waypoint_jitter` bends the path sideways by up to
/// jitter * distance, drawn from `seed`.
Plan make_transfer_plan(const Vector& start, const Vector& goal, double peak_speed,
                        std::uint64_t seed, double waypoint_jitter = 0.0);

/// Deterministic uniform double in [0, 1) from a splitmix64 stream.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : state_(seed) {}
  double next();
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::uint64_t state_;
};

}  // namespace vff
