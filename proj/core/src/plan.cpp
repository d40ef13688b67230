#include "vff/plan.hpp"

#include <algorithm>
#include <cmath>

#include "vff/errors.hpp"

namespace vff {

Plan::Plan(Vector start) : start_(std::move(start)), end_(start_) {
  if (start_.size() < 1) throw InvalidArgument("plan needs at least one axis");
  if (!start_.allFinite()) throw InvalidArgument("non-finite plan start");
}

Plan& Plan::move_to(const Vector& goal, double duration, const Vector& bump) {
  if (goal.size() != dims()) throw InvalidArgument("plan goal dimension mismatch");
  if (!(duration > 0.0)) throw InvalidArgument("move duration must be positive");
  const Vector b = bump.size() == 0 ? Vector::Zero(dims()) : bump;
  if (b.size() != dims()) throw InvalidArgument("plan bump dimension mismatch");
  const double t0 = this->duration();
  segments_.push_back({Kind::MinJerk, t0, t0 + duration, end_, goal, b});
  end_ = goal;
  return *this;
}

Plan& Plan::ramp(const Vector& velocity, double duration) {
  if (velocity.size() != dims()) throw InvalidArgument("ramp velocity dimension mismatch");
  if (!(duration > 0.0)) throw InvalidArgument("ramp duration must be positive");
  const double t0 = this->duration();
  const Vector goal = end_ + velocity * duration;
  segments_.push_back({Kind::Ramp, t0, t0 + duration, end_, goal, Vector::Zero(dims())});
  end_ = goal;
  return *this;
}

Plan& Plan::hold_for(double duration) {
  if (!(duration > 0.0)) throw InvalidArgument("hold duration must be positive");
  const double t0 = this->duration();
  segments_.push_back({Kind::Hold, t0, t0 + duration, end_, end_, Vector::Zero(dims())});
  return *this;
}

ReferenceSample Plan::sample_segment(const Segment& seg, double t) const {
  const double T = seg.t1 - seg.t0;
  const Vector delta = seg.to - seg.from;
  switch (seg.kind) {
    case Kind::Hold:
      return ReferenceSample::hold(seg.from);
    case Kind::Ramp: {
      const Vector v = delta / T;
      return {seg.from + v * (t - seg.t0), v, Vector::Zero(dims())};
    }
    case Kind::MinJerk:
      break;
  }
  const double s = std::clamp((t - seg.t0) / T, 0.0, 1.0);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double r = 1.0 - s;
  const double shape = s3 * (10.0 - 15.0 * s + 6.0 * s2);
  const double shape_d = 30.0 * s2 * r * r;
  const double shape_dd = 60.0 * s * (1.0 - 3.0 * s + 2.0 * s2);
  const double bump = 64.0 * s3 * r * r * r;
  const double bump_d = 64.0 * (3.0 * s2 * r * r * r - 3.0 * s3 * r * r);
  const double bump_dd = 64.0 * (6.0 * s * r * r * r - 18.0 * s2 * r * r + 6.0 * s3 * r);
  return {seg.from + shape * delta + bump * seg.bump,
          (shape_d * delta + bump_d * seg.bump) / T,
          (shape_dd * delta + bump_dd * seg.bump) / (T * T)};
}

ReferenceSample Plan::sample(double t) const {
  if (segments_.empty() || t <= 0.0) return ReferenceSample::hold(start_);
  if (t >= duration()) return ReferenceSample::hold(end_);
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double value, const Segment& s) { return value < s.t1; });
  return sample_segment(*it, t);
}

double min_jerk_duration(double distance, double peak_speed) {
  if (!(peak_speed > 0.0)) throw InvalidArgument("peak speed must be positive");
  return 15.0 * distance / (8.0 * peak_speed);
}

Plan make_transfer_plan(const Vector& start, const Vector& goal, double peak_speed,
                        std::uint64_t seed, double waypoint_jitter) {
  if (!(peak_speed > 0.0)) throw InvalidArgument("peak speed must be positive");
  if (start.size() != goal.size()) throw InvalidArgument("start/goal dimension mismatch");
  Plan plan(start);
  const Vector delta = goal - start;
  const double distance = delta.norm();
  if (distance == 0.0) return plan;

  Vector bump = Vector::Zero(start.size());
  if (waypoint_jitter > 0.0) {
    SeededUniform rng(seed);
    Vector side = Vector::Zero(start.size());
    if (start.size() == 2) {
      side << -delta.y(), delta.x();
    } else {
      for (Index i = 0; i < side.size(); ++i) side[i] = rng.next(-1.0, 1.0);
      side -= side.dot(delta) / delta.squaredNorm() * delta;
    }
    if (side.norm() > 0.0) {
      bump = side.normalized() * (waypoint_jitter * distance * rng.next(-1.0, 1.0));
    }
  }
  plan.move_to(goal, min_jerk_duration(distance, peak_speed), bump);
  return plan;
}

double SeededUniform::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace vff
