#include "vff/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vff/errors.hpp"

namespace vff {

ReferenceSample ReferenceSample::hold(const Vector& x) {
  return {x, Vector::Zero(x.size()), Vector::Zero(x.size())};
}

bool ReferenceSample::all_finite() const {
  return x_d.allFinite() && xd_dot.allFinite() && xd_ddot.allFinite();
}

std::string_view to_string(ReferenceMode mode) {
  switch (mode) {
    case ReferenceMode::PositionOnly:
      return "zoh";
    case ReferenceMode::FiniteDifference:
      return "fd";
    case ReferenceMode::Spline:
      return "spline";
  }
  return "unknown";
}

ReferenceMode parse_reference_mode(std::string_view name) {
  if (name == "zoh") return ReferenceMode::PositionOnly;
  if (name == "fd") return ReferenceMode::FiniteDifference;
  if (name == "spline") return ReferenceMode::Spline;
  throw InvalidArgument("unknown reference mode '" + std::string(name) +
                        "' (expected zoh, fd or spline)");
}

void ActionChunk::validate() const {
  if (targets.empty()) throw InvalidArgument("action chunk needs at least one target");
  if (!(dt_action > 0.0) || !std::isfinite(dt_action)) {
    throw InvalidArgument("action period must be positive");
  }
  if (!std::isfinite(start_time)) throw InvalidArgument("non-finite chunk start time");
  const Index d = targets.front().size();
  for (const auto& x : targets) {
    if (x.size() != d) throw InvalidArgument("chunk targets differ in dimension");
    if (!x.allFinite()) throw InvalidArgument("non-finite chunk target");
  }
  if (velocities) {
    if (velocities->size() != targets.size()) {
      throw InvalidArgument("chunk velocities must match targets in length");
    }
    for (const auto& v : *velocities) {
      if (v.size() != d) throw InvalidArgument("chunk velocities differ in dimension");
    }
  }
}

Index active_action(const ActionChunk& chunk, double t) {
  if (t < chunk.start_time) {
    throw InvalidArgument("query time " + std::to_string(t) + " precedes chunk start " +
                          std::to_string(chunk.start_time));
  }
  const double u = (t - chunk.start_time) / chunk.dt_action;
  const double j = std::floor(u + 1e-9);
  const double last = static_cast<double>(chunk.horizon() - 1);
  return static_cast<Index>(std::min(j, last));
}

ReferenceSample zoh_reference(const ActionChunk& chunk, double t) {
  const Index j = active_action(chunk, t);
  return ReferenceSample::hold(chunk.targets[static_cast<std::size_t>(j)]);
}

ReferenceSample fd_reference(const ActionChunk& chunk, double t) {
  const Index j = active_action(chunk, t);
  const auto& here = chunk.targets[static_cast<std::size_t>(j)];
  if (j + 1 >= chunk.horizon()) return ReferenceSample::hold(here);
  const auto& next = chunk.targets[static_cast<std::size_t>(j + 1)];
  const double s = std::clamp((t - chunk.tick(j)) / chunk.dt_action, 0.0, 1.0);
  const Vector velocity = (next - here) / chunk.dt_action;
  return {here + s * (next - here), velocity, Vector::Zero(here.size())};
}

ReferenceSample spline_reference(const BSplineTrajectory& traj, double t, SplineQueryStats* stats) {
  if (t < traj.t_begin()) {
    if (stats) ++stats->clamped_before;
    return ReferenceSample::hold(traj.eval(traj.t_begin(), 0));
  }
  if (t > traj.t_end()) {
    if (stats) ++stats->clamped_after;
    return ReferenceSample::hold(traj.eval(traj.t_end(), 0));
  }
  return {traj.eval(t, 0), traj.eval(t, 1), traj.eval(t, 2)};
}

Matrix lowpass_differentiate(const TrajectorySamples& samples, double cutoff_hz) {
  samples.validate(2);
  const double span = samples.times.back() - samples.times.front();
  const double mean_rate = static_cast<double>(samples.size() - 1) / span;
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * mean_rate)) {
    throw InvalidArgument("cutoff " + std::to_string(cutoff_hz) +
                          " Hz must be positive and below the Nyquist rate " +
                          std::to_string(0.5 * mean_rate) + " Hz");
  }
  const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  Matrix out = Matrix::Zero(samples.size(), samples.dims());
  for (Index j = 1; j < samples.size(); ++j) {
    const double dt = samples.times[static_cast<std::size_t>(j)] -
                      samples.times[static_cast<std::size_t>(j - 1)];
    const double alpha = dt / (tau + dt);
    const Vector raw = (samples.positions.row(j) - samples.positions.row(j - 1)).transpose() / dt;
    out.row(j) = out.row(j - 1) + alpha * (raw.transpose() - out.row(j - 1));
  }
  return out;
}

double smoothstep(double s) {
  const double c = std::clamp(s, 0.0, 1.0);
  return c * c * (3.0 - 2.0 * c);
}

ReferenceSample blend_chunks(const ReferenceSource& previous, const ReferenceSource& next,
                             double switch_time, double overlap, double t) {
  if (!(overlap >= 0.0)) throw InvalidArgument("blend overlap must be non-negative");
  if (t < switch_time) return previous(t);
  if (overlap == 0.0 || t >= switch_time + overlap) return next(t);
  const double w = smoothstep((t - switch_time) / overlap);
  const ReferenceSample a = previous(t);
  const ReferenceSample b = next(t);
  return {(1.0 - w) * a.x_d + w * b.x_d, (1.0 - w) * a.xd_dot + w * b.xd_dot,
          (1.0 - w) * a.xd_ddot + w * b.xd_ddot};
}

}  // namespace vff
