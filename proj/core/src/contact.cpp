#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vff/errors.hpp"
#include "vff/sim.hpp"

namespace vff {

namespace {

struct Closest {
  double distance = std::numeric_limits<double>::infinity();
  Eigen::Vector2d point;
};

void consider_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                      Closest& best) {
  const Eigen::Vector2d ab = b - a;
  const double s = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  const Eigen::Vector2d q = a + s * ab;
  const double dist = (p - q).norm();
  if (dist < best.distance) best = {dist, q};
}

Vector peg_force(const PegInHoleGeometry& g, const Vector& x, const Vector& v) {
  if (x.size() != 2 || v.size() != 2) throw InvalidArgument("peg-in-hole scenario is planar (2-D)");
  const double u = x[0] - g.hole_center[0];
  const double h = x[1] - g.hole_center[1];
  const double side = u < 0.0 ? -1.0 : 1.0;
  const double lateral = std::abs(u);
  const double top = g.funnel_height();
  const double bottom = -g.fixture_depth;

  const double opening = h <= 0.0 ? g.clearance : g.clearance + h * std::tan(g.funnel_halfangle);
  const bool inside = h > bottom && h < top && lateral > opening;
  if (!inside) return Vector::Zero(2);

  // Exposed boundary of the right-hand solid, in mirrored coordinates.
  const Eigen::Vector2d p(lateral, h);
  const double far = std::max(lateral, g.hole_halfwidth) + 1.0;
  Closest best;
  consider_segment(p, {g.clearance, bottom}, {g.clearance, 0.0}, best);
  consider_segment(p, {g.clearance, 0.0}, {g.hole_halfwidth, top}, best);
  consider_segment(p, {g.hole_halfwidth, top}, {far, top}, best);
  consider_segment(p, {g.clearance, bottom}, {far, bottom}, best);

  if (!(best.distance > 0.0)) return Vector::Zero(2);
  Eigen::Vector2d normal = (best.point - p) / best.distance;
  normal[0] *= side;
  const double approach = -(v[0] * normal[0] + v[1] * normal[1]);
  const double magnitude =
      std::max(0.0, g.wall_stiffness * best.distance + g.wall_damping * approach);
  Vector f(2);
  f << magnitude * normal[0], magnitude * normal[1];
  return f;
}

}  // namespace

double PegInHoleGeometry::funnel_height() const {
  return (hole_halfwidth - clearance) / std::tan(funnel_halfangle);
}

double PegInHoleGeometry::top_y() const { return hole_center[1] + funnel_height(); }

void PegInHoleGeometry::validate() const {
  if (hole_center.size() != 2 || !hole_center.allFinite()) {
    throw InvalidArgument("hole center must be a finite 2-D point");
  }
  if (!(clearance > 0.0)) throw InvalidArgument("clearance must be positive");
  if (!(success_tolerance >= 0.0)) throw InvalidArgument("success tolerance must be non-negative");
  if (!(hole_halfwidth > clearance)) throw InvalidArgument("hole half-width must exceed clearance");
  if (!(wall_stiffness > 0.0)) throw InvalidArgument("wall stiffness must be positive");
  if (!(wall_damping >= 0.0)) throw InvalidArgument("wall damping must be non-negative");
  if (!(funnel_halfangle > 0.0 && funnel_halfangle < 1.5707963267948966)) {
    throw InvalidArgument("funnel half-angle must lie in (0, pi/2)");
  }
  if (!(insertion_depth > 0.0)) throw InvalidArgument("insertion depth must be positive");
  if (!(fixture_depth > insertion_depth)) {
    throw InvalidArgument("fixture depth must exceed the insertion depth");
  }
}

Scenario Scenario::constant_force(Vector force) {
  if (force.size() < 1 || !force.allFinite()) throw InvalidArgument("invalid constant force");
  return Scenario(ConstantForce{std::move(force)});
}

Scenario Scenario::peg_in_hole(PegInHoleGeometry geometry) {
  geometry.validate();
  return Scenario(PegInHole{std::move(geometry)});
}

std::string_view Scenario::name() const {
  if (std::holds_alternative<FreeSpace>(kind_)) return "free_space";
  if (std::holds_alternative<ConstantForce>(kind_)) return "constant_force";
  return "peg_in_hole";
}

bool Scenario::success(const Vector& x) const {
  const auto* peg = std::get_if<PegInHole>(&kind_);
  if (!peg) return false;
  const auto& g = peg->geometry;
  return std::abs(x[0] - g.hole_center[0]) <= g.clearance + g.success_tolerance &&
         x[1] <= g.hole_center[1] - g.insertion_depth;
}

Vector contact_force(const Scenario& scenario, const Vector& x, const Vector& v) {
  return std::visit(
      [&](const auto& kind) -> Vector {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, FreeSpace>) {
          return Vector::Zero(x.size());
        } else if constexpr (std::is_same_v<T, ConstantForce>) {
          if (kind.force.size() != x.size()) {
            throw InvalidArgument("constant force has dimension " +
                                  std::to_string(kind.force.size()) + ", state has " +
                                  std::to_string(x.size()));
          }
          return kind.force;
        } else {
          return peg_force(kind.geometry, x, v);
        }
      },
      scenario.kind());
}

}  // namespace vff
