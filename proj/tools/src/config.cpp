#include "vff/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vff/errors.hpp"

namespace vff::cli {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type (" + obj_.at(key).dump() + ")");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename Parse>
auto parse_enum(const std::string& where, const std::string& text, Parse parse) {
  try {
    return parse(text);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string_view plan_kind_name(PlanKind kind) {
  return kind == PlanKind::Insertion ? "insertion" : "transfer";
}

std::string_view variant_name(TestVariant v) { return v == TestVariant::Welch ? "welch" : "pooled"; }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> from_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

PegInHoleGeometry parse_geometry(const json& j, const std::string& where) {
  PegInHoleGeometry g;
  ObjectReader r(j, where);
  std::vector<double> center = from_vector(g.hole_center);
  r.get("hole_center", center);
  if (center.size() != 2) throw ConfigError(r.path("hole_center") + ": expected 2 coordinates");
  g.hole_center = to_vector(center);
  r.get("hole_halfwidth", g.hole_halfwidth);
  r.get("clearance", g.clearance);
  r.get("success_tolerance", g.success_tolerance);
  r.get("wall_stiffness", g.wall_stiffness);
  r.get("wall_damping", g.wall_damping);
  r.get("funnel_halfangle", g.funnel_halfangle);
  r.get("insertion_depth", g.insertion_depth);
  r.get("fixture_depth", g.fixture_depth);
  r.finish();
  return g;
}

Scenario parse_scenario(const json& j) {
  ObjectReader r(j, "scenario");
  std::string kind = "peg_in_hole";
  r.get("kind", kind);
  if (kind == "free_space") {
    r.finish();
    return Scenario::free_space();
  }
  if (kind == "constant_force") {
    std::vector<double> force{0.0, 0.0};
    r.get("force", force);
    r.finish();
    return Scenario::constant_force(to_vector(force));
  }
  if (kind == "peg_in_hole") {
    PegInHoleGeometry g;
    if (const json* geometry = r.child("geometry")) g = parse_geometry(*geometry, "scenario.geometry");
    r.finish();
    try {
      return Scenario::peg_in_hole(g);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("scenario.geometry: ") + e.what());
    }
  }
  throw ConfigError("scenario.kind: unknown scenario '" + kind +
                    "' (expected free_space, constant_force or peg_in_hole)");
}

PlanSpec parse_plan(const json& j) {
  PlanSpec p;
  ObjectReader r(j, "plan");
  std::string kind(plan_kind_name(p.kind));
  r.get("kind", kind);
  if (kind == "insertion") {
    p.kind = PlanKind::Insertion;
  } else if (kind == "transfer") {
    p.kind = PlanKind::Transfer;
  } else {
    throw ConfigError("plan.kind: unknown plan '" + kind + "' (expected insertion or transfer)");
  }
  r.get("peak_speed", p.peak_speed);
  r.get("start_radius_min", p.start_radius_min);
  r.get("start_radius_max", p.start_radius_max);
  r.get("start_angle_min", p.start_angle_min);
  r.get("start_angle_max", p.start_angle_max);
  r.get("start_height", p.start_height);
  r.get("descent_speed", p.insertion.descent_speed);
  r.get("hover_height", p.insertion.hover_height);
  r.get("dwell", p.insertion.dwell);
  r.get("overshoot", p.insertion.overshoot);
  r.get("aim_error", p.insertion.aim_error);
  r.get("start", p.start);
  r.get("goal", p.goal);
  r.get("waypoint_jitter", p.waypoint_jitter);
  r.get("hold_after", p.hold_after);
  r.finish();
  p.insertion.peak_speed = p.peak_speed;
  p.insertion.waypoint_jitter = p.waypoint_jitter;
  return p;
}

CellSpec parse_cell(const json& j, std::size_t index) {
  const std::string where = "cells[" + std::to_string(index) + "]";
  ObjectReader r(j, where);
  CellSpec c;
  std::string mode(to_string(c.mode));
  std::string demo;
  std::string alternative(to_string(c.alternative));
  r.get("name", c.name);
  r.get("mode", mode);
  r.get("demo", demo);
  r.get("alternative", alternative);
  r.finish();
  if (c.name.empty()) throw ConfigError(where + ".name: required");
  c.mode = parse_enum(where + ".mode", mode, parse_reference_mode);
  // Position-only execution defaults to demonstrations recorded the same way.
  if (demo.empty()) demo = c.mode == ReferenceMode::PositionOnly ? "position" : "velocity";
  c.demo = parse_enum(where + ".demo", demo, parse_demo_controller);
  c.alternative = parse_enum(where + ".alternative", alternative, parse_alternative);
  return c;
}

ordered geometry_json(const PegInHoleGeometry& g) {
  ordered j;
  j["hole_center"] = from_vector(g.hole_center);
  j["hole_halfwidth"] = g.hole_halfwidth;
  j["clearance"] = g.clearance;
  j["success_tolerance"] = g.success_tolerance;
  j["wall_stiffness"] = g.wall_stiffness;
  j["wall_damping"] = g.wall_damping;
  j["funnel_halfangle"] = g.funnel_halfangle;
  j["insertion_depth"] = g.insertion_depth;
  j["fixture_depth"] = g.fixture_depth;
  return j;
}

ordered scenario_json(const Scenario& s) {
  ordered j;
  j["kind"] = std::string(s.name());
  if (const auto* cf = std::get_if<ConstantForce>(&s.kind())) j["force"] = from_vector(cf->force);
  if (const auto* peg = std::get_if<PegInHole>(&s.kind())) j["geometry"] = geometry_json(peg->geometry);
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  cfg.cells = {
      {"baseline", ReferenceMode::PositionOnly, DemoController::PositionOnly, Alternative::Less},
      {"fd", ReferenceMode::FiniteDifference, DemoController::VelocityAware, Alternative::Less},
      {"spline", ReferenceMode::Spline, DemoController::VelocityAware, Alternative::Less},
      {"ablation", ReferenceMode::PositionOnly, DemoController::VelocityAware, Alternative::Greater},
  };
  return cfg;
}

Gains ExperimentConfig::gains() const {
  if (!damping) return Gains::critically_damped(2, inertia, stiffness);
  return Gains(Vector::Constant(2, inertia), Vector::Constant(2, *damping),
               Vector::Constant(2, stiffness));
}

EpisodeConfig ExperimentConfig::episode_config(const CellSpec& cell, double rate,
                                               std::uint64_t seed) const {
  EpisodeConfig e;
  e.mode = cell.mode;
  e.demo = cell.demo;
  e.f_ctrl = f_ctrl;
  e.f_action = rate;
  e.gains = gains();
  e.duration_max = duration_max;
  e.seed = seed;
  e.chunk_horizon = chunk_horizon;
  e.chunk_execute = chunk_execute;
  e.blend_overlap = blend_overlap;
  e.operator_lead = operator_lead;
  e.accel_feedforward = accel_feedforward;
  e.integrator = integrator;
  e.inner_loop_tau = inner_loop_tau;
  e.demo_rate_hz = demo_rate_hz;
  e.spline_samples_per_ctrl = spline_samples_per_ctrl;
  e.stop_on_success = true;
  return e;
}

Plan ExperimentConfig::make_plan(std::uint64_t seed) const {
  if (plan.kind == PlanKind::Transfer) {
    Plan p = make_transfer_plan(to_vector(plan.start), to_vector(plan.goal), plan.peak_speed, seed,
                                plan.waypoint_jitter);
    if (plan.hold_after > 0.0) p.hold_for(plan.hold_after);
    return p;
  }
  const auto* peg = std::get_if<PegInHole>(&scenario.kind());
  const PegInHoleGeometry geometry = peg ? peg->geometry : PegInHoleGeometry{};
  SeededUniform rng(seed);
  const double r = rng.next(plan.start_radius_min, plan.start_radius_max);
  const double angle = rng.next(plan.start_angle_min, plan.start_angle_max);
  Vector start(2);
  start << geometry.hole_center[0] + r * std::cos(angle),
      geometry.top_y() + plan.start_height + r * std::sin(angle);
  return make_insertion_plan(start, geometry, plan.insertion, seed);
}

const CellSpec* ExperimentConfig::find_cell(const std::string& name) const {
  for (const auto& c : cells) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void ExperimentConfig::validate() const {
  if (cells.empty()) throw ConfigError("cells: at least one cell is required");
  std::set<std::string> names;
  for (const auto& c : cells) {
    if (!names.insert(c.name).second) throw ConfigError("cells: duplicate name '" + c.name + "'");
  }
  if (!baseline.empty() && !find_cell(baseline)) {
    throw ConfigError("baseline: no cell named '" + baseline + "'");
  }
  if (f_action.empty()) throw ConfigError("f_action: at least one action rate is required");
  if (episodes < 1) throw ConfigError("episodes: must be at least 1");
  if (workers < 1) throw ConfigError("workers: must be at least 1");
  if (!(success_grid_step > 0.0)) throw ConfigError("success_grid_step: must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha: must lie in (0, 1)");
  if (!(plan.peak_speed > 0.0)) throw ConfigError("plan.peak_speed: must be positive");
  if (plan.kind == PlanKind::Insertion) {
    if (!std::holds_alternative<PegInHole>(scenario.kind())) {
      throw ConfigError("plan.kind: insertion plans need the peg_in_hole scenario");
    }
    if (!(plan.start_radius_min > 0.0) || plan.start_radius_max < plan.start_radius_min) {
      throw ConfigError("plan: need 0 < start_radius_min <= start_radius_max");
    }
    if (plan.start_angle_max < plan.start_angle_min) {
      throw ConfigError("plan: need start_angle_min <= start_angle_max");
    }
  } else if (plan.start.size() != 2 || plan.goal.size() != 2) {
    throw ConfigError("plan: start and goal need 2 coordinates");
  }
  try {
    gains();
    for (double rate : f_action) {
      for (const auto& c : cells) episode_config(c, rate, seed_base).validate();
    }
    make_plan(seed_base);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg = ExperimentConfig::defaults();
  ObjectReader r(doc, "config");
  if (const json* s = r.child("scenario")) cfg.scenario = parse_scenario(*s);
  if (const json* g = r.child("gains")) {
    ObjectReader gr(*g, "gains");
    gr.get("inertia", cfg.inertia);
    gr.get("stiffness", cfg.stiffness);
    if (const json* d = gr.child("damping"); d && !d->is_null()) {
      double damping = 0.0;
      gr.get("damping", damping);
      cfg.damping = damping;
    }
    gr.finish();
  }
  if (const json* c = r.child("controller")) {
    ObjectReader cr(*c, "controller");
    std::string integrator(to_string(cfg.integrator));
    cr.get("f_ctrl", cfg.f_ctrl);
    cr.get("integrator", integrator);
    cr.get("inner_loop_tau", cfg.inner_loop_tau);
    cr.get("accel_feedforward", cfg.accel_feedforward);
    cr.finish();
    cfg.integrator = parse_enum("controller.integrator", integrator, parse_integrator);
  }
  if (const json* c = r.child("chunking")) {
    ObjectReader cr(*c, "chunking");
    cr.get("horizon", cfg.chunk_horizon);
    cr.get("execute", cfg.chunk_execute);
    cr.get("blend_overlap", cfg.blend_overlap);
    cr.get("demo_rate_hz", cfg.demo_rate_hz);
    cr.get("spline_samples_per_ctrl", cfg.spline_samples_per_ctrl);
    cr.get("operator_lead", cfg.operator_lead);
    cr.finish();
  }
  if (const json* cells = r.child("cells")) {
    if (!cells->is_array()) throw ConfigError("cells: expected an array");
    cfg.cells.clear();
    for (std::size_t i = 0; i < cells->size(); ++i) cfg.cells.push_back(parse_cell((*cells)[i], i));
  }
  r.get("baseline", cfg.baseline);
  r.get("f_action", cfg.f_action);
  r.get("episodes", cfg.episodes);
  r.get("seed_base", cfg.seed_base);
  r.get("duration_max", cfg.duration_max);
  if (const json* p = r.child("plan")) cfg.plan = parse_plan(*p);
  std::string out = cfg.out.string();
  r.get("out", out);
  cfg.out = out;
  r.get("workers", cfg.workers);
  r.get("write_traces", cfg.write_traces);
  r.get("success_grid_step", cfg.success_grid_step);
  std::string variant(variant_name(cfg.test_variant));
  r.get("test_variant", variant);
  if (variant == "pooled") {
    cfg.test_variant = TestVariant::Pooled;
  } else if (variant == "welch") {
    cfg.test_variant = TestVariant::Welch;
  } else {
    throw ConfigError("test_variant: unknown variant '" + variant + "' (expected pooled or welch)");
  }
  r.get("alpha", cfg.alpha);
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  ordered j;
  j["scenario"] = scenario_json(cfg.scenario);
  ordered gains;
  gains["inertia"] = cfg.inertia;
  gains["stiffness"] = cfg.stiffness;
  gains["damping"] = cfg.damping ? ordered(*cfg.damping) : ordered(nullptr);
  j["gains"] = gains;
  ordered controller;
  controller["f_ctrl"] = cfg.f_ctrl;
  controller["integrator"] = std::string(to_string(cfg.integrator));
  controller["inner_loop_tau"] = cfg.inner_loop_tau;
  controller["accel_feedforward"] = cfg.accel_feedforward;
  j["controller"] = controller;
  ordered chunking;
  chunking["horizon"] = cfg.chunk_horizon;
  chunking["execute"] = cfg.chunk_execute;
  chunking["blend_overlap"] = cfg.blend_overlap;
  chunking["demo_rate_hz"] = cfg.demo_rate_hz;
  chunking["spline_samples_per_ctrl"] = cfg.spline_samples_per_ctrl;
  chunking["operator_lead"] = cfg.operator_lead;
  j["chunking"] = chunking;
  ordered cells = ordered::array();
  for (const auto& c : cfg.cells) {
    ordered cell;
    cell["name"] = c.name;
    cell["mode"] = std::string(to_string(c.mode));
    cell["demo"] = std::string(to_string(c.demo));
    cell["alternative"] = std::string(to_string(c.alternative));
    cells.push_back(cell);
  }
  j["cells"] = cells;
  j["baseline"] = cfg.baseline;
  j["f_action"] = cfg.f_action;
  j["episodes"] = cfg.episodes;
  j["seed_base"] = cfg.seed_base;
  j["duration_max"] = cfg.duration_max;
  ordered plan;
  plan["kind"] = std::string(plan_kind_name(cfg.plan.kind));
  plan["peak_speed"] = cfg.plan.peak_speed;
  plan["start_radius_min"] = cfg.plan.start_radius_min;
  plan["start_radius_max"] = cfg.plan.start_radius_max;
  plan["start_angle_min"] = cfg.plan.start_angle_min;
  plan["start_angle_max"] = cfg.plan.start_angle_max;
  plan["start_height"] = cfg.plan.start_height;
  plan["descent_speed"] = cfg.plan.insertion.descent_speed;
  plan["hover_height"] = cfg.plan.insertion.hover_height;
  plan["dwell"] = cfg.plan.insertion.dwell;
  plan["overshoot"] = cfg.plan.insertion.overshoot;
  plan["aim_error"] = cfg.plan.insertion.aim_error;
  plan["start"] = cfg.plan.start;
  plan["goal"] = cfg.plan.goal;
  plan["waypoint_jitter"] = cfg.plan.waypoint_jitter;
  plan["hold_after"] = cfg.plan.hold_after;
  j["plan"] = plan;
  j["out"] = cfg.out.string();
  j["workers"] = cfg.workers;
  j["write_traces"] = cfg.write_traces;
  j["success_grid_step"] = cfg.success_grid_step;
  j["test_variant"] = std::string(variant_name(cfg.test_variant));
  j["alpha"] = cfg.alpha;
  return j.dump(2) + "\n";
}

}  // namespace vff::cli
