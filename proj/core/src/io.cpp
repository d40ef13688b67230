#include "vff/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vff/errors.hpp"

namespace vff {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& field, std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError("cannot parse '" + field + "' as a number", line);
  }
  return value;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_axis_header(std::ostream& out, const char* prefix, Index d) {
  for (Index i = 0; i < d; ++i) out << ',' << prefix << i;
}

void write_row(std::ostream& out, const Matrix& m, Index row) {
  for (Index c = 0; c < m.cols(); ++c) out << ',' << format_double(m(row, c));
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Index c = 0; c < v.size(); ++c) out << ',' << format_double(v[c]);
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

TrajectoryLog parse_trajectory_log(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  std::size_t line_no = 0;
  std::optional<Index> declared_dims;
  bool have_header = false;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (!have_header && text.front() == '#') {
      const auto colon = text.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(text.substr(1, colon - 1));
      const std::string value = trim(text.substr(colon + 1));
      if (key == "source") {
        log.header.source = value;
      } else if (key == "sample_rate_hz") {
        log.header.sample_rate_hz = parse_number(value, line_no);
      } else if (key == "dims") {
        declared_dims = static_cast<Index>(parse_number(value, line_no));
      }
      continue;
    }
    const auto fields = split_csv_line(text);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "t") {
        throw ParseError("expected header 't,x0,...'", line_no);
      }
      for (std::size_t c = 1; c < fields.size(); ++c) {
        if (fields[c] != "x" + std::to_string(c - 1)) {
          throw ParseError("header column " + std::to_string(c) + " must be 'x" +
                               std::to_string(c - 1) + "', got '" + fields[c] + "'",
                           line_no);
        }
      }
      log.header.dims = static_cast<Index>(fields.size() - 1);
      if (declared_dims && *declared_dims != log.header.dims) {
        throw DimensionMismatchError("metadata declares " + std::to_string(*declared_dims) +
                                         " axes, header has " + std::to_string(log.header.dims),
                                     line_no);
      }
      have_header = true;
      continue;
    }
    if (static_cast<Index>(fields.size()) != log.header.dims + 1) {
      throw DimensionMismatchError("expected " + std::to_string(log.header.dims + 1) +
                                       " columns, got " + std::to_string(fields.size()),
                                   line_no);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    if (!std::isfinite(row[0])) throw ParseError("non-finite time", line_no);
    if (!log.samples.times.empty() && !(row[0] > log.samples.times.back())) {
      throw NonMonotoneTimeError("time " + fields[0] + " does not increase (row " +
                                     std::to_string(rows.size() + 1) + ")",
                                 line_no);
    }
    log.samples.times.push_back(row[0]);
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("missing header 't,x0,...'", line_no);

  log.samples.positions.resize(static_cast<Index>(rows.size()), log.header.dims);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Index c = 0; c < log.header.dims; ++c) {
      log.samples.positions(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c + 1)];
    }
  }
  return log;
}

TrajectoryLog read_trajectory_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_trajectory_log(in);
}

void write_trajectory_log(const TrajectoryLog& log, std::ostream& out) {
  const Index d = log.samples.dims();
  if (!log.header.source.empty()) out << "# source: " << log.header.source << '\n';
  if (log.header.sample_rate_hz > 0.0) {
    out << "# sample_rate_hz: " << format_double(log.header.sample_rate_hz) << '\n';
  }
  out << "# dims: " << d << '\n';
  out << 't';
  write_axis_header(out, "x", d);
  out << '\n';
  for (Index j = 0; j < log.samples.size(); ++j) {
    out << format_double(log.samples.times[static_cast<std::size_t>(j)]);
    write_row(out, log.samples.positions, j);
    out << '\n';
  }
}

void write_trajectory_log(const TrajectoryLog& log, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_trajectory_log(log, out);
}

std::string spline_dataset_to_string(std::span<const BSplineTrajectory> chunks) {
  json doc;
  doc["format"] = kSplineDatasetFormat;
  doc["version"] = kSplineDatasetVersion;
  doc["chunks"] = json::array();
  for (const auto& c : chunks) {
    json chunk;
    chunk["degree"] = c.degree();
    chunk["knots"] = c.knots();
    chunk["dims"] = c.dims();
    json points = json::array();
    for (Index i = 0; i < c.num_control_points(); ++i) {
      json row = json::array();
      for (Index k = 0; k < c.dims(); ++k) row.push_back(c.control_points()(i, k));
      points.push_back(std::move(row));
    }
    chunk["control_points"] = std::move(points);
    chunk["fit_residual_rms"] = c.fit_residual_rms();
    doc["chunks"].push_back(std::move(chunk));
  }
  return doc.dump(2) + "\n";
}

void write_spline_dataset(std::span<const BSplineTrajectory> chunks,
                          const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << spline_dataset_to_string(chunks);
}

std::vector<BSplineTrajectory> spline_dataset_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed spline dataset: ") + e.what(), 0);
  }
  if (!doc.is_object() || !doc.contains("format") || !doc["format"].is_string() ||
      doc["format"].get<std::string>() != kSplineDatasetFormat) {
    throw FormatVersionError("not a spline dataset (format field missing or unknown)");
  }
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kSplineDatasetVersion) {
    throw FormatVersionError("unsupported spline dataset version " +
                             (doc.contains("version") ? doc["version"].dump() : "<missing>") +
                             " (expected " + std::to_string(kSplineDatasetVersion) + ")");
  }
  if (!doc.contains("chunks") || !doc["chunks"].is_array()) {
    throw ParseError("spline dataset has no chunk array", 0);
  }
  std::vector<BSplineTrajectory> chunks;
  std::size_t index = 0;
  for (const auto& c : doc["chunks"]) {
    try {
      const int degree = c.at("degree").get<int>();
      auto knots = c.at("knots").get<std::vector<double>>();
      const auto dims = c.at("dims").get<Index>();
      const auto& points = c.at("control_points");
      Matrix ctrl(static_cast<Index>(points.size()), dims);
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = points[i].get<std::vector<double>>();
        if (static_cast<Index>(row.size()) != dims) {
          throw InvalidArgument("control point " + std::to_string(i) + " has " +
                                std::to_string(row.size()) + " coordinates, dims is " +
                                std::to_string(dims));
        }
        for (Index k = 0; k < dims; ++k) ctrl(static_cast<Index>(i), k) = row[static_cast<std::size_t>(k)];
      }
      chunks.emplace_back(degree, std::move(knots), std::move(ctrl),
                          c.at("fit_residual_rms").get<double>());
    } catch (const json::exception& e) {
      throw ParseError("chunk " + std::to_string(index) + ": " + e.what(), 0);
    } catch (const InvalidArgument& e) {
      throw ParseError("chunk " + std::to_string(index) + ": " + e.what(), 0);
    }
    ++index;
  }
  return chunks;
}

std::vector<BSplineTrajectory> read_spline_dataset(const std::filesystem::path& path) {
  return spline_dataset_from_string(read_file(path));
}

void write_reference_trace(std::span<const double> times, std::span<const ReferenceSample> samples,
                           std::ostream& out) {
  if (times.size() != samples.size()) throw InvalidArgument("times/samples length mismatch");
  const Index d = samples.empty() ? 0 : samples.front().dims();
  out << 't';
  write_axis_header(out, "x", d);
  write_axis_header(out, "v", d);
  write_axis_header(out, "a", d);
  out << '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << format_double(times[i]);
    write_vector(out, samples[i].x_d);
    write_vector(out, samples[i].xd_dot);
    write_vector(out, samples[i].xd_ddot);
    out << '\n';
  }
}

void write_episode_trace(const EpisodeTrace& trace, std::ostream& out) {
  const Index d = trace.dims();
  out << 't';
  write_axis_header(out, "x", d);
  write_axis_header(out, "v", d);
  write_axis_header(out, "a", d);
  write_axis_header(out, "p", d);
  write_axis_header(out, "pv", d);
  write_axis_header(out, "acmd", d);
  write_axis_header(out, "f", d);
  write_axis_header(out, "g", d);
  out << '\n';
  for (Index i = 0; i < trace.steps(); ++i) {
    out << format_double(trace.times[static_cast<std::size_t>(i)]);
    for (const Matrix* m : {&trace.x_d, &trace.xd_dot, &trace.xd_ddot, &trace.x, &trace.v,
                            &trace.acc_cmd, &trace.f_ext, &trace.x_plan}) {
      write_row(out, *m, i);
    }
    out << '\n';
  }
}

void write_episode_trace(const EpisodeTrace& trace, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_episode_trace(trace, out);
}

std::string episode_summary_json(const EpisodeTrace& trace) {
  json doc;
  doc["success"] = trace.success_time.has_value();
  doc["success_time"] = trace.success_time ? json(*trace.success_time) : json(nullptr);
  doc["rms_error"] = trace.steps() > 0 ? rms_tracking_error(trace) : 0.0;
  doc["rms_plan_error"] =
      trace.steps() > 0 ? rms_tracking_error(trace, {}, TrackingTarget::Plan) : 0.0;
  doc["peak_force"] = trace.peak_force();
  doc["steps"] = trace.steps();
  doc["spline_clamped_queries"] =
      trace.spline_stats.clamped_before + trace.spline_stats.clamped_after;
  return doc.dump(2) + "\n";
}

void write_episode_summary(const EpisodeTrace& trace, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << episode_summary_json(trace);
}

}  // namespace vff
