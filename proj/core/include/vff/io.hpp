#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vff/metrics.hpp"
#include "vff/sim.hpp"
#include "vff/spline.hpp"

namespace vff {

/// Delimited time series: optional `# key: value` metadata lines, then the
/// header `t,x0,...,x{d-1}` and one row per sample.
struct TrajectoryLog {
  struct Header {
    Index dims = 0;
    std::string source;
    double sample_rate_hz = 0.0;
  };
  Header header;
  TrajectorySamples samples;
};

/// Throws ParseError (with line number), NonMonotoneTimeError or
/// DimensionMismatchError on malformed input.
TrajectoryLog read_trajectory_log(const std::filesystem::path& path);
TrajectoryLog parse_trajectory_log(std::istream& in);
void write_trajectory_log(const TrajectoryLog& log, const std::filesystem::path& path);
void write_trajectory_log(const TrajectoryLog& log, std::ostream& out);

inline constexpr int kSplineDatasetVersion = 1;
inline constexpr const char* kSplineDatasetFormat = "vfflab.spline_dataset";

/// JSON document {format, version, chunks: [{degree, knots, dims,
/// control_points, fit_residual_rms}]}.
void write_spline_dataset(std::span<const BSplineTrajectory> chunks,
                          const std::filesystem::path& path);
std::string spline_dataset_to_string(std::span<const BSplineTrajectory> chunks);
/// Throws FormatVersionError for an unknown format or version, ParseError
/// for malformed documents.
std::vector<BSplineTrajectory> read_spline_dataset(const std::filesystem::path& path);
std::vector<BSplineTrajectory> spline_dataset_from_string(const std::string& text);

/// Reference time series `t,x0..,v0..,a0..`.
void write_reference_trace(std::span<const double> times, std::span<const ReferenceSample> samples,
                           std::ostream& out);

/// Episode time series: the reference columns followed by plant position
/// `p*`, plant velocity `pv*`, commanded acceleration `acmd*`, external force
/// `f*` and plan position `g*`.
void write_episode_trace(const EpisodeTrace& trace, const std::filesystem::path& path);
void write_episode_trace(const EpisodeTrace& trace, std::ostream& out);

/// Side-car JSON {success, success_time, rms_error, peak_force}.
std::string episode_summary_json(const EpisodeTrace& trace);
void write_episode_summary(const EpisodeTrace& trace, const std::filesystem::path& path);

/// `%.17g`: parses back to the same double.
std::string format_double(double value);

/// Splits one delimited line on `,`, trimming surrounding whitespace.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace vff
