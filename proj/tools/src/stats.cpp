#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "vff/cli/commands.hpp"
#include "vff/errors.hpp"
#include "vff/io.hpp"

namespace vff::cli {

namespace {

double number_field(const std::string& text, const char* column, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(std::string("column '") + column + "': cannot parse '" + text + "'", line);
  }
  return value;
}

}  // namespace

std::vector<StatsRow> read_summary_table(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> columns;
  std::vector<StatsRow> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
    const auto fields = split_csv_line(line);
    if (columns.empty()) {
      for (std::size_t c = 0; c < fields.size(); ++c) columns[fields[c]] = c;
      for (const char* required : {"method", "mean", "n"}) {
        if (!columns.count(required)) {
          throw ParseError(std::string("summary table needs a '") + required + "' column", line_no);
        }
      }
      if (!columns.count("var") && !columns.count("sd")) {
        throw ParseError("summary table needs a 'var' or 'sd' column", line_no);
      }
      continue;
    }
    if (fields.size() != columns.size()) {
      throw DimensionMismatchError("expected " + std::to_string(columns.size()) + " fields, got " +
                                       std::to_string(fields.size()),
                                   line_no);
    }
    const auto field = [&](const char* name) -> std::string {
      const auto it = columns.find(name);
      return it == columns.end() ? std::string() : fields[it->second];
    };
    if (columns.count("status") && field("status") != "ok") continue;

    StatsRow row;
    row.group = field("group");
    row.method = field("method");
    if (row.method.empty()) throw ParseError("empty method name", line_no);
    row.summary.mean = number_field(field("mean"), "mean", line_no);
    const double n = number_field(field("n"), "n", line_no);
    if (n != std::floor(n) || n < 0) throw ParseError("column 'n' must be a count", line_no);
    row.summary.n = static_cast<std::int64_t>(n);
    if (columns.count("var")) {
      row.summary.variance = number_field(field("var"), "var", line_no);
    } else {
      const double sd = number_field(field("sd"), "sd", line_no);
      row.summary.variance = sd * sd;
    }
    if (const std::string alt = field("alternative"); !alt.empty()) {
      try {
        row.alternative = parse_alternative(alt);
      } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), line_no);
      }
    }
    try {
      row.summary.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(row.method + ": " + e.what(), line_no);
    }
    rows.push_back(std::move(row));
  }
  if (columns.empty()) throw ParseError("summary table has no header", line_no);
  return rows;
}

std::vector<StatsResult> compute_stats(const std::vector<StatsRow>& rows, const std::string& baseline,
                                       TestVariant variant, double alpha) {
  std::vector<std::string> groups;
  for (const auto& r : rows) {
    if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
  }
  if (groups.empty()) throw MissingBaselineError("summary table has no rows");

  std::vector<StatsResult> results;
  for (const auto& group : groups) {
    const auto label = group.empty() ? std::string("table") : "group '" + group + "'";
    const auto base = std::find_if(rows.begin(), rows.end(), [&](const StatsRow& r) {
      return r.group == group && r.method == baseline;
    });
    if (base == rows.end()) throw MissingBaselineError(label + " has no baseline row '" + baseline + "'");
    const auto members = std::count_if(rows.begin(), rows.end(),
                                       [&](const StatsRow& r) { return r.group == group; });
    if (members < 2) throw MissingBaselineError(label + " has only the baseline row '" + baseline + "'");

    for (const auto& r : rows) {
      if (r.group != group) continue;
      StatsResult res;
      res.row = r;
      res.is_baseline = &r == &*base;
      if (!res.is_baseline) {
        const Alternative alt = r.alternative.value_or(Alternative::Less);
        res.row.alternative = alt;
        res.test = t_test(r.summary, base->summary, alt, variant);
        res.significant = res.test->p_one_tailed < alpha;
      }
      results.push_back(std::move(res));
    }
  }
  return results;
}

void write_stats_table(const std::vector<StatsResult>& results, std::ostream& out) {
  out << "group,method,mean,var,n,t,p,dof,alternative,significant\n";
  for (const auto& r : results) {
    out << r.row.group << ',' << r.row.method << ',' << format_number(r.row.summary.mean) << ','
        << format_number(r.row.summary.variance) << ',' << r.row.summary.n << ',';
    if (r.test) {
      out << format_number(r.test->t_stat) << ',' << format_number(r.test->p_one_tailed) << ','
          << format_number(r.test->dof) << ',' << to_string(*r.row.alternative) << ','
          << (r.significant ? "yes" : "no") << '\n';
    } else {
      out << ",,,,\n";
    }
  }
}

std::vector<StatsResult> cmd_stats(const StatsOptions& options, std::ostream& out) {
  std::ifstream in(options.summaries);
  if (!in) throw ConfigError("cannot open summary table " + options.summaries.string());
  const auto results =
      compute_stats(read_summary_table(in), options.baseline, options.variant, options.alpha);
  write_stats_table(results, out);
  if (!options.out.empty()) {
    if (options.out.has_parent_path()) std::filesystem::create_directories(options.out.parent_path());
    std::ofstream file(options.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + options.out.string());
    write_stats_table(results, file);
  }
  return results;
}

}  // namespace vff::cli
