#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include "tsql/error.hpp"
#include "tsql/harness.hpp"

namespace tsql {

/// Shortest text that round-trips to the same double, at most 17 digits.
inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw NumericError("could not format value");
  return std::string(buf, end);
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace detail

/// `step,algorithm,value,stderr`, algorithms in config order.
inline void write_metric_csv(const MetricSeries& m, std::ostream& out) {
  out << "step,algorithm,value,stderr\n";
  for (std::size_t g = 0; g < m.labels.size(); ++g)
    for (std::size_t s = 0; s < m.steps.size(); ++s)
      out << m.steps[s] << ',' << m.labels[g] << ',' << format_double(m.values[g][s].mean) << ','
          << format_double(m.values[g][s].stderr_of_mean) << '\n';
}

inline void write_summary_csv(const RunRecord& rec, std::ostream& out) {
  out << "algorithm,metric,value\n";
  for (const auto& row : rec.summary)
    out << row.algorithm << ',' << row.metric << ',' << format_double(row.value) << '\n';
}

/**
 * Writes <metric>.csv for every series, summary.csv and config.json (the
 * echoed config with the seed actually used) under `dir`. Wall-clock time is
 * deliberately left out so reruns compare byte-for-byte.
 */
inline void write_record(const RunRecord& rec, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& m : rec.series) {
    auto out = detail::open_output(dir / (m.name + ".csv"));
    write_metric_csv(m, out);
  }
  {
    auto out = detail::open_output(dir / "summary.csv");
    write_summary_csv(rec, out);
  }
  auto out = detail::open_output(dir / "config.json");
  out << rec.config.dump(2) << '\n';
}

}  // namespace tsql
