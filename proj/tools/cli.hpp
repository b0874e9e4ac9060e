#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sdfkit::cli {

inline constexpr const char* kToolName = "sdfkit";
inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string utility = "log";
  double x = 1.0;
  double horizon = 1.0;
  std::size_t paths = 10000;
  std::size_t steps = 0;  // 0 = command default
  std::optional<std::uint64_t> seed;
  std::vector<double> portfolio;
  std::vector<double> kappa;
  int kind = 1;
  unsigned threads = 1;
  std::string out_dir;
  std::string format = "json";
  nlohmann::json echo;  // command line as given, minus --out
};

struct CsvRow {
  double time = 0.0;
  std::string statistic;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

struct Report {
  std::string tool = kToolName;
  std::string version = kToolVersion;
  nlohmann::json command;
  std::string input_digest;
  nlohmann::json results;
  double wall_clock_seconds = 0.0;
  std::vector<CsvRow> csv;  // path statistics, empty for one-period commands
};

/// Runs one command. Throws sdfkit::Error.
Report execute(const RunConfig& config);

nlohmann::json report_to_json(const Report& report);
std::string csv_text(const Report& report);
std::string table_text(const Report& report);

/// Renders `report` in `format` (json, csv or table). csv needs path statistics.
std::string render(const Report& report, const std::string& format);

/// Writes report.json, report.txt and, for path commands, stats.csv.
void write_report_files(const Report& report, const std::filesystem::path& dir);

/// Full command-line entry point; returns the process exit status
/// (0 success, 1 domain error, 2 input error).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal form, as used in every output format.
std::string format_number(double v);

}  // namespace sdfkit::cli
