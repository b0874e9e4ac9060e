#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "sdfkit/error.hpp"

namespace sdfkit::cli {

using nlohmann::json;

namespace {

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

bool scalar_array(const json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v)
    if (e.is_structured()) return false;
  return true;
}

void flatten(const json& v, const std::string& key, std::ostringstream& out) {
  if (v.is_object()) {
    for (const auto& item : v.items()) flatten(item.value(), key.empty() ? item.key() : key + "." + item.key(), out);
    return;
  }
  if (v.is_array() && !scalar_array(v)) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], key + "[" + std::to_string(i) + "]", out);
    return;
  }
  out << key;
  if (key.size() < 40) out << std::string(40 - key.size(), ' ');
  out << ' ';
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << scalar_text(v[i]);
  } else {
    out << scalar_text(v);
  }
  out << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace

std::string format_number(double v) { return json(v).dump(); }

json report_to_json(const Report& report) {
  json j;
  j["tool"] = report.tool;
  j["version"] = report.version;
  j["command"] = report.command;
  j["input_digest"] = report.input_digest;
  j["results"] = report.results;
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j;
}

std::string csv_text(const Report& report) {
  std::ostringstream out;
  out << "time,statistic,mean,std_error,n_paths\n";
  for (const CsvRow& r : report.csv)
    out << format_number(r.time) << ',' << r.statistic << ',' << format_number(r.mean) << ','
        << format_number(r.std_error) << ',' << r.n_paths << '\n';
  return out.str();
}

std::string table_text(const Report& report) {
  std::ostringstream out;
  out << report.tool << ' ' << report.version << '\n';
  out << "command " << report.command.dump() << '\n';
  out << "input_digest " << report.input_digest << '\n';
  out << '\n';
  flatten(report.results, "", out);
  return out.str();
}

std::string render(const Report& report, const std::string& format) {
  if (format == "json") return report_to_json(report).dump(2) + "\n";
  if (format == "table") return table_text(report);
  if (format == "csv") {
    if (report.csv.empty()) throw Error(ErrorCode::InvalidArgument, "csv output is only available for path commands");
    return csv_text(report);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + format + "'");
}

void write_report_files(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
  write_file(dir / "report.txt", table_text(report));
  if (!report.csv.empty()) write_file(dir / "stats.csv", csv_text(report));
}

}  // namespace sdfkit::cli
