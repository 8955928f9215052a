#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "elkit/experiments.hpp"

namespace elkit {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string format_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out = "scenario,label,n,kind,value,mc_se\n";
    for (const auto& r : report.rows) {
      out += report.scenario + ',' + r.label + ',' + std::to_string(r.n) + ',' + r.kind + ',' +
             format_double(r.value) + ',' + format_double(r.mc_se) + '\n';
    }
    return out;
  }
  json j;
  j["scenario"] = report.scenario;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"label", r.label},
                         {"n", r.n},
                         {"kind", r.kind},
                         {"value", number_or_null(r.value)},
                         {"mc_se", number_or_null(r.mc_se)}});
  }
  j["raw"] = json::object();
  for (const auto& [name, series] : report.raw) {
    json arr = json::array();
    for (double v : series) arr.push_back(number_or_null(v));
    j["raw"][name] = std::move(arr);
  }
  return j.dump(2) + '\n';
}

Report parse_report_json(const std::string& text) {
  const json j = json::parse(text);
  Report report;
  report.scenario = j.at("scenario").get<std::string>();
  for (const auto& r : j.at("rows")) {
    report.rows.push_back({r.at("label").get<std::string>(), r.at("n").get<int>(),
                           r.at("kind").get<std::string>(), number_or_nan(r.at("value")),
                           number_or_nan(r.at("mc_se"))});
  }
  if (j.contains("raw")) {
    for (const auto& [name, arr] : j.at("raw").items()) {
      auto& series = report.raw[name];
      for (const auto& v : arr) series.push_back(number_or_nan(v));
    }
  }
  return report;
}

void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open report file for writing: " + path.string());
  out << format_report(report, format);
  if (!out) throw std::runtime_error("failed writing report file: " + path.string());
}

Dataset parse_dataset(const std::string& text, std::size_t obs_dim) {
  if (obs_dim == 0) throw std::domain_error("observation dimension must be positive");
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::size_t cells = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const std::string cell =
          trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                               : comma - start));
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
          !std::isfinite(v))
        throw ParseError("non-numeric cell '" + cell + "'", row);
      values.push_back(v);
      ++cells;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells != obs_dim)
      throw ParseError("expected " + std::to_string(obs_dim) + " columns, found " +
                           std::to_string(cells),
                       row);
  }
  if (values.empty()) throw ParseError("dataset has no rows", row);
  return Dataset(obs_dim, std::move(values));
}

Dataset read_dataset(const std::filesystem::path& path, std::size_t obs_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), obs_dim);
}

}  // namespace elkit
