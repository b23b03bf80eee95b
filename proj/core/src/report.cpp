#include "collapse/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace collapse {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // prefer the shortest representation that round-trips
  for (int prec = 1; prec <= 16; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(probe, "%lf", &back);
    if (back == v) return probe;
  }
  return buf;
}

ResultEntry ResultEntry::real(const std::string& name,
                              const IntegralResult& r) {
  ResultEntry e;
  e.name = name;
  e.re = r.value;
  e.error = r.error_estimate;
  e.converged = r.converged;
  e.evaluations = r.evaluations;
  return e;
}

ResultEntry ResultEntry::complex(const std::string& name,
                                 const ComplexIntegralResult& r) {
  ResultEntry e;
  e.name = name;
  e.re = r.value.real();
  e.im = r.value.imag();
  e.error = r.error_estimate;
  e.converged = r.converged;
  e.evaluations = r.evaluations;
  e.complex_valued = true;
  return e;
}

std::string to_json_string(const Report& report) {
  ordered_json j;
  j["schema"] = report.schema;
  j["toolkit_version"] = report.toolkit_version;
  j["subcommand"] = report.subcommand;
  j["config_hash"] = report.config_hash;
  j["provenance"] = {{"seed", report.seed},
                     {"version", report.toolkit_version}};
  if (!report.request_echo.empty()) {
    j["request"] = ordered_json::parse(report.request_echo);
  } else {
    j["request"] = ordered_json::object();
  }
  j["results"] = ordered_json::array();
  for (const auto& r : report.results) {
    ordered_json e;
    e["name"] = r.name;
    e["value"] = r.re;
    if (r.complex_valued) e["value_im"] = r.im;
    e["error"] = r.error;
    e["converged"] = r.converged;
    e["evaluations"] = r.evaluations;
    j["results"].push_back(e);
  }
  j["scans"] = ordered_json::array();
  for (const auto& s : report.scans) {
    ordered_json e;
    e["name"] = s.name;
    e["verdict"] = s.verdict;
    e["points"] = ordered_json::array();
    for (const auto& p : s.points) {
      e["points"].push_back({{"cutoff", p.cutoff},
                             {"value", p.value},
                             {"error", p.error},
                             {"converged", p.converged}});
    }
    j["scans"].push_back(e);
  }
  j["series"] = ordered_json::array();
  for (const auto& s : report.series) {
    ordered_json e;
    e["name"] = s.name;
    e["columns"] = s.columns;
    e["rows"] = s.rows;
    j["series"].push_back(e);
  }
  j["verdicts"] = ordered_json::array();
  for (const auto& v : report.verdicts) {
    j["verdicts"].push_back({{"name", v.name}, {"value", v.value}});
  }
  return j.dump(2) + "\n";
}

void write_report(const Report& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << to_json_string(report);
}

Report read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  Report r;
  r.schema = j.at("schema").get<int>();
  r.toolkit_version = j.at("toolkit_version").get<std::string>();
  r.subcommand = j.at("subcommand").get<std::string>();
  r.config_hash = j.value("config_hash", "");
  if (j.contains("provenance"))
    r.seed = j["provenance"].value("seed", std::uint64_t{0});
  if (j.contains("request")) r.request_echo = j["request"].dump();
  for (const auto& e : j.value("results", nlohmann::json::array())) {
    ResultEntry entry;
    entry.name = e.at("name").get<std::string>();
    entry.re = e.at("value").get<double>();
    entry.im = e.value("value_im", 0.0);
    entry.complex_valued = e.contains("value_im");
    entry.error = e.value("error", 0.0);
    entry.converged = e.value("converged", true);
    entry.evaluations = e.value("evaluations", 0L);
    r.results.push_back(entry);
  }
  for (const auto& e : j.value("scans", nlohmann::json::array())) {
    ScanEntry s;
    s.name = e.at("name").get<std::string>();
    s.verdict = e.at("verdict").get<std::string>();
    for (const auto& p : e.value("points", nlohmann::json::array())) {
      s.points.push_back({p.at("cutoff").get<double>(),
                          p.at("value").get<double>(),
                          p.value("error", 0.0), p.value("converged", true)});
    }
    r.scans.push_back(s);
  }
  for (const auto& e : j.value("series", nlohmann::json::array())) {
    SeriesEntry s;
    s.name = e.at("name").get<std::string>();
    s.columns = e.at("columns").get<std::vector<std::string>>();
    s.rows = e.at("rows").get<std::vector<std::vector<double>>>();
    r.series.push_back(s);
  }
  for (const auto& e : j.value("verdicts", nlohmann::json::array())) {
    r.verdicts.push_back({e.at("name").get<std::string>(),
                          e.at("value").get<std::string>()});
  }
  return r;
}

std::vector<std::string> emit_plot_data(const std::string& report_path,
                                        const std::string& out_dir) {
  Report r = read_report(report_path);
  std::filesystem::path stem =
      std::filesystem::path(report_path).stem();
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;

  auto write_csv = [&](const std::string& series_name,
                       const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows) {
    const std::filesystem::path path =
        dir / (stem.string() + "." + series_name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ",";
      out << csv_quote(columns[c]);
    }
    out << "\r\n";
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ",";
        out << format_double(row[c]);
      }
      out << "\r\n";
    }
    written.push_back(path.string());
  };

  for (const auto& s : r.scans) {
    std::vector<std::vector<double>> rows;
    for (const auto& p : s.points)
      rows.push_back({p.cutoff, p.value, p.error});
    write_csv(s.name, {"cutoff", "value", "error"}, rows);
  }
  for (const auto& s : r.series) {
    write_csv(s.name, s.columns, s.rows);
  }
  return written;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace collapse
