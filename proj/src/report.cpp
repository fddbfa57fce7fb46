#include "specrob/report.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace specrob {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    return f;
  };
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  header = split(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row '" + line + "'");
    rows.push_back(std::move(f));
  }
  return rows;
}

double parse_number(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error(path.string() + ": '" + s + "' is not a number");
  return v;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const std::filesystem::path& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::runtime_error(path.string() + " lacks column '" + name + "'");
}

long signed_offset(std::size_t shifted, std::size_t n) {
  return static_cast<long>(shifted) - static_cast<long>(n / 2);
}

}  // namespace

void write_heatmap_csv(const HeatMap& h, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "row,col,u,v,value\n";
  for (std::size_t r = 0; r < h.rows; ++r)
    for (std::size_t c = 0; c < h.cols; ++c) {
      const auto [sr, sc] = h.shifted(r, c);
      out << fmt::format("{},{},{},{},{}\n", r, c, signed_offset(sr, h.height), signed_offset(sc, h.width),
                         format_number(h.at(r, c)));
    }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_template_csv(const SpectralTemplate& t, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "row,col,u,v,value\n";
  for (std::size_t r = 0; r < t.height; ++r)
    for (std::size_t c = 0; c < t.width; ++c)
      out << fmt::format("{},{},{},{},{}\n", r, c, signed_offset(r, t.height), signed_offset(c, t.width),
                         format_number(t.at_shifted(r, c)));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

SpectralTemplate read_template_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, header);
  const std::size_t cr = column(header, "row", path), cc = column(header, "col", path), cv = column(header, "value", path);
  std::size_t h = 0, w = 0;
  for (const auto& f : rows) {
    h = std::max(h, static_cast<std::size_t>(parse_number(f[cr], path)) + 1);
    w = std::max(w, static_cast<std::size_t>(parse_number(f[cc], path)) + 1);
  }
  if (rows.size() != h * w || h == 0) throw std::runtime_error(path.string() + ": template grid is incomplete");
  SpectralTemplate t{h, w, std::vector<double>(h * w), path.string()};
  for (const auto& f : rows)
    t.values[static_cast<std::size_t>(parse_number(f[cr], path)) * w + static_cast<std::size_t>(parse_number(f[cc], path))] =
        parse_number(f[cv], path);
  return t;
}

void write_metrics_csv(const MetricsReport& r, const MetricsReport* baseline, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << (baseline ? "corruption,severity,error,baseline_error\n" : "corruption,severity,error\n");
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    out << fmt::format("{},{},{}", row.corruption, row.severity, format_number(row.error));
    if (baseline) out << ',' << format_number(baseline->rows.at(i).error);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<ReportRow> read_metrics_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, header);
  const std::size_t cn = column(header, "corruption", path), cs = column(header, "severity", path),
                    ce = column(header, "error", path);
  std::optional<std::size_t> cb;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "baseline_error") cb = i;
  std::vector<ReportRow> out;
  for (const auto& f : rows) {
    ReportRow r{f[cn], static_cast<int>(parse_number(f[cs], path)), parse_number(f[ce], path), std::nullopt};
    if (cb) r.baseline_error = parse_number(f[*cb], path);
    out.push_back(std::move(r));
  }
  return out;
}

void write_energy_csv(const std::vector<std::pair<std::string, double>>& e, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "corruption,energy_fraction\n";
  for (const auto& [name, v] : e) out << name << ',' << format_number(v) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::map<std::string, double> read_energy_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, header);
  const std::size_t cn = column(header, "corruption", path), cv = column(header, "energy_fraction", path);
  std::map<std::string, double> out;
  for (const auto& f : rows) out[f[cn]] = parse_number(f[cv], path);
  return out;
}

std::map<std::string, double> accuracy_deltas(const std::vector<ReportRow>& rows) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& r : rows) {
    if (!r.baseline_error) throw std::invalid_argument("report has no baseline_error column; rerun evaluate with --baseline");
    auto& a = acc[r.corruption];
    a.first += (1.0 - r.error) - (1.0 - *r.baseline_error);
    a.second += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [name, a] : acc) out[name] = 100.0 * a.first / static_cast<double>(a.second);
  return out;
}

}  // namespace specrob
