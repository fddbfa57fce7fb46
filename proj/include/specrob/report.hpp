#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specrob/augment.hpp"
#include "specrob/heatmap.hpp"
#include "specrob/metrics.hpp"

namespace specrob {

// Shortest text that reads back to the same double.
std::string format_number(double v);

// Columns: row,col,u,v,value with (u, v) the signed frequency of the cell.
void write_heatmap_csv(const HeatMap& h, const std::filesystem::path& path);
void write_template_csv(const SpectralTemplate& t, const std::filesystem::path& path);
SpectralTemplate read_template_csv(const std::filesystem::path& path);

// Columns: corruption,severity,error[,baseline_error]
void write_metrics_csv(const MetricsReport& r, const MetricsReport* baseline, const std::filesystem::path& path);

struct ReportRow {
  std::string corruption;
  int severity;
  double error;
  std::optional<double> baseline_error;
};
std::vector<ReportRow> read_metrics_csv(const std::filesystem::path& path);

// Columns: corruption,energy_fraction
void write_energy_csv(const std::vector<std::pair<std::string, double>>& e, const std::filesystem::path& path);
std::map<std::string, double> read_energy_csv(const std::filesystem::path& path);

// Severity-averaged accuracy change in percentage points per corruption.
std::map<std::string, double> accuracy_deltas(const std::vector<ReportRow>& rows);

}  // namespace specrob
