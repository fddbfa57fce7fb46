#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "specrob/dataset.hpp"
#include "specrob/model.hpp"

namespace specrob {

// K x S grid of error rates, one row per corruption.
using ErrorGrid = std::vector<std::vector<double>>;

// Mean over corruptions of sum_s E(f) / sum_s E(f0). Throws
// std::domain_error("undefined ratio") when a baseline row sums to zero.
double mce(const ErrorGrid& f, const ErrorGrid& f0);

struct MetricsRow {
  std::string corruption;
  int severity;
  double error;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::map<std::string, double> severity_averaged_accuracy;
  double average_accuracy = 0.0;  // over corruptions
  double clean_accuracy = 0.0;

  ErrorGrid error_grid(const std::vector<std::string>& order) const;
};

// Error per (corruption, severity). Image k under (c, s) uses seed
// derive_seed(seed, "eval", {corruption index, s, k}).
MetricsReport accuracy_table(const Model& model, const Dataset& data, const std::vector<std::string>& corruptions,
                             const std::vector<int>& severities, std::uint64_t seed);

struct ScatterFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the least-squares residuals
};

// Ordinary least squares of y on x. Throws when fewer than two points or all
// x are equal.
ScatterFit scatter_fit(std::span<const double> x, std::span<const double> y);

}  // namespace specrob
