#include "specrob/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "specrob/corruptions.hpp"
#include "specrob/parallel.hpp"
#include "specrob/rng.hpp"

namespace specrob {

double mce(const ErrorGrid& f, const ErrorGrid& f0) {
  if (f.size() != f0.size() || f.empty()) throw std::invalid_argument("mce: grids differ in shape or are empty");
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k].size() != f0[k].size()) throw std::invalid_argument("mce: grids differ in shape");
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < f[k].size(); ++s) {
      num += f[k][s];
      den += f0[k][s];
    }
    if (!(den > 0.0)) throw std::domain_error("undefined ratio: baseline has zero error on row " + std::to_string(k));
    total += num / den;
  }
  return total / static_cast<double>(f.size());
}

ErrorGrid MetricsReport::error_grid(const std::vector<std::string>& order) const {
  ErrorGrid g;
  for (const auto& name : order) {
    std::vector<double> row;
    for (const auto& r : rows)
      if (r.corruption == name) row.push_back(r.error);
    if (row.empty()) throw std::invalid_argument("report has no rows for " + name);
    g.push_back(std::move(row));
  }
  return g;
}

MetricsReport accuracy_table(const Model& model, const Dataset& data, const std::vector<std::string>& corruptions,
                             const std::vector<int>& severities, std::uint64_t seed) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("evaluation set is empty");
  if (corruptions.empty() || severities.empty()) throw std::invalid_argument("no corruptions or severities given");
  for (const auto& c : corruptions) corruption_info(c);

  constexpr std::size_t kBatch = 100;
  struct Task {
    std::size_t corruption;  // corruptions.size() marks the clean pass
    std::size_t level;  // index into severities
    std::size_t begin, end;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c <= corruptions.size(); ++c)
    for (std::size_t si = 0; si < (c == corruptions.size() ? 1 : severities.size()); ++si)
      for (std::size_t b = 0; b < data.size(); b += kBatch)
        tasks.push_back({c, si, b, std::min(data.size(), b + kBatch)});
  std::vector<std::size_t> wrong(tasks.size(), 0);
  parallel_for(tasks.size(), [&](std::size_t t) {
    const Task& task = tasks[t];
    std::vector<Image> batch;
    for (std::size_t k = task.begin; k < task.end; ++k) {
      if (task.corruption == corruptions.size()) {
        batch.push_back(data.images[k]);
      } else {
        const int sev = severities[task.level];
        const CorruptionSpec spec{corruptions[task.corruption], sev,
                                  derive_seed(seed, "eval", {task.corruption, static_cast<std::uint64_t>(sev), k})};
        batch.push_back(apply_corruption(data.images[k], spec));
      }
    }
    const Logits l = model.forward(batch);
    check_finite(l);
    for (std::size_t k = task.begin; k < task.end; ++k) wrong[t] += l.argmax(k - task.begin) != data.labels[k];
  });

  std::vector<std::vector<std::size_t>> counts(corruptions.size() + 1, std::vector<std::size_t>(severities.size(), 0));
  for (std::size_t t = 0; t < tasks.size(); ++t) counts[tasks[t].corruption][tasks[t].level] += wrong[t];

  MetricsReport rep;
  const double n = static_cast<double>(data.size());
  rep.clean_accuracy = 1.0 - static_cast<double>(counts.back()[0]) / n;
  for (std::size_t c = 0; c < corruptions.size(); ++c) {
    double acc_sum = 0.0;
    for (std::size_t si = 0; si < severities.size(); ++si) {
      const double err = static_cast<double>(counts[c][si]) / n;
      rep.rows.push_back({corruptions[c], severities[si], err});
      acc_sum += 1.0 - err;
    }
    const double avg = acc_sum / static_cast<double>(severities.size());
    rep.severity_averaged_accuracy[corruptions[c]] = avg;
    rep.average_accuracy += avg;
  }
  rep.average_accuracy /= static_cast<double>(corruptions.size());
  return rep;
}

ScatterFit scatter_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("scatter_fit: x and y differ in length");
  if (x.size() < 2) throw std::invalid_argument("scatter_fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("scatter_fit: all x values are equal");
  ScatterFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

}  // namespace specrob
