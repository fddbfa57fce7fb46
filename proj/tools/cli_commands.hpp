#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace specrob::cli {

// Arguments and outputs shared by every subcommand.
struct RunContext {
  std::string command;
  std::vector<std::string> argv;
  std::filesystem::path out;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  std::size_t count = 10000;
  std::string format = "npy";
  double texture_amplitude = -1.0;  // < 0 keeps the generator default
};

struct SpectrumArgs {
  std::string dataset;
  std::optional<std::string> corruption;
  int severity = 3;
  std::size_t limit = 0;
};

struct HeatmapArgs {
  std::string model;
  std::string dataset;
  double norm = 4.0;
  std::optional<std::string> layer;
  std::size_t window = 0;
  bool clip = false;
  bool full_grid = false;
  std::size_t repeats = 1;
  std::size_t limit = 1000;
  std::string sign = "random";
};

struct BandcurveArgs {
  std::string model;
  std::string dataset;
  std::string mode = "low";
  std::vector<double> norms{8.0};
  std::vector<std::size_t> bandwidths;
  std::size_t limit = 1000;
  bool clip = false;
};

struct EvaluateArgs {
  std::string model;
  std::string dataset;
  std::string suite = "default";
  std::optional<std::string> baseline;
  std::vector<int> severities{1, 2, 3, 4, 5};
  std::size_t limit = 0;
  std::size_t energy_limit = 256;
};

struct ScatterArgs {
  std::string report;
  std::string energy;
};

struct FourierAttackArgs {
  std::string model;
  std::string image;
  std::string index;
  double norm = 24.0;
  std::optional<int> label;
  std::string sign = "positive";
  bool clip = true;
};

struct PgdAttackArgs {
  std::string model;
  std::string dataset;
  double epsilon = 8.0 / 255.0;
  double step_size = 2.0 / 255.0;
  std::size_t steps = 20;
  bool no_random_init = false;
  bool include_misclassified = false;
  std::size_t limit = 1000;
};

int run_synth(const RunContext& ctx, const SynthArgs& a);
int run_spectrum(const RunContext& ctx, const SpectrumArgs& a);
int run_train(RunContext ctx, const std::string& config_path, const std::optional<std::string>& out_override);
int run_heatmap(const RunContext& ctx, const HeatmapArgs& a);
int run_bandcurve(const RunContext& ctx, const BandcurveArgs& a);
int run_evaluate(const RunContext& ctx, const EvaluateArgs& a);
int run_scatter(const RunContext& ctx, const ScatterArgs& a);
int run_attack_fourier(const RunContext& ctx, const FourierAttackArgs& a);
int run_attack_pgd(const RunContext& ctx, const PgdAttackArgs& a);

}  // namespace specrob::cli
