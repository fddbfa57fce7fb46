#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specrob/filters.hpp"
#include "specrob/fourier_basis.hpp"
#include "specrob/model.hpp"

namespace specrob {

enum class HeatKind { error_rate, layer_delta };

// Grid in shifted coordinates. With a window W the grid is the W x W square
// centered on the zero frequency; otherwise it covers the full H x W.
struct HeatMap {
  HeatKind kind = HeatKind::error_rate;
  std::string layer;
  std::size_t height = 0;  // of the underlying image grid
  std::size_t width = 0;
  std::size_t window = 0;  // 0 = full grid
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> grid;
  double norm = 0.0;
  std::size_t samples = 0;
  std::string model_id;

  double at(std::size_t r, std::size_t c) const { return grid[r * cols + c]; }
  // Shifted-grid coordinates of cell (r, c).
  std::pair<std::size_t, std::size_t> shifted(std::size_t r, std::size_t c) const;
};

struct HeatMapOptions {
  PerturbationParams params;  // norm, sign policy, seed, clip
  std::size_t window = 0;
  // Evaluate one representative per conjugate pair and copy it to the
  // partner. Per-cell streams are keyed by the representative, so the full
  // evaluation gives identical grids.
  bool mirror = true;
  std::size_t repeats = 1;
  std::size_t batch = 100;
  std::string model_id;
};

HeatMap error_heatmap(const Model& model, std::span<const Image> images, std::span<const int> labels,
                      const HeatMapOptions& opt);

// Mean over images of || z_h(x) - z_h(x + r v U) ||_2 for one layer tap.
HeatMap layer_heatmap(const Model& model, std::span<const Image> images, const std::string& layer,
                      const HeatMapOptions& opt);

struct BandCurvePoint {
  FilterMode mode;
  std::size_t bandwidth;
  double norm;
  double error;
};

// Error under additive band-limited Gaussian noise for every (bandwidth, norm).
std::vector<BandCurvePoint> bandlimited_error_curve(const Model& model, std::span<const Image> images,
                                                    std::span<const int> labels, FilterMode mode,
                                                    const std::vector<double>& norms,
                                                    const std::vector<std::size_t>& bandwidths,
                                                    std::uint64_t seed, bool clip = false);

// Summary statistics used by the frequency-bias comparisons: mean over cells
// outside the centered k x k square, and over the centered k x k square.
double heatmap_mean_outside(const HeatMap& h, std::size_t k);
double heatmap_mean_inside(const HeatMap& h, std::size_t k);

}  // namespace specrob
