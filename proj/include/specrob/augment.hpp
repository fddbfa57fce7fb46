#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specrob/filters.hpp"
#include "specrob/tensor.hpp"

namespace specrob {

struct GaussianAugConfig {
  double sigma = 0.1;
  std::uint64_t seed = 0;
  bool per_image_sigma = false;  // ablation: draw sigma~ per image instead of per batch
  bool clip = true;
};

// Adds N(0, s^2) to every pixel, s ~ U[0, sigma] drawn once per call.
void gaussian_augment(std::span<Image> batch, const GaussianAugConfig& cfg);

struct BandNoiseConfig {
  FilterSpec filter;
  double target_norm = 8.0;
  std::uint64_t seed = 0;
};

// Gaussian field per channel, filtered, rescaled to exactly target_norm.
Image band_limited_noise(const Shape& shape, const BandNoiseConfig& cfg);

// Mean Fourier magnitude per bin, stored in shifted coordinates.
struct SpectralTemplate {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
  std::string source;

  double at_shifted(std::size_t r, std::size_t c) const { return values[r * width + c]; }
  // Value at an unshifted frequency index.
  double at(std::size_t i, std::size_t j) const;
};

// Per-bin standard deviations (shifted coordinates) of the zero-phase
// basis coefficients that reproduce the template's mean magnitudes.
struct SigmaGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
  double at(std::size_t i, std::size_t j) const;  // unshifted index
};

SigmaGrid calibrate_template(const SpectralTemplate& t, std::size_t h, std::size_t w);

// One channel of noise sum_pairs a_p U_p with a_p ~ N(0, sigma_p^2).
std::vector<double> sample_matched_noise(const SigmaGrid& sigma, std::uint64_t seed);

// Independent matched-noise sample per image and channel, then clip.
void matched_noise_augment(std::span<Image> batch, const SpectralTemplate& t, std::uint64_t seed);

}  // namespace specrob
