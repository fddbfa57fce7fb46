#include "specrob/augment.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "specrob/fft.hpp"
#include "specrob/fourier_basis.hpp"
#include "specrob/rng.hpp"
#include "specrob/simd.hpp"

namespace specrob {

void gaussian_augment(std::span<Image> batch, const GaussianAugConfig& cfg) {
  if (cfg.sigma < 0.0) throw std::invalid_argument("gaussian_augment: sigma must be nonnegative");
  Rng rng(cfg.seed, "gaussian-aug");
  const double batch_sigma = rng.uniform(0.0, 1.0) * cfg.sigma;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    Rng pixel_rng(cfg.seed, "gaussian-aug-pixels", {n});
    const double s = cfg.per_image_sigma ? pixel_rng.uniform(0.0, 1.0) * cfg.sigma : batch_sigma;
    for (double& v : batch[n].values()) v += s * pixel_rng.normal();
    if (cfg.clip) clip01_inplace(batch[n].values());
  }
}

Image band_limited_noise(const Shape& shape, const BandNoiseConfig& cfg) {
  if (!(cfg.target_norm > 0.0)) throw std::invalid_argument("band_limited_noise: target_norm must be positive");
  Image out(shape);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    bool done = false;
    for (std::uint64_t attempt = 0; attempt < 8 && !done; ++attempt) {
      Rng rng(cfg.seed, "band-noise", {c, attempt});
      Image field(Shape{1, shape.height, shape.width});
      for (double& v : field.values()) v = rng.normal();
      Image filtered = apply_filter(field, cfg.filter);
      const double norm = l2_norm(filtered);
      if (!(norm > 1e-12)) continue;
      const double scale = cfg.target_norm / norm;
      auto dst = out.channel(c);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = filtered.data()[k] * scale;
      done = true;
    }
    if (!done) throw std::runtime_error("band_limited_noise: filtered field vanished after 8 draws");
  }
  return out;
}

double SpectralTemplate::at(std::size_t i, std::size_t j) const {
  return values[shift_index(i, height) * width + shift_index(j, width)];
}

double SigmaGrid::at(std::size_t i, std::size_t j) const {
  return values[shift_index(i, height) * width + shift_index(j, width)];
}

SigmaGrid calibrate_template(const SpectralTemplate& t, std::size_t h, std::size_t w) {
  if (t.height != h || t.width != w || t.values.size() != h * w)
    throw std::invalid_argument("calibrate_template: template dimensions do not match");
  SigmaGrid g{h, w, std::vector<double>(h * w, 0.0)};
  const double hw = static_cast<double>(h * w);
  const double mean_abs_to_sigma = std::sqrt(std::numbers::pi / 2.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const FrequencyIndex idx{i, j};
      const FrequencyIndex p = idx.partner(h, w);
      const double target = 0.5 * (t.at(i, j) + t.at(p.i, p.j));
      // |F(a U)| at the bin is |a| sqrt(HW/2) for a pair, |a| sqrt(HW) alone.
      const double gain = idx.self_conjugate(h, w) ? std::sqrt(hw) : std::sqrt(hw / 2.0);
      g.values[shift_index(i, h) * w + shift_index(j, w)] = target * mean_abs_to_sigma / gain;
    }
  }
  return g;
}

std::vector<double> sample_matched_noise(const SigmaGrid& sigma, std::uint64_t seed) {
  const std::size_t h = sigma.height, w = sigma.width;
  std::vector<double> noise(h * w, 0.0);
  Rng rng(seed, "matched-noise");
  const auto basis = shared_basis_table(h, w);
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const FrequencyIndex idx{i, j};
      if (idx.canonical(h, w) != idx) continue;
      const double s = sigma.at(i, j);
      const double a = s * rng.normal();
      if (s == 0.0) continue;
      k.axpy(a, (*basis)(idx).data(), noise.data(), noise.size());
    }
  }
  return noise;
}

void matched_noise_augment(std::span<Image> batch, const SpectralTemplate& t, std::uint64_t seed) {
  if (batch.empty()) return;
  const std::size_t h = batch[0].height(), w = batch[0].width();
  const SigmaGrid sigma = calibrate_template(t, h, w);
  const auto table = shared_basis_table(h, w);
  const BasisTable& basis = *table;
  std::vector<std::pair<FrequencyIndex, double>> active;
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const FrequencyIndex idx{i, j};
      if (idx.canonical(h, w) == idx) active.emplace_back(idx, sigma.at(i, j));
    }
  const auto& k = simd::kernels();
  for (std::size_t n = 0; n < batch.size(); ++n) {
    for (std::size_t c = 0; c < batch[n].channels(); ++c) {
      Rng rng(seed, "matched-noise-aug", {n, c});
      auto dst = batch[n].channel(c);
      for (const auto& [idx, s] : active) {
        const double a = s * rng.normal();
        if (s != 0.0) k.axpy(a, basis(idx).data(), dst.data(), dst.size());
      }
    }
    clip01_inplace(batch[n].values());
  }
}

}  // namespace specrob
