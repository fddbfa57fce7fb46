#include "specrob/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "specrob/fft.hpp"
#include "specrob/rng.hpp"

namespace specrob {

namespace {

constexpr std::size_t kGroups = 5;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// White Gaussian field shaped by a radial spectral gain, scaled to unit
// standard deviation.
std::vector<double> shaped_field(std::size_t n, Rng& rng, const std::vector<double>& gain) {
  Image z(Shape{1, n, n});
  for (double& v : z.values()) v = rng.normal();
  Spectrum s = dft2(z);
  for (std::size_t k = 0; k < gain.size(); ++k) s.coeffs[k] *= gain[k];
  std::vector<double> out = idft2(s).data();
  double mean = 0.0, var = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  if (sd > 0.0)
    for (double& v : out) v /= sd;
  return out;
}

double radius(std::size_t i, std::size_t j, std::size_t n) {
  const double fi = static_cast<double>(std::min(i, n - i));
  const double fj = static_cast<double>(std::min(j, n - j));
  return std::hypot(fi, fj);
}

}  // namespace

Dataset make_synthetic(const SyntheticConfig& cfg) {
  const std::size_t n = cfg.size;
  if (n < 4) throw std::invalid_argument("synthetic images must be at least 4x4");
  const std::size_t plane = n * n;

  std::vector<double> clutter_gain(plane), texture_gain(plane);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double r = radius(i, j, n);
      clutter_gain[i * n + j] = (i == 0 && j == 0) ? 0.0 : 1.0 / std::pow(std::max(r, 1.0), 2.0);
      texture_gain[i * n + j] = r >= cfg.texture_min_radius ? 1.0 : 0.0;
    }

  Rng palette(cfg.palette_seed, "palette");
  std::array<std::array<double, 3>, kGroups> base{};
  for (auto& g : base)
    for (auto& c : g) c = 0.5 + cfg.color_separation * palette.normal();

  const double dn = static_cast<double>(n);
  std::array<std::vector<double>, kGroups> layouts;
  std::vector<double> pair_pattern(plane);
  for (auto& l : layouts) l.resize(plane);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t q = 0; q < n; ++q) {
      const double y = static_cast<double>(m) / dn, x = static_cast<double>(q) / dn;
      const std::size_t k = m * n + q;
      layouts[0][k] = std::cos(kTwoPi * y);
      layouts[1][k] = std::sin(kTwoPi * y);
      layouts[2][k] = std::cos(kTwoPi * (x - 0.5 + 0.5 / dn));
      layouts[3][k] = std::cos(2.0 * kTwoPi * y);
      layouts[4][k] = -std::cos(kTwoPi * y) * std::cos(kTwoPi * (x + 0.5 / dn));
      pair_pattern[k] = std::cos(kTwoPi * (x - (dn / 2.0 - 0.5) / dn));
    }

  Dataset d;
  d.classes = 2 * kGroups;
  d.source = "synthetic";
  Rng labels(cfg.seed, "synthetic-labels");
  for (std::size_t i = 0; i < cfg.count; ++i) {
    const int y = static_cast<int>(labels.below(d.classes));
    const std::size_t g = static_cast<std::size_t>(y) / 2;
    const double t = (y % 2 == 1) ? 1.0 : -1.0;
    Rng rng(cfg.seed, "synthetic-image", {i});
    const double cue = cfg.pair_cue * t + cfg.pair_cue_jitter * rng.normal();
    Image im(Shape{3, n, n});
    for (std::size_t c = 0; c < 3; ++c) {
      const double level = base[g][c] + cfg.color_jitter * rng.normal();
      const std::vector<double> clutter = shaped_field(n, rng, clutter_gain);
      const double sign = c == 1 ? -1.0 : 1.0;
      auto ch = im.channel(c);
      for (std::size_t k = 0; k < plane; ++k)
        ch[k] = level + cfg.clutter * clutter[k] + sign * cfg.layout_amplitude * layouts[g][k] +
                cue * pair_pattern[k];
    }
    if (t > 0.0) {
      const std::vector<double> texture = shaped_field(n, rng, texture_gain);
      for (std::size_t c = 0; c < 3; ++c) {
        auto ch = im.channel(c);
        for (std::size_t k = 0; k < plane; ++k) ch[k] += cfg.texture_amplitude * texture[k];
      }
    }
    clip01_inplace(im.values());
    d.images.push_back(std::move(im));
    d.labels.push_back(y);
  }
  return d;
}

}  // namespace specrob
