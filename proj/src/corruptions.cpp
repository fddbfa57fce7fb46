#include "specrob/corruptions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "specrob/fft.hpp"
#include "specrob/rng.hpp"

namespace specrob {

const char* to_string(CorruptionFamily f) {
  switch (f) {
    case CorruptionFamily::noise: return "noise";
    case CorruptionFamily::blur: return "blur";
    case CorruptionFamily::weather: return "weather";
    case CorruptionFamily::digital: return "digital";
  }
  return "?";
}

// Strength meaning per corruption:
//   gaussian_noise  additive N(0, s^2)
//   shot_noise      1 / photon count: x -> Poisson(x / s) * s
//   impulse_noise   salt-and-pepper fraction
//   speckle_noise   multiplicative N(0, s^2): x -> x + x n
//   gaussian_blur   kernel sigma in pixels
//   defocus_blur    disk radius in pixels
//   motion_blur     line length in pixels, angle drawn from the seed
//   contrast        factor c: x -> (x - mean_c) c + mean_c, per-channel mean
//   brightness      value shift in HSV space
//   fog             peak of a 1/f^2 random field blended in with max()
//   pixelate        resampling factor (output side = round(side * s))
//   jpeg_like       JPEG quality; 100 is neutral (no quantization)
const std::vector<CorruptionInfo>& corruption_suite() {
  static const std::vector<CorruptionInfo> suite{
      {"gaussian_noise", CorruptionFamily::noise, {0.04, 0.06, 0.08, 0.09, 0.10}, 0.0, true},
      {"shot_noise", CorruptionFamily::noise, {1.0 / 500, 1.0 / 250, 1.0 / 100, 1.0 / 75, 1.0 / 50}, 0.0, true},
      {"impulse_noise", CorruptionFamily::noise, {0.01, 0.02, 0.03, 0.05, 0.07}, 0.0, true},
      {"speckle_noise", CorruptionFamily::noise, {0.06, 0.10, 0.12, 0.16, 0.20}, 0.0, true},
      {"gaussian_blur", CorruptionFamily::blur, {0.4, 0.6, 0.7, 0.8, 1.0}, 0.0, false},
      {"defocus_blur", CorruptionFamily::blur, {0.75, 1.0, 1.25, 1.5, 2.0}, 0.0, false},
      {"motion_blur", CorruptionFamily::blur, {2.0, 3.0, 4.0, 5.0, 6.0}, 1.0, true},
      {"contrast", CorruptionFamily::weather, {0.75, 0.5, 0.4, 0.3, 0.15}, 1.0, false},
      {"brightness", CorruptionFamily::weather, {0.05, 0.10, 0.15, 0.20, 0.30}, 0.0, false},
      {"fog", CorruptionFamily::weather, {0.35, 0.5, 0.65, 0.8, 0.95}, 0.0, true},
      {"pixelate", CorruptionFamily::digital, {0.95, 0.9, 0.85, 0.75, 0.65}, 1.0, false},
      {"jpeg_like", CorruptionFamily::digital, {80, 65, 58, 50, 40}, 100.0, false},
  };
  return suite;
}

const CorruptionInfo& corruption_info(std::string_view name) {
  for (const auto& c : corruption_suite())
    if (c.name == name) return c;
  throw std::invalid_argument("unknown corruption '" + std::string(name) + "'");
}

namespace {

std::size_t reflect(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - i);
}

// 2D correlation with a (2r+1)x(2r+1) kernel and reflected borders.
Image convolve(const Image& x, const std::vector<double>& kernel, long r) {
  Image out(x.shape());
  const long h = static_cast<long>(x.height()), w = static_cast<long>(x.width());
  const long side = 2 * r + 1;
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (long y = 0; y < h; ++y)
      for (long xx = 0; xx < w; ++xx) {
        double acc = 0.0;
        for (long dy = -r; dy <= r; ++dy)
          for (long dx = -r; dx <= r; ++dx) {
            const double k = kernel[(dy + r) * side + (dx + r)];
            if (k != 0.0) acc += k * x.at(c, reflect(y + dy, h), reflect(xx + dx, w));
          }
        out.at(c, y, xx) = acc;
      }
  return out;
}

void normalize_kernel(std::vector<double>& k) {
  double s = 0.0;
  for (double v : k) s += v;
  for (double& v : k) v /= s;
}

std::vector<double> gaussian_kernel(double sigma, long r) {
  const long side = 2 * r + 1;
  std::vector<double> k(side * side);
  for (long dy = -r; dy <= r; ++dy)
    for (long dx = -r; dx <= r; ++dx)
      k[(dy + r) * side + dx + r] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  normalize_kernel(k);
  return k;
}

Image gaussian_blur(const Image& x, double sigma) {
  if (sigma <= 0.0) return x;
  const long r = static_cast<long>(std::ceil(3.0 * sigma));
  return clip01(convolve(x, gaussian_kernel(sigma, r), r));
}

// Disk of the given radius, with edge pixels weighted by 4x4 supersampled
// coverage.
Image defocus_blur(const Image& x, double radius) {
  if (radius <= 0.0) return x;
  const long r = static_cast<long>(std::ceil(radius));
  const long side = 2 * r + 1;
  std::vector<double> k(side * side, 0.0);
  for (long dy = -r; dy <= r; ++dy)
    for (long dx = -r; dx <= r; ++dx) {
      int inside = 0;
      for (int sy = 0; sy < 4; ++sy)
        for (int sx = 0; sx < 4; ++sx) {
          const double py = dy - 0.375 + 0.25 * sy, px = dx - 0.375 + 0.25 * sx;
          inside += px * px + py * py <= radius * radius;
        }
      k[(dy + r) * side + dx + r] = inside / 16.0;
    }
  normalize_kernel(k);
  return clip01(convolve(x, k, r));
}

Image motion_blur(const Image& x, double length, std::uint64_t seed) {
  if (length <= 1.0) return x;
  Rng rng(seed, "motion-angle");
  const double angle = rng.uniform(-std::numbers::pi / 4, std::numbers::pi / 4);
  const long r = static_cast<long>(std::ceil(length / 2.0));
  const long side = 2 * r + 1;
  std::vector<double> k(side * side, 0.0);
  const int samples = 64;
  for (int s = 0; s < samples; ++s) {
    const double t = (s + 0.5) / samples - 0.5;  // centered segment
    const double px = t * length * std::cos(angle);
    const double py = t * length * std::sin(angle);
    const long ix = std::lround(px), iy = std::lround(py);
    k[(iy + r) * side + ix + r] += 1.0;
  }
  normalize_kernel(k);
  return clip01(convolve(x, k, r));
}

Image gaussian_noise(const Image& x, double s, std::uint64_t seed) {
  Image out = x;
  if (s == 0.0) return out;
  Rng rng(seed, "gaussian-noise");
  for (double& v : out.values()) v += s * rng.normal();
  return clip01(std::move(out));
}

Image shot_noise(const Image& x, double s, std::uint64_t seed) {
  Image out = x;
  if (s == 0.0) return out;
  Rng rng(seed, "shot-noise");
  for (double& v : out.values()) v = static_cast<double>(rng.poisson(v / s)) * s;
  return clip01(std::move(out));
}

Image impulse_noise(const Image& x, double amount, std::uint64_t seed) {
  Image out = x;
  if (amount == 0.0) return out;
  Rng rng(seed, "impulse-noise");
  for (double& v : out.values()) {
    const double u = rng.uniform();
    if (u < amount / 2) v = 0.0;
    else if (u < amount) v = 1.0;
  }
  return out;
}

Image speckle_noise(const Image& x, double s, std::uint64_t seed) {
  Image out = x;
  if (s == 0.0) return out;
  Rng rng(seed, "speckle-noise");
  for (double& v : out.values()) v += v * s * rng.normal();
  return clip01(std::move(out));
}

Image contrast(const Image& x, double c) {
  Image out = x;
  for (std::size_t ch = 0; ch < x.channels(); ++ch) {
    auto v = out.channel(ch);
    double mean = 0.0;
    for (double p : v) mean += p;
    mean /= static_cast<double>(v.size());
    for (double& p : v) p = (p - mean) * c + mean;
  }
  return clip01(std::move(out));
}

// HSV value shift: hue and saturation are kept, so RGB scales by V'/V.
Image brightness(const Image& x, double shift) {
  Image out = x;
  if (shift == 0.0) return out;
  const std::size_t plane = x.shape().plane();
  for (std::size_t k = 0; k < plane; ++k) {
    double v = 0.0;
    for (std::size_t c = 0; c < x.channels(); ++c) v = std::max(v, x.data()[c * plane + k]);
    const double nv = std::min(v + shift, 1.0);
    for (std::size_t c = 0; c < x.channels(); ++c) {
      double& p = out.data()[c * plane + k];
      p = v > 0.0 ? p * (nv / v) : nv;
    }
  }
  return clip01(std::move(out));
}

// Random field with amplitude spectrum 1/f^2, min-max scaled to [0, 1].
std::vector<double> fog_field(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed, "fog-field");
  Image noise(Shape{1, h, w});
  for (double& v : noise.values()) v = rng.normal();
  Spectrum s = dft2(noise);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const double fi = static_cast<double>(std::min(i, h - i)) / static_cast<double>(h);
      const double fj = static_cast<double>(std::min(j, w - j)) / static_cast<double>(w);
      const double f = std::sqrt(fi * fi + fj * fj);
      s.at(0, i, j) *= f > 0.0 ? 1.0 / (f * f) : 0.0;
    }
  Image field = idft2(s);
  auto [lo, hi] = std::minmax_element(field.data().begin(), field.data().end());
  const double low = *lo, span = *hi - *lo;
  std::vector<double> out(h * w, 0.0);
  if (span > 0.0)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (field.data()[k] - low) / span;
  return out;
}

Image fog(const Image& x, double strength, std::uint64_t seed) {
  Image out = x;
  if (strength == 0.0) return out;
  const auto field = fog_field(x.height(), x.width(), seed);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    auto v = out.channel(c);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::max(v[k], strength * field[k]);
  }
  return clip01(std::move(out));
}

// Box-average down to round(side * factor), nearest-neighbour back up.
Image pixelate(const Image& x, double factor) {
  const std::size_t h = x.height(), w = x.width();
  const std::size_t sh = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(h * factor)));
  const std::size_t sw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(w * factor)));
  if (sh == h && sw == w) return x;
  Image out(x.shape());
  std::vector<double> small(sh * sw);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t ty = 0; ty < sh; ++ty)
      for (std::size_t tx = 0; tx < sw; ++tx) {
        const std::size_t y0 = ty * h / sh, y1 = std::max(y0 + 1, (ty + 1) * h / sh);
        const std::size_t x0 = tx * w / sw, x1 = std::max(x0 + 1, (tx + 1) * w / sw);
        double acc = 0.0;
        for (std::size_t y = y0; y < y1; ++y)
          for (std::size_t xx = x0; xx < x1; ++xx) acc += x.at(c, y, xx);
        small[ty * sw + tx] = acc / static_cast<double>((y1 - y0) * (x1 - x0));
      }
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) out.at(c, y, xx) = small[(y * sh / h) * sw + xx * sw / w];
  }
  return out;
}

constexpr std::array<int, 64> kJpegLuma = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

// Per-channel 8x8 block DCT with the IJG-scaled luminance table; quality 100
// skips quantization. Edge blocks replicate the last row/column.
Image jpeg_like(const Image& x, double quality) {
  if (quality >= 100.0) return x;
  const double q = std::clamp(quality, 1.0, 99.0);
  const double scale = q < 50 ? 5000.0 / q : 200.0 - 2.0 * q;
  std::array<double, 64> table{};
  for (int k = 0; k < 64; ++k)
    table[k] = std::clamp(std::floor((kJpegLuma[k] * scale + 50.0) / 100.0), 1.0, 255.0);
  std::array<double, 64> basis{};  // basis[u*8+m] = alpha(u) cos((2m+1) u pi / 16)
  for (int u = 0; u < 8; ++u)
    for (int m = 0; m < 8; ++m)
      basis[u * 8 + m] = (u == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8)) *
                         std::cos((2 * m + 1) * u * std::numbers::pi / 16.0);
  Image out(x.shape());
  const std::size_t h = x.height(), w = x.width();
  std::array<double, 64> block{}, tmp{}, coef{};
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t by = 0; by < h; by += 8)
      for (std::size_t bx = 0; bx < w; bx += 8) {
        for (int m = 0; m < 8; ++m)
          for (int n = 0; n < 8; ++n)
            block[m * 8 + n] = 255.0 * x.at(c, std::min(by + m, h - 1), std::min(bx + n, w - 1)) - 128.0;
        for (int u = 0; u < 8; ++u)
          for (int n = 0; n < 8; ++n) {
            double s = 0.0;
            for (int m = 0; m < 8; ++m) s += basis[u * 8 + m] * block[m * 8 + n];
            tmp[u * 8 + n] = s;
          }
        for (int u = 0; u < 8; ++u)
          for (int v = 0; v < 8; ++v) {
            double s = 0.0;
            for (int n = 0; n < 8; ++n) s += basis[v * 8 + n] * tmp[u * 8 + n];
            coef[u * 8 + v] = std::round(s / table[u * 8 + v]) * table[u * 8 + v];
          }
        for (int m = 0; m < 8; ++m)
          for (int v = 0; v < 8; ++v) {
            double s = 0.0;
            for (int u = 0; u < 8; ++u) s += basis[u * 8 + m] * coef[u * 8 + v];
            tmp[m * 8 + v] = s;
          }
        for (int m = 0; m < 8; ++m)
          for (int n = 0; n < 8; ++n) {
            if (by + m >= h || bx + n >= w) continue;
            double s = 0.0;
            for (int v = 0; v < 8; ++v) s += basis[v * 8 + n] * tmp[m * 8 + v];
            out.at(c, by + m, bx + n) = (s + 128.0) / 255.0;
          }
      }
  return clip01(std::move(out));
}

}  // namespace

Image apply_corruption_strength(const Image& x, std::string_view name, double s, std::uint64_t seed) {
  if (name == "gaussian_noise") return gaussian_noise(x, s, seed);
  if (name == "shot_noise") return shot_noise(x, s, seed);
  if (name == "impulse_noise") return impulse_noise(x, s, seed);
  if (name == "speckle_noise") return speckle_noise(x, s, seed);
  if (name == "gaussian_blur") return gaussian_blur(x, s);
  if (name == "defocus_blur") return defocus_blur(x, s);
  if (name == "motion_blur") return motion_blur(x, s, seed);
  if (name == "contrast") return contrast(x, s);
  if (name == "brightness") return brightness(x, s);
  if (name == "fog") return fog(x, s, seed);
  if (name == "pixelate") return pixelate(x, s);
  if (name == "jpeg_like") return jpeg_like(x, s);
  throw std::invalid_argument("unknown corruption '" + std::string(name) + "'");
}

Image apply_corruption(const Image& x, const CorruptionSpec& spec) {
  const auto& info = corruption_info(spec.name);
  if (spec.severity < 1 || spec.severity > 5)
    throw std::invalid_argument("corruption severity must be in 1..5");
  return apply_corruption_strength(x, spec.name, info.strength[spec.severity - 1], spec.seed);
}

}  // namespace specrob
