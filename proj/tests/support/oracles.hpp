#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's transform or filter code.

#include <cmath>
#include <algorithm>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "specrob/tensor.hpp"

namespace oracle {

using C = std::complex<double>;

// O((HW)^2) direct transform of one real plane.
inline std::vector<C> naive_dft2(const std::vector<double>& x, std::size_t h, std::size_t w) {
  std::vector<C> out(h * w);
  for (std::size_t u = 0; u < h; ++u)
    for (std::size_t v = 0; v < w; ++v) {
      C acc = 0.0;
      for (std::size_t m = 0; m < h; ++m)
        for (std::size_t n = 0; n < w; ++n) {
          const double ang = -2.0 * std::numbers::pi *
                             (static_cast<double>(u * m) / static_cast<double>(h) +
                              static_cast<double>(v * n) / static_cast<double>(w));
          acc += x[m * w + n] * C(std::cos(ang), std::sin(ang));
        }
      out[u * w + v] = acc;
    }
  return out;
}

// Signed frequency of unshifted index k on an axis of length n.
inline long signed_freq(std::size_t k, std::size_t n) {
  const long kk = static_cast<long>(k), nn = static_cast<long>(n);
  return kk <= nn / 2 ? kk : kk - nn;
}

// Kept bins along one axis: the B frequencies with the smallest |f| (low
// pass) or the largest |f| (high pass). Empty when the B-th and (B+1)-th
// candidates tie, i.e. no symmetric choice exists.
inline std::vector<bool> axis_keep(std::size_t n, std::size_t b, bool high) {
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  auto mag = [&](std::size_t k) { return std::labs(signed_freq(k, n)); };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t c) { return high ? mag(a) > mag(c) : mag(a) < mag(c); });
  if (b < n && mag(order[b - 1]) == mag(order[b])) return {};
  std::vector<bool> keep(n, false);
  for (std::size_t k = 0; k < b; ++k) keep[order[k]] = true;
  return keep;
}

inline specrob::Image random_image(specrob::Shape s, std::mt19937_64& g, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  specrob::Image x(s);
  for (double& v : x.values()) v = d(g);
  return x;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Published severity-averaged accuracies (fractions) per corruption for the
// natural, Gaussian, adversarial, low-pass, high-pass and AutoAugment models.
struct TableRow {
  const char* corruption;
  double natural, gauss, adversarial, low_pass, high_pass, autoaugment;
};

inline const std::vector<TableRow>& published_accuracy() {
  static const std::vector<TableRow> rows = {
      {"brightness", 0.9493, 0.9244, 0.8705, 0.8996, 0.9275, 0.9635},
      {"contrast", 0.8225, 0.5703, 0.77, 0.6917, 0.7806, 0.9526},
      {"defocus_blur", 0.8456, 0.8371, 0.8355, 0.9063, 0.7489, 0.9229},
      {"elastic_transform", 0.86, 0.8429, 0.8175, 0.8838, 0.787, 0.8726},
      {"fog", 0.8997, 0.7194, 0.7263, 0.8191, 0.8811, 0.9463},
      {"gaussian_blur", 0.7273, 0.7907, 0.8213, 0.8929, 0.6453, 0.884},
      {"glass_blur", 0.5677, 0.8046, 0.8017, 0.877, 0.4735, 0.7621},
      {"impulse_noise", 0.5428, 0.8308, 0.6881, 0.5999, 0.3619, 0.856},
      {"jpeg_compression", 0.8009, 0.9078, 0.8541, 0.8405, 0.6395, 0.8142},
      {"motion_blur", 0.8079, 0.7715, 0.8045, 0.8605, 0.7206, 0.8491},
      {"pixelate", 0.7317, 0.8983, 0.8531, 0.9156, 0.6234, 0.7066},
      {"shot_noise", 0.6773, 0.9233, 0.8275, 0.7447, 0.5374, 0.7834},
      {"snow", 0.8505, 0.8835, 0.8258, 0.8688, 0.7929, 0.8939},
      {"speckle_noise", 0.7041, 0.9171, 0.8183, 0.7502, 0.5603, 0.8125},
      {"zoom_blur", 0.8046, 0.8163, 0.8279, 0.8987, 0.6514, 0.8994},
  };
  return rows;
}

}  // namespace oracle
