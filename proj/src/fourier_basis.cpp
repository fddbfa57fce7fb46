#include "specrob/fourier_basis.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "specrob/fft.hpp"
#include "specrob/rng.hpp"
#include "specrob/simd.hpp"

namespace specrob {

FrequencyIndex FrequencyIndex::canonical(std::size_t h, std::size_t w) const {
  return std::min(*this, partner(h, w));
}

FrequencyIndex FrequencyIndex::from_shifted(std::size_t row, std::size_t col, std::size_t h,
                                            std::size_t w) {
  return {unshift_index(row, h), unshift_index(col, w)};
}

std::pair<std::size_t, std::size_t> FrequencyIndex::to_shifted(std::size_t h, std::size_t w) const {
  return {shift_index(i, h), shift_index(j, w)};
}

BasisMatrix basis_matrix(FrequencyIndex idx, std::size_t h, std::size_t w) {
  if (idx.i >= h || idx.j >= w) throw std::out_of_range("basis_matrix: frequency index out of range");
  BasisMatrix b{idx, h, w, std::vector<double>(h * w)};
  double sq = 0.0;
  for (std::size_t m = 0; m < h; ++m) {
    for (std::size_t n = 0; n < w; ++n) {
      // Reduce the phase numerator exactly before converting to radians.
      const std::size_t num = (idx.i * m % h) * w + (idx.j * n % w) * h;
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(num % (h * w)) /
                           static_cast<double>(h * w);
      const double v = std::cos(phase);
      b.data[m * w + n] = v;
      sq += v * v;
    }
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : b.data) v *= inv;
  return b;
}

BasisTable::BasisTable(std::size_t h, std::size_t w) : h_(h), w_(w), data_(h * w * h * w) {
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const auto b = basis_matrix({i, j}, h, w);
      std::copy(b.data.begin(), b.data.end(), data_.begin() + (i * w + j) * h * w);
    }
}

std::shared_ptr<const BasisTable> shared_basis_table(std::size_t h, std::size_t w) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const BasisTable>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{h, w}];
  if (!slot) slot = std::make_shared<const BasisTable>(h, w);
  return slot;
}

std::vector<double> perturbation_signs(std::size_t channels, SignPolicy policy, std::uint64_t seed) {
  std::vector<double> signs(channels, 1.0);
  switch (policy) {
    case SignPolicy::fixed_positive:
      break;
    case SignPolicy::fixed_negative:
      std::fill(signs.begin(), signs.end(), -1.0);
      break;
    case SignPolicy::random_per_channel: {
      Rng rng(seed, "basis-sign");
      for (double& s : signs) s = rng.sign();
      break;
    }
  }
  return signs;
}

void add_basis(Image& x, std::span<const double> basis, std::span<const double> coefficient) {
  if (basis.size() != x.shape().plane() || coefficient.size() != x.channels())
    throw std::invalid_argument("add_basis: dimension mismatch");
  const auto& k = simd::kernels();
  for (std::size_t c = 0; c < x.channels(); ++c) {
    if (coefficient[c] == 0.0) continue;
    k.axpy(coefficient[c], basis.data(), x.channel(c).data(), basis.size());
  }
}

Image basis_perturb(const Image& x, FrequencyIndex idx, const PerturbationParams& params) {
  if (params.norm < 0.0) throw std::invalid_argument("basis_perturb: norm must be nonnegative");
  if (idx.i >= x.height() || idx.j >= x.width())
    throw std::invalid_argument("basis_perturb: dimension mismatch between image and frequency index");
  const auto basis = basis_matrix(idx, x.height(), x.width());
  auto coeff = perturbation_signs(x.channels(), params.sign, params.seed);
  for (double& c : coeff) c *= params.norm;
  Image out = x;
  add_basis(out, basis.data, coeff);
  if (params.clip) clip01_inplace(out.values());
  return out;
}

}  // namespace specrob
