#include "specrob/tensor.hpp"

#include <cmath>
#include <string>

#include "specrob/simd.hpp"

namespace specrob {

Image::Image(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size())
    throw std::invalid_argument("image data length does not match its shape");
}

double l2_norm(std::span<const double> x) {
  return std::sqrt(simd::kernels().sum_squares(x.data(), x.size()));
}

void clip01_inplace(std::span<double> x) { simd::kernels().clamp(x.data(), 0.0, 1.0, x.size()); }

Image clip01(Image x) {
  clip01_inplace(x.values());
  return x;
}

namespace {

std::pair<double, double> moments(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

NormalizedImage normalize_visual(const Image& x, NormalizeScope scope) {
  NormalizedImage out{x, {}, {}};
  auto normalize = [&](std::span<const double> src, std::span<double> dst) {
    auto [mean, sd] = moments(src);
    if (!(sd > 0.0)) throw std::domain_error("degenerate normalization");
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - mean) / sd;
    out.mean.push_back(mean);
    out.stddev.push_back(sd);
  };
  if (scope == NormalizeScope::whole_image) {
    normalize(x.values(), out.image.values());
  } else {
    for (std::size_t c = 0; c < x.channels(); ++c) normalize(x.channel(c), out.image.channel(c));
  }
  return out;
}

void check_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.shape() != b.shape()) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

Image operator-(const Image& a, const Image& b) {
  check_same_shape(a, b, "subtract");
  Image out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Image operator+(const Image& a, const Image& b) {
  check_same_shape(a, b, "add");
  Image out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

}  // namespace specrob
