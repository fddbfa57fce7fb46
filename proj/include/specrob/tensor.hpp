#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace specrob {

struct Shape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t plane() const { return height * width; }
  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

// C x H x W real tensor, channel-major then row-major. Pixel images live in
// [0, 1]; intermediate results (filter outputs, noise fields, deltas) reuse
// the same container without the range invariant.
class Image {
 public:
  Image() = default;
  explicit Image(Shape shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}
  Image(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }

  std::span<double> channel(std::size_t c) {
    return std::span<double>(data_).subspan(c * shape_.plane(), shape_.plane());
  }
  std::span<const double> channel(std::size_t c) const {
    return std::span<const double>(data_).subspan(c * shape_.plane(), shape_.plane());
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

using Complex = std::complex<double>;

// Per-channel complex H x W coefficients. `shifted` marks the
// low-frequency-at-center layout.
struct Spectrum {
  Shape shape{};
  std::vector<Complex> coeffs;
  bool shifted = false;

  Complex& at(std::size_t c, std::size_t i, std::size_t j) {
    return coeffs[(c * shape.height + i) * shape.width + j];
  }
  Complex at(std::size_t c, std::size_t i, std::size_t j) const {
    return coeffs[(c * shape.height + i) * shape.width + j];
  }
};

enum class NormalizeScope { whole_image, per_channel };

// (X - mean) / std with the statistics that produced it. One statistic for
// whole-image scope, one per channel otherwise.
struct NormalizedImage {
  Image image;
  std::vector<double> mean;
  std::vector<double> stddev;
};

double l2_norm(std::span<const double> x);
inline double l2_norm(const Image& x) { return l2_norm(x.values()); }

Image clip01(Image x);
void clip01_inplace(std::span<double> x);

// Throws std::domain_error("degenerate normalization") for zero variance.
NormalizedImage normalize_visual(const Image& x, NormalizeScope scope = NormalizeScope::whole_image);

Image operator-(const Image& a, const Image& b);
Image operator+(const Image& a, const Image& b);

void check_same_shape(const Image& a, const Image& b, const char* what);

}  // namespace specrob
