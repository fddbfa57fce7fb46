#include "specrob/filters.hpp"

#include <stdexcept>

#include "specrob/fft.hpp"

namespace specrob {

FilterMode parse_filter_mode(const std::string& s) {
  if (s == "low") return FilterMode::low;
  if (s == "high") return FilterMode::high;
  throw std::invalid_argument("unknown filter mode '" + s + "' (expected low|high)");
}

const char* to_string(FilterMode m) { return m == FilterMode::low ? "low" : "high"; }

std::size_t FilterMask::count() const {
  std::size_t n = 0;
  for (auto k : keep) n += k;
  return n;
}

bool FilterMask::conjugate_symmetric() const {
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j)
      if ((*this)(i, j) != (*this)((height - i) % height, (width - j) % width)) return false;
  return true;
}

namespace {

// Axis membership: position of frequency k after centering, tested against
// [c - B/2, c - B/2 + B - 1] with c = floor(d/2).
std::vector<std::uint8_t> axis_keep(std::size_t d, std::size_t b, FilterMode mode) {
  std::vector<std::uint8_t> keep(d, 0);
  const std::size_t c = d / 2;
  const std::size_t lo = c - b / 2;
  const std::size_t roll = mode == FilterMode::low ? c : (d + c - (d + 1) / 2) % d;
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t pos = (k + roll) % d;
    keep[k] = pos >= lo && pos < lo + b;
  }
  return keep;
}

void check_range(const FilterSpec& f, std::size_t h, std::size_t w) {
  if (f.bandwidth < 1 || f.bandwidth > std::min(h, w))
    throw std::invalid_argument("filter bandwidth " + std::to_string(f.bandwidth) +
                                " outside [1, min(H, W)] for " + std::to_string(h) + "x" +
                                std::to_string(w));
}

}  // namespace

void check_filter(const FilterSpec& f, std::size_t h, std::size_t w) {
  if (!filter_mask(h, w, f).conjugate_symmetric())
    throw std::invalid_argument("filter bandwidth " + std::to_string(f.bandwidth) + " (" +
                                to_string(f.mode) +
                                " pass) gives an off-center square whose output is not real");
}

FilterMask filter_mask(std::size_t h, std::size_t w, const FilterSpec& f) {
  check_range(f, h, w);
  const auto rows = axis_keep(h, f.bandwidth, f.mode);
  const auto cols = axis_keep(w, f.bandwidth, f.mode);
  FilterMask m{h, w, std::vector<std::uint8_t>(h * w)};
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) m.keep[i * w + j] = rows[i] && cols[j];
  return m;
}

Image apply_filter(const Image& x, const FilterSpec& f) {
  check_filter(f, x.height(), x.width());
  const FilterMask mask = filter_mask(x.height(), x.width(), f);
  Spectrum s = dft2(x);
  const std::size_t plane = x.shape().plane();
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t k = 0; k < plane; ++k)
      if (!mask.keep[k]) s.coeffs[c * plane + k] = 0.0;
  return idft2(s);
}

}  // namespace specrob
