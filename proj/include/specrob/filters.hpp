#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specrob/tensor.hpp"

namespace specrob {

enum class FilterMode { low, high };

struct FilterSpec {
  FilterMode mode = FilterMode::low;
  std::size_t bandwidth = 1;
  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

FilterMode parse_filter_mode(const std::string& s);
const char* to_string(FilterMode m);

// Kept bins of a centered B x B square, in unshifted coordinates. Low pass
// centers the square on DC, high pass on the highest frequency.
struct FilterMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> keep;

  bool operator()(std::size_t i, std::size_t j) const { return keep[i * width + j] != 0; }
  std::size_t count() const;
  // True when the kept set is closed under (i, j) -> (-i, -j); only such
  // masks map real images to real images.
  bool conjugate_symmetric() const;
};

FilterMask filter_mask(std::size_t h, std::size_t w, const FilterSpec& f);

// Zeroes every spectral bin outside the mask and inverts. Output is not
// clipped. Throws std::invalid_argument when B exceeds min(H, W) or when the
// square is not conjugate-symmetric (even B on an axis whose parity leaves it
// off-center).
Image apply_filter(const Image& x, const FilterSpec& f);

// The same checks without filtering anything. filter_mask itself only
// checks the range, so illegal squares can still be inspected.
void check_filter(const FilterSpec& f, std::size_t h, std::size_t w);

}  // namespace specrob
