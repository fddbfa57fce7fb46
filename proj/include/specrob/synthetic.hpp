#pragma once

#include <cstdint>

#include "specrob/dataset.hpp"

namespace specrob {

// Procedural 3x32x32 ten-class dataset. Classes come in five pairs: a pair
// shares a base colour and a coarse layout, and its two members differ by a
// faint broadband fine-scale texture plus a weak, noisy low-frequency cue.
// Telling pair members apart therefore rewards sensitivity to high
// frequencies, which makes frequency-robustness trade-offs visible on a small
// model.
struct SyntheticConfig {
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  std::uint64_t palette_seed = 77;
  std::size_t size = 32;
  double color_separation = 0.15;
  double color_jitter = 0.05;
  double layout_amplitude = 0.10;
  double clutter = 0.08;
  double texture_amplitude = 0.08;
  double texture_min_radius = 6.0;
  double pair_cue = 0.025;
  double pair_cue_jitter = 0.05;
};

Dataset make_synthetic(const SyntheticConfig& cfg);

}  // namespace specrob
