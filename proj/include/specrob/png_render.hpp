#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>

namespace specrob {

// 256-entry perceptually ordered colour ramp (dark blue to yellow).
const std::array<std::array<std::uint8_t, 3>, 256>& color_ramp();

struct ColorScale {
  std::optional<std::pair<double, double>> fixed;  // (min, max); automatic when empty
};

// Ramp index for v under [lo, hi]; out-of-range values clamp to the ends.
std::size_t ramp_index(double v, double lo, double hi);

// 8-bit RGB PNG of a rows x cols grid, each cell drawn as a scale x scale block.
void render_heatmap_png(std::span<const double> grid, std::size_t rows, std::size_t cols,
                        const std::filesystem::path& path, const ColorScale& scale = {},
                        std::size_t upscale = 8);

}  // namespace specrob
