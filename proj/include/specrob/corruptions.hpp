#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "specrob/tensor.hpp"

namespace specrob {

enum class CorruptionFamily { noise, blur, weather, digital };

const char* to_string(CorruptionFamily f);

struct CorruptionInfo {
  std::string_view name;
  CorruptionFamily family;
  // Strength parameter per severity 1..5, and the value that makes the
  // corruption the identity.
  std::array<double, 5> strength;
  double neutral;
  bool stochastic;
};

// Fixed enumeration used for metrics tables, in table order.
const std::vector<CorruptionInfo>& corruption_suite();
const CorruptionInfo& corruption_info(std::string_view name);  // throws on unknown name

struct CorruptionSpec {
  std::string name;
  int severity = 1;
  std::uint64_t seed = 0;
};

// Output shape equals input shape and values lie in [0, 1].
Image apply_corruption(const Image& x, const CorruptionSpec& spec);

// Same corruption with an explicit strength instead of a severity level.
Image apply_corruption_strength(const Image& x, std::string_view name, double strength,
                                std::uint64_t seed);

}  // namespace specrob
