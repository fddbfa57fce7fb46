#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace specrob {

// Subset of NPY v1.0: little-endian <f4, <f8, <i4, <i8 and |u1, C order.
struct NpyArray {
  std::string dtype;  // "<f4", "<f8", "<i4", "<i8" or "|u1"
  std::vector<std::size_t> shape;
  std::vector<double> values;  // converted on load

  std::size_t count() const;
};

NpyArray read_npy(const std::filesystem::path& path);
// Writes values converted to `dtype`.
void write_npy(const std::filesystem::path& path, const NpyArray& a);

}  // namespace specrob
