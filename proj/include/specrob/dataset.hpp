#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "specrob/tensor.hpp"

namespace specrob {

struct Dataset {
  std::vector<Image> images;
  std::vector<int> labels;
  std::size_t classes = 0;
  std::string source;

  std::size_t size() const { return images.size(); }
  Shape shape() const { return images.empty() ? Shape{} : images.front().shape(); }
  // Throws when images disagree in shape, labels are out of range or counts differ.
  void validate() const;
  Dataset head(std::size_t n) const;
};

// CIFAR-style binary: records of <1 label byte><3072 channel-major pixel bytes>.
Dataset load_cifar_binary(const std::filesystem::path& path, std::size_t limit = 0);
void save_cifar_binary(const Dataset& d, const std::filesystem::path& path);

// Directory with images.npy (N,C,H,W float or uint8) and labels.npy (N,) integer.
Dataset load_npy_dir(const std::filesystem::path& dir, std::size_t limit = 0);
void save_npy_dir(const Dataset& d, const std::filesystem::path& dir);

// Dispatches on the path: *.bin -> CIFAR binary, directory -> npy pair.
Dataset load_dataset(const std::filesystem::path& path, std::size_t limit = 0);

}  // namespace specrob
