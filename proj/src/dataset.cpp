#include "specrob/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "specrob/npy.hpp"

namespace specrob {

void Dataset::validate() const {
  if (images.size() != labels.size()) throw std::invalid_argument("dataset: image and label counts differ");
  for (const auto& im : images)
    if (im.shape() != images.front().shape()) throw std::invalid_argument("dataset: images differ in shape");
  for (int l : labels)
    if (l < 0 || (classes > 0 && static_cast<std::size_t>(l) >= classes))
      throw std::invalid_argument("dataset: label " + std::to_string(l) + " out of range");
}

Dataset Dataset::head(std::size_t n) const {
  Dataset d{{}, {}, classes, source};
  n = std::min(n, size());
  d.images.assign(images.begin(), images.begin() + static_cast<long>(n));
  d.labels.assign(labels.begin(), labels.begin() + static_cast<long>(n));
  return d;
}

namespace {

constexpr std::size_t kCifarPixels = 3 * 32 * 32;

std::size_t infer_classes(const std::vector<int>& labels) {
  int m = -1;
  for (int l : labels) m = std::max(m, l);
  return static_cast<std::size_t>(m + 1);
}

}  // namespace

Dataset load_cifar_binary(const std::filesystem::path& path, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto bytes = std::filesystem::file_size(path);
  if (bytes % (1 + kCifarPixels) != 0)
    throw std::runtime_error(path.string() + ": size " + std::to_string(bytes) + " is not a multiple of 3073");
  Dataset d;
  d.source = path.string();
  std::vector<unsigned char> rec(1 + kCifarPixels);
  while (limit == 0 || d.size() < limit) {
    in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
    if (in.gcount() == 0) break;
    if (static_cast<std::size_t>(in.gcount()) != rec.size())
      throw std::runtime_error(path.string() + ": truncated record " + std::to_string(d.size()));
    if (rec[0] > 9)
      throw std::runtime_error(path.string() + ": record " + std::to_string(d.size()) + " has label " +
                               std::to_string(rec[0]));
    Image im(Shape{3, 32, 32});
    for (std::size_t k = 0; k < kCifarPixels; ++k) im.data()[k] = rec[1 + k] / 255.0;
    d.images.push_back(std::move(im));
    d.labels.push_back(rec[0]);
  }
  d.classes = 10;
  d.validate();
  return d;
}

void save_cifar_binary(const Dataset& d, const std::filesystem::path& path) {
  d.validate();
  if (!d.images.empty() && d.shape() != Shape{3, 32, 32})
    throw std::invalid_argument("CIFAR binary requires 3x32x32 images");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::vector<unsigned char> rec(1 + kCifarPixels);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] > 9) throw std::invalid_argument("CIFAR binary labels must be 0..9");
    rec[0] = static_cast<unsigned char>(d.labels[i]);
    for (std::size_t k = 0; k < kCifarPixels; ++k)
      rec[1 + k] = static_cast<unsigned char>(std::lround(std::clamp(d.images[i].data()[k], 0.0, 1.0) * 255.0));
    out.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Dataset load_npy_dir(const std::filesystem::path& dir, std::size_t limit) {
  const NpyArray x = read_npy(dir / "images.npy");
  const NpyArray y = read_npy(dir / "labels.npy");
  if (x.shape.size() != 4) throw std::runtime_error("images.npy must have shape (N, C, H, W)");
  if (y.shape.size() != 1 || y.shape[0] != x.shape[0])
    throw std::runtime_error("labels.npy must have shape (N,) matching images.npy");
  const double scale = x.dtype == "|u1" ? 1.0 / 255.0 : 1.0;
  const Shape s{x.shape[1], x.shape[2], x.shape[3]};
  std::size_t n = x.shape[0];
  if (limit > 0) n = std::min(n, limit);
  Dataset d;
  d.source = dir.string();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> px(x.values.begin() + static_cast<long>(i * s.size()),
                           x.values.begin() + static_cast<long>((i + 1) * s.size()));
    if (scale != 1.0)
      for (double& v : px) v *= scale;
    d.images.emplace_back(s, std::move(px));
    const double l = y.values[i];
    if (l != std::floor(l) || l < 0) throw std::runtime_error("labels.npy holds a non-class value");
    d.labels.push_back(static_cast<int>(l));
  }
  d.classes = infer_classes(d.labels);
  d.validate();
  return d;
}

void save_npy_dir(const Dataset& d, const std::filesystem::path& dir) {
  d.validate();
  std::filesystem::create_directories(dir);
  const Shape s = d.shape();
  NpyArray x{"<f8", {d.size(), s.channels, s.height, s.width}, {}};
  x.values.reserve(d.size() * s.size());
  for (const auto& im : d.images) x.values.insert(x.values.end(), im.data().begin(), im.data().end());
  write_npy(dir / "images.npy", x);
  NpyArray y{"<i8", {d.size()}, std::vector<double>(d.labels.begin(), d.labels.end())};
  write_npy(dir / "labels.npy", y);
}

Dataset load_dataset(const std::filesystem::path& path, std::size_t limit) {
  if (std::filesystem::is_directory(path)) return load_npy_dir(path, limit);
  if (!std::filesystem::exists(path)) throw std::runtime_error("dataset not found: " + path.string());
  return load_cifar_binary(path, limit);
}

}  // namespace specrob
