#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specrob/filters.hpp"
#include "specrob/tensor.hpp"

namespace specrob {

struct ModelInfo {
  bool logits = true;
  bool layer_taps = false;
  bool gradients = false;
  std::size_t classes = 0;
  Shape input{};
  std::vector<std::string> layers;  // ordered, last entry is "logits"
};

// N x K row-major logits.
struct Logits {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * cols, cols);
  }
  int argmax(std::size_t i) const;
};

struct TapOutputs {
  Logits logits;
  std::map<std::string, std::vector<Image>> layers;  // one tensor per batch entry
};

// A classifier. Implementations must be safe to call concurrently through the
// const interface.
class Model {
 public:
  virtual ~Model() = default;
  virtual const ModelInfo& info() const = 0;
  virtual Logits forward(std::span<const Image> batch) const = 0;
  // Throws std::invalid_argument for layer names not in info().layers and
  // std::logic_error when taps are unsupported.
  virtual TapOutputs forward_with_taps(std::span<const Image> batch,
                                       const std::vector<std::string>& layers) const = 0;

  std::vector<int> predict(std::span<const Image> batch) const;
};

using ModelHandle = std::shared_ptr<const Model>;

void check_finite(const Logits& logits);  // throws "numerical failure"

}  // namespace specrob
