#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specrob/model.hpp"

namespace specrob {

enum class Arch {
  smallconv,  // conv3x3(16)+ReLU, pool2, conv3x3(32)+ReLU, pool2, dense(K)
  mlp,        // dense(hidden)+ReLU, dense(K)
  linear,     // dense(K)
};

Arch parse_arch(const std::string& s);
const char* to_string(Arch a);

struct ArchSpec {
  Arch kind = Arch::smallconv;
  Shape input{3, 32, 32};
  std::size_t classes = 10;
  std::size_t conv1_channels = 16;
  std::size_t conv2_channels = 32;
  std::size_t hidden = 32;
  double input_offset = 0.5;  // subtracted after the front end
};

// Built-in differentiable classifier. Parameters live in one flat vector so
// optimizers and checkpoints can treat them uniformly.
class Network final : public Model {
 public:
  Network(const ArchSpec& arch, std::uint64_t seed, std::optional<FilterSpec> front_end = std::nullopt);

  const ModelInfo& info() const override { return info_; }
  Logits forward(std::span<const Image> batch) const override;
  TapOutputs forward_with_taps(std::span<const Image> batch,
                               const std::vector<std::string>& layers) const override;

  // Front end: low pass -> clip to [0,1]; high pass -> whole-image
  // normalization (all zeros when the filtered image is constant).
  Image apply_front_end(const Image& x) const;

  // d(loss_scale * mean cross-entropy)/d(input), one tensor per batch entry.
  std::vector<Image> grad_input(std::span<const Image> batch, std::span<const int> labels,
                                double loss_scale = 1.0) const;

  struct BatchStats {
    double loss_sum = 0.0;
    std::size_t correct = 0;
  };
  // Adds d(sum cross-entropy)/d(params) * scale into `grad` (same layout as
  // parameters()).
  BatchStats accumulate_gradients(std::span<const Image> batch, std::span<const int> labels,
                                  double scale, std::vector<double>& grad) const;

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }
  // Mask of entries subject to weight decay (weights, not biases).
  const std::vector<std::uint8_t>& decay_mask() const { return decay_mask_; }

  const ArchSpec& arch() const { return arch_; }
  const std::optional<FilterSpec>& front_end() const { return front_end_; }

  struct ParamBlock {
    std::string name;
    std::size_t offset;
    std::vector<std::size_t> shape;
  };
  const std::vector<ParamBlock>& parameter_blocks() const { return blocks_; }

 private:
  enum class Kind { conv3x3, relu, pool2, dense };
  struct Layer {
    Kind kind;
    Shape in, out;
    std::size_t weight = 0, bias = 0;  // offsets into params_
    std::string tap;
  };

  void build();
  void add_param(const std::string& name, std::vector<std::size_t> shape, bool decay,
                 std::size_t& offset);

  // acts[0] is the centered network input; acts[l + 1] is the output of layer l.
  void forward_one(const Image& front, std::vector<std::vector<double>>& acts) const;
  // Backpropagates dlogits; returns d/d(centered input) when want_input.
  std::vector<double> backward_one(const std::vector<std::vector<double>>& acts,
                                   std::vector<double> dout, std::vector<double>* grad,
                                   bool want_input) const;
  Image front_end_backward(const Image& raw, const Image& front, const Image& grad_front) const;

  ArchSpec arch_;
  std::optional<FilterSpec> front_end_;
  ModelInfo info_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
  std::vector<std::uint8_t> decay_mask_;
  std::vector<ParamBlock> blocks_;
};

// Mean softmax cross-entropy helpers shared by training and tests.
double softmax_cross_entropy(std::span<const double> logits, int label, std::span<double> dlogits);

}  // namespace specrob
