#include "specrob/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specrob/filters.hpp"
#include "specrob/parallel.hpp"
#include "specrob/rng.hpp"
#include "specrob/simd.hpp"

namespace specrob {

int Logits::argmax(std::size_t i) const {
  auto r = row(i);
  return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
}

std::vector<int> Model::predict(std::span<const Image> batch) const {
  Logits l = forward(batch);
  std::vector<int> out(l.rows);
  for (std::size_t i = 0; i < l.rows; ++i) out[i] = l.argmax(i);
  return out;
}

void check_finite(const Logits& logits) {
  for (double v : logits.values)
    if (!std::isfinite(v)) throw std::runtime_error("numerical failure: non-finite logits");
}

Arch parse_arch(const std::string& s) {
  if (s == "smallconv") return Arch::smallconv;
  if (s == "mlp") return Arch::mlp;
  if (s == "linear") return Arch::linear;
  throw std::invalid_argument("unknown architecture '" + s + "' (expected smallconv|mlp|linear)");
}

const char* to_string(Arch a) {
  switch (a) {
    case Arch::smallconv: return "smallconv";
    case Arch::mlp: return "mlp";
    case Arch::linear: return "linear";
  }
  return "?";
}

double softmax_cross_entropy(std::span<const double> logits, int label, std::span<double> dlogits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    dlogits[k] = std::exp(logits[k] - m);
    z += dlogits[k];
  }
  for (auto& d : dlogits) d /= z;
  const double loss = std::log(z) + m - logits[static_cast<std::size_t>(label)];
  dlogits[static_cast<std::size_t>(label)] -= 1.0;
  return loss;
}

namespace {

// col[(c*9 + ky*3 + kx) * HW + y*W + x] = in[c, y+ky-1, x+kx-1], zero padded.
void im2col(const double* in, const Shape& s, std::vector<double>& col) {
  const std::size_t h = s.height, w = s.width, hw = s.plane();
  col.assign(s.channels * 9 * hw, 0.0);
  for (std::size_t c = 0; c < s.channels; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        double* dst = col.data() + (c * 9 + static_cast<std::size_t>(ky * 3 + kx)) * hw;
        const double* src = in + c * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          for (std::size_t x = 0; x < w; ++x) {
            const long sx = static_cast<long>(x) + kx - 1;
            if (sx < 0 || sx >= static_cast<long>(w)) continue;
            dst[y * w + x] = src[static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)];
          }
        }
      }
}

void col2im(const std::vector<double>& col, const Shape& s, double* out) {
  const std::size_t h = s.height, w = s.width, hw = s.plane();
  std::fill(out, out + s.size(), 0.0);
  for (std::size_t c = 0; c < s.channels; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const double* src = col.data() + (c * 9 + static_cast<std::size_t>(ky * 3 + kx)) * hw;
        double* dst = out + c * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          for (std::size_t x = 0; x < w; ++x) {
            const long sx = static_cast<long>(x) + kx - 1;
            if (sx < 0 || sx >= static_cast<long>(w)) continue;
            dst[static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)] += src[y * w + x];
          }
        }
      }
}

std::vector<double> transpose(const double* a, std::size_t rows, std::size_t cols) {
  std::vector<double> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = a[r * cols + c];
  return t;
}

// Below this the filtered image is constant up to transform round-off.
constexpr double kDegenerateStd = 1e-12;

// Images per work item in batched passes.
constexpr std::size_t kBatchChunk = 8;

double population_std(const Image& f) {
  double mean = 0.0;
  for (double v : f.values()) mean += v;
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (double v : f.values()) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(f.size()));
}

}  // namespace

Network::Network(const ArchSpec& arch, std::uint64_t seed, std::optional<FilterSpec> front_end)
    : arch_(arch), front_end_(front_end) {
  if (arch_.classes < 2) throw std::invalid_argument("model needs at least 2 classes");
  if (arch_.input.size() == 0) throw std::invalid_argument("model input shape is empty");
  if (front_end_) check_filter(*front_end_, arch_.input.height, arch_.input.width);
  build();

  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    std::size_t len = 1;
    for (auto d : blk.shape) len *= d;
    // fan-in of the owning layer: weights and biases share the bound.
    std::size_t fan_in = 1;
    const auto& wshape = (b % 2 == 0) ? blk.shape : blocks_[b - 1].shape;
    for (std::size_t d = 1; d < wshape.size(); ++d) fan_in *= wshape[d];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Rng rng(seed, "init", {b});
    for (std::size_t i = 0; i < len; ++i) params_[blk.offset + i] = rng.uniform(-bound, bound);
  }

  info_.logits = true;
  info_.layer_taps = true;
  info_.gradients = true;
  info_.classes = arch_.classes;
  info_.input = arch_.input;
  info_.layers.push_back("input");
  for (const auto& l : layers_)
    if (!l.tap.empty()) info_.layers.push_back(l.tap);
}

void Network::add_param(const std::string& name, std::vector<std::size_t> shape, bool decay,
                        std::size_t& offset) {
  std::size_t len = 1;
  for (auto d : shape) len *= d;
  offset = params_.size();
  blocks_.push_back({name, offset, std::move(shape)});
  params_.resize(params_.size() + len, 0.0);
  decay_mask_.resize(params_.size(), decay ? 1 : 0);
}

void Network::build() {
  const Shape in = arch_.input;
  auto dense = [&](const std::string& name, Shape from, std::size_t out, const std::string& tap) {
    Layer l{Kind::dense, from, Shape{out, 1, 1}, 0, 0, tap};
    add_param(name + ".weight", {out, from.size()}, true, l.weight);
    add_param(name + ".bias", {out}, false, l.bias);
    layers_.push_back(l);
    return l.out;
  };
  auto conv = [&](const std::string& name, Shape from, std::size_t out) {
    Layer l{Kind::conv3x3, from, Shape{out, from.height, from.width}, 0, 0, ""};
    add_param(name + ".weight", {out, from.channels, 3, 3}, true, l.weight);
    add_param(name + ".bias", {out}, false, l.bias);
    layers_.push_back(l);
    return l.out;
  };
  auto relu = [&](Shape s, const std::string& tap) {
    layers_.push_back(Layer{Kind::relu, s, s, 0, 0, tap});
    return s;
  };
  auto pool = [&](Shape s, const std::string& tap) {
    if (s.height < 2 || s.width < 2) throw std::invalid_argument("input too small for pooling");
    Shape o{s.channels, s.height / 2, s.width / 2};
    layers_.push_back(Layer{Kind::pool2, s, o, 0, 0, tap});
    return o;
  };

  switch (arch_.kind) {
    case Arch::smallconv: {
      Shape s = conv("conv1", in, arch_.conv1_channels);
      s = relu(s, "init_conv");
      s = pool(s, "");
      s = conv("conv2", s, arch_.conv2_channels);
      s = relu(s, "block1");
      s = pool(s, "block2");
      dense("fc", s, arch_.classes, "logits");
      break;
    }
    case Arch::mlp: {
      Shape s = dense("fc1", in, arch_.hidden, "");
      s = relu(s, "hidden");
      dense("fc2", s, arch_.classes, "logits");
      break;
    }
    case Arch::linear:
      dense("fc", in, arch_.classes, "logits");
      break;
  }
}

Image Network::apply_front_end(const Image& x) const {
  if (x.shape() != arch_.input) throw std::invalid_argument("input shape does not match the model");
  if (!front_end_) return x;
  Image f = apply_filter(x, *front_end_);
  if (front_end_->mode == FilterMode::low) return clip01(std::move(f));
  if (!(population_std(f) > kDegenerateStd)) return Image(f.shape(), 0.0);
  return normalize_visual(f).image;
}

Image Network::front_end_backward(const Image& raw, const Image& front, const Image& g) const {
  if (!front_end_) return g;
  const Image f = apply_filter(raw, *front_end_);
  Image gf = g;
  if (front_end_->mode == FilterMode::low) {
    for (std::size_t i = 0; i < gf.size(); ++i)
      if (!(f.data()[i] > 0.0 && f.data()[i] < 1.0)) gf.data()[i] = 0.0;
  } else {
    double mean = 0.0;
    for (double v : f.values()) mean += v;
    const double n = static_cast<double>(f.size());
    mean /= n;
    double var = 0.0;
    for (double v : f.values()) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > kDegenerateStd)) return Image(raw.shape(), 0.0);
    double gmean = 0.0, gz = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      gmean += g.data()[i];
      gz += g.data()[i] * front.data()[i];
    }
    gmean /= n;
    gz /= n;
    for (std::size_t i = 0; i < g.size(); ++i)
      gf.data()[i] = (g.data()[i] - gmean - front.data()[i] * gz) / sd;
  }
  // The projection onto the kept bins is self-adjoint.
  return apply_filter(gf, *front_end_);
}

void Network::forward_one(const Image& front, std::vector<std::vector<double>>& acts) const {
  const auto& K = simd::kernels();
  acts.resize(layers_.size() + 1);
  acts[0].assign(front.data().begin(), front.data().end());
  for (double& v : acts[0]) v -= arch_.input_offset;
  std::vector<double> col;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    const std::vector<double>& in = acts[li];
    std::vector<double>& out = acts[li + 1];
    out.assign(l.out.size(), 0.0);
    switch (l.kind) {
      case Kind::conv3x3: {
        im2col(in.data(), l.in, col);
        const std::size_t hw = l.out.plane(), k9 = l.in.channels * 9;
        for (std::size_t f = 0; f < l.out.channels; ++f)
          std::fill(out.begin() + static_cast<long>(f * hw), out.begin() + static_cast<long>((f + 1) * hw),
                    params_[l.bias + f]);
        K.gemm(l.out.channels, hw, k9, params_.data() + l.weight, k9, col.data(), hw, out.data(), hw);
        break;
      }
      case Kind::relu:
        K.relu(in.data(), out.data(), in.size());
        break;
      case Kind::pool2: {
        const std::size_t ow = l.out.width, iw = l.in.width;
        for (std::size_t c = 0; c < l.out.channels; ++c)
          for (std::size_t y = 0; y < l.out.height; ++y)
            for (std::size_t x = 0; x < ow; ++x) {
              const double* p = in.data() + (c * l.in.height + 2 * y) * iw + 2 * x;
              out[(c * l.out.height + y) * ow + x] = 0.25 * (p[0] + p[1] + p[iw] + p[iw + 1]);
            }
        break;
      }
      case Kind::dense: {
        const std::size_t d = l.in.size();
        for (std::size_t k = 0; k < l.out.size(); ++k)
          out[k] = params_[l.bias + k] + K.dot(params_.data() + l.weight + k * d, in.data(), d);
        break;
      }
    }
  }
}

std::vector<double> Network::backward_one(const std::vector<std::vector<double>>& acts,
                                          std::vector<double> dout, std::vector<double>* grad,
                                          bool want_input) const {
  const auto& K = simd::kernels();
  std::vector<double> din, col;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    const std::vector<double>& in = acts[li];
    const bool need_din = li > 0 || want_input;
    din.assign(need_din ? l.in.size() : 0, 0.0);
    switch (l.kind) {
      case Kind::conv3x3: {
        const std::size_t hw = l.out.plane(), k9 = l.in.channels * 9, f = l.out.channels;
        if (grad || need_din) im2col(in.data(), l.in, col);
        if (grad) {
          const std::vector<double> colt = transpose(col.data(), k9, hw);
          K.gemm(f, k9, hw, dout.data(), hw, colt.data(), k9, grad->data() + l.weight, k9);
          for (std::size_t o = 0; o < f; ++o) {
            double s = 0.0;
            for (std::size_t p = 0; p < hw; ++p) s += dout[o * hw + p];
            (*grad)[l.bias + o] += s;
          }
        }
        if (need_din) {
          const std::vector<double> wt = transpose(params_.data() + l.weight, f, k9);
          std::vector<double> dcol(k9 * hw, 0.0);
          K.gemm(k9, hw, f, wt.data(), f, dout.data(), hw, dcol.data(), hw);
          col2im(dcol, l.in, din.data());
        }
        break;
      }
      case Kind::relu:
        if (need_din)
          for (std::size_t i = 0; i < in.size(); ++i) din[i] = in[i] > 0.0 ? dout[i] : 0.0;
        break;
      case Kind::pool2: {
        if (!need_din) break;
        const std::size_t ow = l.out.width, iw = l.in.width;
        for (std::size_t c = 0; c < l.out.channels; ++c)
          for (std::size_t y = 0; y < l.out.height; ++y)
            for (std::size_t x = 0; x < ow; ++x) {
              const double g = 0.25 * dout[(c * l.out.height + y) * ow + x];
              double* p = din.data() + (c * l.in.height + 2 * y) * iw + 2 * x;
              p[0] += g;
              p[1] += g;
              p[iw] += g;
              p[iw + 1] += g;
            }
        break;
      }
      case Kind::dense: {
        const std::size_t d = l.in.size();
        for (std::size_t k = 0; k < l.out.size(); ++k) {
          if (dout[k] == 0.0) continue;
          if (grad) {
            K.axpy(dout[k], in.data(), grad->data() + l.weight + k * d, d);
            (*grad)[l.bias + k] += dout[k];
          }
          if (need_din) K.axpy(dout[k], params_.data() + l.weight + k * d, din.data(), d);
        }
        break;
      }
    }
    dout.swap(din);
  }
  return want_input ? dout : std::vector<double>{};
}

Logits Network::forward(std::span<const Image> batch) const {
  Logits out{batch.size(), arch_.classes, std::vector<double>(batch.size() * arch_.classes)};
  const std::size_t chunks = (batch.size() + kBatchChunk - 1) / kBatchChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<std::vector<double>> acts;
    for (std::size_t i = c * kBatchChunk; i < std::min(batch.size(), (c + 1) * kBatchChunk); ++i) {
      forward_one(apply_front_end(batch[i]), acts);
      std::copy(acts.back().begin(), acts.back().end(), out.values.begin() + static_cast<long>(i * arch_.classes));
    }
  });
  return out;
}

TapOutputs Network::forward_with_taps(std::span<const Image> batch,
                                      const std::vector<std::string>& layers) const {
  for (const auto& name : layers)
    if (std::find(info_.layers.begin(), info_.layers.end(), name) == info_.layers.end())
      throw std::invalid_argument("unknown layer '" + name + "'");
  TapOutputs out;
  out.logits = Logits{batch.size(), arch_.classes, std::vector<double>(batch.size() * arch_.classes)};
  for (const auto& name : layers) out.layers[name].reserve(batch.size());
  std::vector<std::vector<double>> acts;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Image front = apply_front_end(batch[i]);
    forward_one(front, acts);
    std::copy(acts.back().begin(), acts.back().end(), out.logits.values.begin() + static_cast<long>(i * arch_.classes));
    for (const auto& name : layers) {
      if (name == "input") {
        out.layers[name].push_back(front);
        continue;
      }
      for (std::size_t li = 0; li < layers_.size(); ++li)
        if (layers_[li].tap == name) out.layers[name].emplace_back(layers_[li].out, acts[li + 1]);
    }
  }
  return out;
}

std::vector<Image> Network::grad_input(std::span<const Image> batch, std::span<const int> labels,
                                       double loss_scale) const {
  if (labels.size() != batch.size()) throw std::invalid_argument("labels and batch differ in length");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= arch_.classes) throw std::invalid_argument("label out of range");
  std::vector<Image> out(batch.size());
  const double scale = loss_scale / static_cast<double>(batch.size());
  const std::size_t chunks = (batch.size() + kBatchChunk - 1) / kBatchChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<std::vector<double>> acts;
    std::vector<double> dl(arch_.classes);
    for (std::size_t i = c * kBatchChunk; i < std::min(batch.size(), (c + 1) * kBatchChunk); ++i) {
      const Image front = apply_front_end(batch[i]);
      forward_one(front, acts);
      softmax_cross_entropy(acts.back(), labels[i], dl);
      for (double& v : dl) v *= scale;
      std::vector<double> g = backward_one(acts, dl, nullptr, true);
      out[i] = front_end_backward(batch[i], front, Image(arch_.input, std::move(g)));
    }
  });
  return out;
}

Network::BatchStats Network::accumulate_gradients(std::span<const Image> batch,
                                                  std::span<const int> labels, double scale,
                                                  std::vector<double>& grad) const {
  if (labels.size() != batch.size()) throw std::invalid_argument("labels and batch differ in length");
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  // Fixed chunks summed in chunk order keep the result independent of the
  // number of workers.
  const std::size_t chunks = (batch.size() + kBatchChunk - 1) / kBatchChunk;
  std::vector<std::vector<double>> partial(chunks);
  std::vector<BatchStats> stats(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double>& g = partial[c];
    g.assign(params_.size(), 0.0);
    std::vector<std::vector<double>> acts;
    std::vector<double> dl(arch_.classes);
    for (std::size_t i = c * kBatchChunk; i < std::min(batch.size(), (c + 1) * kBatchChunk); ++i) {
      forward_one(apply_front_end(batch[i]), acts);
      const auto& logits = acts.back();
      const int pred = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
      stats[c].correct += pred == labels[i];
      stats[c].loss_sum += softmax_cross_entropy(logits, labels[i], dl);
      for (double& v : dl) v *= scale;
      backward_one(acts, dl, &g, false);
    }
  });
  BatchStats total;
  const auto& K = simd::kernels();
  for (std::size_t c = 0; c < chunks; ++c) {
    K.axpy(1.0, partial[c].data(), grad.data(), grad.size());
    total.loss_sum += stats[c].loss_sum;
    total.correct += stats[c].correct;
  }
  return total;
}

}  // namespace specrob
