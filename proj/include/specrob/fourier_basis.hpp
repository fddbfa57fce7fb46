#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "specrob/tensor.hpp"

namespace specrob {

// Frequency bin in unshifted coordinates.
struct FrequencyIndex {
  std::size_t i = 0;
  std::size_t j = 0;

  FrequencyIndex partner(std::size_t h, std::size_t w) const {
    return {(h - i % h) % h, (w - j % w) % w};
  }
  bool self_conjugate(std::size_t h, std::size_t w) const { return partner(h, w) == *this; }
  // Lexicographically smaller member of the conjugate pair.
  FrequencyIndex canonical(std::size_t h, std::size_t w) const;

  static FrequencyIndex from_shifted(std::size_t row, std::size_t col, std::size_t h, std::size_t w);
  std::pair<std::size_t, std::size_t> to_shifted(std::size_t h, std::size_t w) const;

  friend bool operator==(const FrequencyIndex&, const FrequencyIndex&) = default;
  friend auto operator<=>(const FrequencyIndex&, const FrequencyIndex&) = default;
};

// Unit-norm real H x W matrix proportional to cos(2 pi (i m / H + j n / W)).
struct BasisMatrix {
  FrequencyIndex index;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;
};

BasisMatrix basis_matrix(FrequencyIndex idx, std::size_t h, std::size_t w);

// Immutable table of every basis matrix for one grid size.
class BasisTable {
 public:
  BasisTable(std::size_t h, std::size_t w);
  std::span<const double> operator()(FrequencyIndex idx) const {
    return std::span<const double>(data_).subspan((idx.i * w_ + idx.j) * h_ * w_, h_ * w_);
  }
  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }

 private:
  std::size_t h_, w_;
  std::vector<double> data_;
};

// Process-wide cache of tables keyed by grid size; safe for concurrent use.
std::shared_ptr<const BasisTable> shared_basis_table(std::size_t h, std::size_t w);

enum class SignPolicy { random_per_channel, fixed_positive, fixed_negative };

struct PerturbationParams {
  double norm = 0.0;  // l2 norm of the delta in each channel
  SignPolicy sign = SignPolicy::random_per_channel;
  std::uint64_t seed = 0;
  bool clip = false;
};

// Per-channel signs for one perturbation, drawn from `seed`.
std::vector<double> perturbation_signs(std::size_t channels, SignPolicy policy, std::uint64_t seed);

// X + r_c v U in every channel c, clipped only when params.clip is set.
Image basis_perturb(const Image& x, FrequencyIndex idx, const PerturbationParams& params);

// Adds coefficient[c] * basis to channel c in place.
void add_basis(Image& x, std::span<const double> basis, std::span<const double> coefficient);

}  // namespace specrob
