#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "specrob/augment.hpp"
#include "specrob/dataset.hpp"
#include "specrob/network.hpp"

namespace specrob {

struct PgdConfig {
  double epsilon = 8.0 / 255.0;
  double step_size = 2.0 / 255.0;
  std::size_t steps = 20;
  bool random_init = true;
  std::uint64_t seed = 0;
};

struct PgdResult {
  Image adversarial;
  bool success = false;  // prediction differs from the label at the end
};

// L-infinity projected gradient ascent on cross-entropy, staying inside the
// eps ball around x and inside [0, 1]. Each batch entry i draws its random
// start from (cfg.seed, i).
std::vector<PgdResult> pgd_attack(const Network& model, std::span<const Image> batch,
                                  std::span<const int> labels, const PgdConfig& cfg);

// Augmentation stages, applied in order to every training batch.
struct FlipCropStage {
  std::size_t pad = 2;
};
struct GaussianStage {
  double sigma = 0.1;
  bool per_image_sigma = false;
};
struct BandLimitedStage {
  FilterSpec filter;
  double norm = 8.0;
};
struct MatchedStage {
  SpectralTemplate spectral_template;
};
struct CorruptionSetStage {
  std::vector<std::string> names;
  std::vector<int> severities{1, 2, 3, 4, 5};
  double clean_fraction = 0.0;
};
struct AdversarialStage {
  PgdConfig pgd{8.0 / 255.0, 2.0 / 255.0, 7, true, 0};
};
using AugStage = std::variant<FlipCropStage, GaussianStage, BandLimitedStage, MatchedStage,
                              CorruptionSetStage, AdversarialStage>;

std::string stage_name(const AugStage& s);

struct TrainConfig {
  ArchSpec arch;
  std::optional<FilterSpec> front_end;
  std::size_t epochs = 16;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  // Multiply the rate by lr_decay at each listed epoch (0-based epoch index
  // where the new rate starts).
  std::vector<std::size_t> decay_epochs;
  double lr_decay = 0.1;
  std::vector<AugStage> pipeline{FlipCropStage{}};
  std::uint64_t seed = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

struct TrainResult {
  std::shared_ptr<Network> model;
  std::vector<EpochLog> log;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Mini-batch SGD with momentum. Deterministic for a fixed config and seed.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const Dataset* test = nullptr,
                  const EpochCallback& on_epoch = {});

// train() with the adversarial stage appended to the pipeline.
TrainResult adversarial_train(const Dataset& data, TrainConfig cfg, const PgdConfig& pgd,
                              const Dataset* test = nullptr, const EpochCallback& on_epoch = {});

double learning_rate_at(const TrainConfig& cfg, std::size_t epoch);

// Applies the non-adversarial stages to a batch in place. Exposed for tests.
void augment_batch(std::vector<Image>& batch, std::span<const int> labels, const AugStage& stage,
                   std::uint64_t seed, const Network* model);

}  // namespace specrob
