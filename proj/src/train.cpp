#include "specrob/train.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "specrob/corruptions.hpp"
#include "specrob/rng.hpp"

namespace specrob {

namespace {

// Projects v onto [x - eps, x + eps] intersected with [0, 1], with bounds
// nudged inward so that |result - x| <= eps also holds in floating point.
double project(double v, double x, double eps) {
  double lo = x - eps, hi = x + eps;
  if (x - lo > eps) lo = std::nextafter(lo, x);
  if (hi - x > eps) hi = std::nextafter(hi, x);
  return std::clamp(std::clamp(v, lo, hi), 0.0, 1.0);
}

}  // namespace

std::vector<PgdResult> pgd_attack(const Network& model, std::span<const Image> batch,
                                  std::span<const int> labels, const PgdConfig& cfg) {
  if (labels.size() != batch.size()) throw std::invalid_argument("labels and batch differ in length");
  if (!(cfg.epsilon >= 0.0) || !(cfg.step_size >= 0.0))
    throw std::invalid_argument("pgd epsilon and step size must be non-negative");
  std::vector<Image> adv(batch.begin(), batch.end());
  if (cfg.random_init)
    for (std::size_t i = 0; i < adv.size(); ++i) {
      Rng rng(cfg.seed, "pgd-init", {i});
      auto& a = adv[i].data();
      const auto& x = batch[i].data();
      for (std::size_t k = 0; k < a.size(); ++k)
        a[k] = project(x[k] + rng.uniform(-cfg.epsilon, cfg.epsilon), x[k], cfg.epsilon);
    }
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const std::vector<Image> grads = model.grad_input(adv, labels);
    for (std::size_t i = 0; i < adv.size(); ++i) {
      auto& a = adv[i].data();
      const auto& x = batch[i].data();
      const auto& g = grads[i].data();
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double s = g[k] > 0.0 ? 1.0 : (g[k] < 0.0 ? -1.0 : 0.0);
        a[k] = project(a[k] + cfg.step_size * s, x[k], cfg.epsilon);
      }
    }
  }
  const std::vector<int> pred = model.predict(adv);
  std::vector<PgdResult> out(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) out[i] = {std::move(adv[i]), pred[i] != labels[i]};
  return out;
}

std::string stage_name(const AugStage& s) {
  static constexpr const char* names[] = {"flip_crop", "gaussian", "band_limited",
                                          "matched", "corruption_set", "adversarial"};
  return names[s.index()];
}

namespace {

std::size_t reflect(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  while (i < 0 || i >= m) i = i < 0 ? -i : 2 * (m - 1) - i;
  return static_cast<std::size_t>(i);
}

Image flip_crop(const Image& x, std::size_t pad, Rng& rng) {
  const bool flip = rng.bernoulli(0.5);
  const long oy = static_cast<long>(rng.below(2 * pad + 1)) - static_cast<long>(pad);
  const long ox = static_cast<long>(rng.below(2 * pad + 1)) - static_cast<long>(pad);
  Image out(x.shape());
  const std::size_t h = x.height(), w = x.width();
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) {
        const std::size_t sy = reflect(static_cast<long>(y) + oy, h);
        std::size_t sx = reflect(static_cast<long>(xx) + ox, w);
        if (flip) sx = w - 1 - sx;
        out.at(c, y, xx) = x.at(c, sy, sx);
      }
  return out;
}

}  // namespace

void augment_batch(std::vector<Image>& batch, std::span<const int> labels, const AugStage& stage,
                   std::uint64_t seed, const Network* model) {
  if (const auto* s = std::get_if<FlipCropStage>(&stage)) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Rng rng(seed, "flip-crop", {i});
      batch[i] = flip_crop(batch[i], s->pad, rng);
    }
  } else if (const auto* s = std::get_if<GaussianStage>(&stage)) {
    gaussian_augment(batch, GaussianAugConfig{s->sigma, seed, s->per_image_sigma, true});
  } else if (const auto* s = std::get_if<BandLimitedStage>(&stage)) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Image n = band_limited_noise(batch[i].shape(),
                                         BandNoiseConfig{s->filter, s->norm, derive_seed(seed, "band", {i})});
      batch[i] = clip01(batch[i] + n);
    }
  } else if (const auto* s = std::get_if<MatchedStage>(&stage)) {
    matched_noise_augment(batch, s->spectral_template, seed);
  } else if (const auto* s = std::get_if<CorruptionSetStage>(&stage)) {
    if (s->names.empty() || s->severities.empty())
      throw std::invalid_argument("corruption_set stage needs names and severities");
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Rng rng(seed, "corruption-pick", {i});
      if (rng.bernoulli(s->clean_fraction)) continue;
      const auto& name = s->names[rng.below(s->names.size())];
      const int sev = s->severities[rng.below(s->severities.size())];
      batch[i] = apply_corruption(batch[i], CorruptionSpec{name, sev, derive_seed(seed, "corruption", {i})});
    }
  } else if (const auto* s = std::get_if<AdversarialStage>(&stage)) {
    if (!model) throw std::invalid_argument("adversarial stage needs a model");
    PgdConfig cfg = s->pgd;
    cfg.seed = seed;
    auto res = pgd_attack(*model, batch, labels, cfg);
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = std::move(res[i].adversarial);
  }
}

double learning_rate_at(const TrainConfig& cfg, std::size_t epoch) {
  double lr = cfg.learning_rate;
  for (auto e : cfg.decay_epochs)
    if (epoch >= e) lr *= cfg.lr_decay;
  return lr;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, const Dataset* test,
                  const EpochCallback& on_epoch) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("training set is empty");
  if (cfg.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  ArchSpec arch = cfg.arch;
  arch.input = data.shape();
  if (data.classes > 0) arch.classes = data.classes;

  TrainResult result;
  result.model = std::make_shared<Network>(arch, derive_seed(cfg.seed, "model"), cfg.front_end);
  Network& net = *result.model;
  std::vector<double>& params = net.parameters();
  const auto& decay = net.decay_mask();
  std::vector<double> velocity(params.size(), 0.0), grad(params.size(), 0.0);

  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(cfg.seed, "shuffle", {epoch});
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    const double lr = learning_rate_at(cfg, epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0;

    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<Image> batch;
      std::vector<int> labels;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(data.images[order[k]]);
        labels.push_back(data.labels[order[k]]);
      }
      for (std::size_t si = 0; si < cfg.pipeline.size(); ++si)
        augment_batch(batch, labels, cfg.pipeline[si], derive_seed(cfg.seed, "augment", {epoch, b, si}), &net);

      std::fill(grad.begin(), grad.end(), 0.0);
      const auto stats = net.accumulate_gradients(batch, labels, 1.0 / static_cast<double>(batch.size()), grad);
      if (!std::isfinite(stats.loss_sum))
        throw TrainingDiverged(fmt::format("training diverged: non-finite loss at epoch {} batch {} (lr {})",
                                           epoch, b, lr));
      loss_sum += stats.loss_sum;
      correct += stats.correct;
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double g = grad[p] + (decay[p] ? cfg.weight_decay * params[p] : 0.0);
        velocity[p] = cfg.momentum * velocity[p] + g;
        params[p] -= lr * velocity[p];
      }
      if (!std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); }))
        throw TrainingDiverged(fmt::format("training diverged: non-finite parameters at epoch {} batch {} (lr {})",
                                           epoch, b, lr));
    }

    EpochLog log{epoch, lr, loss_sum / static_cast<double>(data.size()),
                 static_cast<double>(correct) / static_cast<double>(data.size()), std::nullopt};
    if (test && test->size() > 0) {
      const auto pred = net.predict(test->images);
      std::size_t ok = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == test->labels[i];
      log.test_accuracy = static_cast<double>(ok) / static_cast<double>(pred.size());
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return result;
}

TrainResult adversarial_train(const Dataset& data, TrainConfig cfg, const PgdConfig& pgd,
                              const Dataset* test, const EpochCallback& on_epoch) {
  cfg.pipeline.push_back(AdversarialStage{pgd});
  return train(data, cfg, test, on_epoch);
}

}  // namespace specrob
