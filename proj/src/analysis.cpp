#include "specrob/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "specrob/fft.hpp"
#include "specrob/filters.hpp"
#include "specrob/parallel.hpp"
#include "specrob/rng.hpp"

namespace specrob {

namespace {

constexpr std::size_t kReduceChunk = 32;

// Sum of |dft2| per unshifted bin over the channels of x.
void add_magnitudes(const Image& x, std::vector<double>& acc) {
  const Spectrum s = dft2(x);
  const std::size_t plane = x.shape().plane();
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (std::size_t k = 0; k < plane; ++k) acc[k] += std::abs(s.coeffs[c * plane + k]);
}

// Chunked reduction with a fixed combination order, so the result does not
// depend on the number of workers.
template <class Fn>
std::vector<double> reduce_chunks(std::size_t n, std::size_t len, Fn&& per_item) {
  const std::size_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(len, 0.0));
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kReduceChunk);
    for (std::size_t i = c * kReduceChunk; i < end; ++i) per_item(i, partial[c]);
  });
  std::vector<double> total(len, 0.0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < len; ++k) total[k] += p[k];
  return total;
}

SpectralTemplate finish_template(std::vector<double> sum, std::size_t h, std::size_t w, double count,
                                 std::string source) {
  SpectralTemplate t{h, w, std::vector<double>(h * w), std::move(source)};
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t pi = (h - i) % h, pj = (w - j) % w;
      const double v = 0.5 * (sum[i * w + j] + sum[pi * w + pj]) / count;
      t.values[shift_index(i, h) * w + shift_index(j, w)] = v;
    }
  return t;
}

void check_uniform(std::span<const Image> images) {
  if (images.empty()) throw std::invalid_argument("spectrum needs at least one image");
  for (const auto& im : images)
    if (im.shape() != images.front().shape()) throw std::invalid_argument("images differ in shape");
}

}  // namespace

SpectralTemplate mean_magnitude_spectrum(std::span<const Image> images, std::string source) {
  check_uniform(images);
  const Shape s = images.front().shape();
  auto sum = reduce_chunks(images.size(), s.plane(),
                           [&](std::size_t i, std::vector<double>& acc) { add_magnitudes(images[i], acc); });
  return finish_template(std::move(sum), s.height, s.width,
                         static_cast<double>(images.size() * s.channels), std::move(source));
}

SpectralTemplate dataset_spectrum(std::span<const Image> images) {
  return mean_magnitude_spectrum(images, "dataset");
}

SpectralTemplate corruption_delta_spectrum(std::span<const Image> images, const CorruptionSpec& spec) {
  check_uniform(images);
  corruption_info(spec.name);
  const Shape s = images.front().shape();
  auto sum = reduce_chunks(images.size(), s.plane(), [&](std::size_t i, std::vector<double>& acc) {
    CorruptionSpec local = spec;
    local.seed = derive_seed(spec.seed, "delta", {i});
    add_magnitudes(apply_corruption(images[i], local) - images[i], acc);
  });
  return finish_template(std::move(sum), s.height, s.width, static_cast<double>(images.size() * s.channels),
                         spec.name + ":" + std::to_string(spec.severity));
}

double energy_fraction(const Image& delta, std::size_t bandwidth) {
  const FilterMask mask = filter_mask(delta.height(), delta.width(), FilterSpec{FilterMode::high, bandwidth});
  const Spectrum s = dft2(delta);
  const std::size_t plane = delta.shape().plane();
  double kept = 0.0, total = 0.0;
  for (std::size_t c = 0; c < delta.channels(); ++c)
    for (std::size_t k = 0; k < plane; ++k) {
      const double e = std::norm(s.coeffs[c * plane + k]);
      total += e;
      if (mask.keep[k]) kept += e;
    }
  if (!(total > 0.0)) throw std::domain_error("energy fraction of a zero delta is undefined");
  return kept / total;
}

double energy_fraction(const SpectralTemplate& t, std::size_t bandwidth) {
  const FilterMask mask = filter_mask(t.height, t.width, FilterSpec{FilterMode::high, bandwidth});
  double kept = 0.0, total = 0.0;
  for (std::size_t i = 0; i < t.height; ++i)
    for (std::size_t j = 0; j < t.width; ++j) {
      const double e = t.at(i, j) * t.at(i, j);
      total += e;
      if (mask(i, j)) kept += e;
    }
  if (!(total > 0.0)) throw std::domain_error("energy fraction of a zero template is undefined");
  return kept / total;
}

double mean_energy_fraction(std::span<const Image> images, const std::string& corruption,
                            const std::vector<int>& severities, std::uint64_t seed, std::size_t bandwidth) {
  check_uniform(images);
  if (severities.empty()) throw std::invalid_argument("no severities given");
  // Two accumulators: fraction sum and count of nonzero deltas.
  auto sum = reduce_chunks(images.size(), 2, [&](std::size_t i, std::vector<double>& acc) {
    for (int sev : severities) {
      const CorruptionSpec spec{corruption, sev, derive_seed(seed, "delta", {i})};
      const Image d = apply_corruption(images[i], spec) - images[i];
      if (l2_norm(d) == 0.0) continue;
      acc[0] += energy_fraction(d, bandwidth);
      acc[1] += 1.0;
    }
  });
  if (sum[1] == 0.0) throw std::domain_error(corruption + " left every image unchanged");
  return sum[0] / sum[1];
}

AdvSpectrumResult adv_perturbation_spectrum(const Network& model, std::span<const Image> images,
                                            std::span<const int> labels, const PgdConfig& pgd,
                                            const AdvSpectrumOptions& opt) {
  check_uniform(images);
  if (labels.size() != images.size()) throw std::invalid_argument("labels and images differ in length");
  if (opt.chunk == 0) throw std::invalid_argument("chunk must be positive");
  AdvSpectrumResult r;
  if (opt.exclude_misclassified) {
    const auto pred = model.predict(images);
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (pred[i] == labels[i]) r.indices.push_back(i);
      else ++r.skipped_misclassified;
    }
  } else {
    for (std::size_t i = 0; i < images.size(); ++i) r.indices.push_back(i);
  }
  r.attacked = r.indices.size();
  r.attacks.resize(r.attacked);
  const std::size_t chunks = (r.attacked + opt.chunk - 1) / opt.chunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * opt.chunk, end = std::min(r.attacked, begin + opt.chunk);
    std::vector<Image> batch;
    std::vector<int> y;
    for (std::size_t k = begin; k < end; ++k) {
      batch.push_back(images[r.indices[k]]);
      y.push_back(labels[r.indices[k]]);
    }
    PgdConfig cfg = pgd;
    cfg.seed = derive_seed(pgd.seed, "adv-chunk", {c});
    auto res = pgd_attack(model, batch, y, cfg);
    for (std::size_t k = begin; k < end; ++k) r.attacks[k] = std::move(res[k - begin]);
  });

  std::vector<Image> deltas;
  for (std::size_t k = 0; k < r.attacked; ++k) {
    if (!r.attacks[k].success) continue;
    Image d = r.attacks[k].adversarial - images[r.indices[k]];
    if (l2_norm(d) == 0.0) {
      ++r.zero_delta;
      continue;
    }
    ++r.successes;
    deltas.push_back(std::move(d));
  }
  r.success_rate = r.attacked ? static_cast<double>(r.successes + r.zero_delta) / static_cast<double>(r.attacked) : 0.0;
  if (deltas.empty()) throw std::runtime_error("no successful perturbations");
  r.spectrum = mean_magnitude_spectrum(deltas, "pgd");
  return r;
}

}  // namespace specrob
