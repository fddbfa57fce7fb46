#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specrob/augment.hpp"
#include "specrob/corruptions.hpp"
#include "specrob/train.hpp"

namespace specrob {

constexpr std::size_t kEnergyBandwidth = 27;

// Mean |dft2| per bin over images and channels, shifted coordinates.
SpectralTemplate mean_magnitude_spectrum(std::span<const Image> images, std::string source);
SpectralTemplate dataset_spectrum(std::span<const Image> images);
// Template of |dft2(C(x) - x)|. Image k uses seed derive_seed(spec.seed, "delta", {k}).
SpectralTemplate corruption_delta_spectrum(std::span<const Image> images, const CorruptionSpec& spec);

// Share of the delta's energy inside the high-pass square of the given
// bandwidth. Throws std::domain_error for an all-zero delta.
double energy_fraction(const Image& delta, std::size_t bandwidth = kEnergyBandwidth);
// Same ratio for a magnitude template: sum of squared kept values over the
// sum of all squared values.
double energy_fraction(const SpectralTemplate& t, std::size_t bandwidth = kEnergyBandwidth);

// Average energy fraction of C(x) - x over images and the given severities.
// Images whose delta is exactly zero are skipped; throws when all are.
double mean_energy_fraction(std::span<const Image> images, const std::string& corruption,
                            const std::vector<int>& severities, std::uint64_t seed,
                            std::size_t bandwidth = kEnergyBandwidth);

struct AdvSpectrumOptions {
  // Skip images the model already gets wrong before the attack.
  bool exclude_misclassified = true;
  std::size_t chunk = 64;
};

struct AdvSpectrumResult {
  SpectralTemplate spectrum;
  std::size_t attacked = 0;
  std::size_t successes = 0;         // misclassified after the attack, nonzero delta
  std::size_t zero_delta = 0;        // misclassified with an all-zero delta (excluded)
  std::size_t skipped_misclassified = 0;
  double success_rate = 0.0;         // (successes + zero_delta) / attacked
  std::vector<PgdResult> attacks;    // one per attacked image, input order
  std::vector<std::size_t> indices;  // dataset index of each attack
};

// Chunk c attacks with seed derive_seed(pgd.seed, "adv-chunk", {c}). Throws
// "no successful perturbations" when nothing qualifies.
AdvSpectrumResult adv_perturbation_spectrum(const Network& model, std::span<const Image> images,
                                            std::span<const int> labels, const PgdConfig& pgd,
                                            const AdvSpectrumOptions& opt = {});

}  // namespace specrob
