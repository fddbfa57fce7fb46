#include <doctest.h>

#include <random>
#include <set>

#include "../support/oracles.hpp"
#include "specrob/analysis.hpp"
#include "specrob/corruptions.hpp"
#include "specrob/synthetic.hpp"

using namespace specrob;

TEST_SUITE("corruptions") {
  TEST_CASE("suite lists twelve named corruptions in four families") {
    const auto& suite = corruption_suite();
    CHECK(suite.size() == 12);
    std::set<CorruptionFamily> families;
    for (const auto& c : suite) {
      families.insert(c.family);
      CHECK(&corruption_info(c.name) == &c);
    }
    CHECK(families.size() == 4);
    CHECK_THROWS_AS(corruption_info("snow"), std::invalid_argument);
  }

  TEST_CASE("every corruption keeps shape and range and is reproducible") {
    std::mt19937_64 g(4);
    const Image x = oracle::random_image({3, 32, 32}, g);
    for (const auto& c : corruption_suite())
      for (int s = 1; s <= 5; ++s) {
        const CorruptionSpec spec{std::string(c.name), s, 99};
        const Image y = apply_corruption(x, spec);
        CHECK(y.shape() == x.shape());
        for (double v : y.values()) CHECK((v >= 0.0 && v <= 1.0));
        CHECK(apply_corruption(x, spec) == y);
        CHECK_MESSAGE(y != x, c.name << " severity " << s);
      }
    CHECK_THROWS(apply_corruption(x, {"contrast", 0, 1}));
    CHECK_THROWS(apply_corruption(x, {"contrast", 6, 1}));
  }

  TEST_CASE("neutral strength is the identity for deterministic corruptions") {
    std::mt19937_64 g(6);
    const Image x = oracle::random_image({3, 16, 16}, g);
    for (const auto& c : corruption_suite()) {
      if (c.stochastic) continue;
      const Image y = apply_corruption_strength(x, c.name, c.neutral, 1);
      CHECK_MESSAGE(oracle::max_abs_diff(x.values(), y.values()) < 1e-9, c.name);
    }
  }

  TEST_CASE("contrast scales deviations from the channel mean") {
    Image x({1, 2, 2}, 0.0);
    x.data() = {0.2, 0.4, 0.6, 0.8};
    const Image y = apply_corruption_strength(x, "contrast", 0.5, 0);
    const std::vector<double> expect{0.35, 0.45, 0.55, 0.65};
    CHECK(oracle::max_abs_diff(y.values(), expect) < 1e-12);
  }

  TEST_CASE("severity increases the delta for noise and blur corruptions on average") {
    SyntheticConfig cfg;
    cfg.count = 16;
    const Dataset d = make_synthetic(cfg);
    for (const auto& c : corruption_suite()) {
      if (c.family != CorruptionFamily::noise && c.family != CorruptionFamily::blur) continue;
      double first = 0.0, last = 0.0;
      for (std::size_t k = 0; k < d.size(); ++k) {
        first += l2_norm(apply_corruption(d.images[k], {std::string(c.name), 1, k}) - d.images[k]);
        last += l2_norm(apply_corruption(d.images[k], {std::string(c.name), 5, k}) - d.images[k]);
      }
      CHECK_MESSAGE(last > first, c.name);
    }
  }

  TEST_CASE("noise corruptions are high-frequency, fog and contrast are not") {
    SyntheticConfig cfg;
    cfg.count = 64;
    const Dataset d = make_synthetic(cfg);
    for (int s = 1; s <= 5; ++s) {
      const double g = mean_energy_fraction(d.images, "gaussian_noise", {s}, 5);
      CHECK(g > mean_energy_fraction(d.images, "contrast", {s}, 5));
      CHECK(g > mean_energy_fraction(d.images, "fog", {s}, 5));
    }
  }
}
