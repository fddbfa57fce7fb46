#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "specrob/metrics.hpp"
#include "specrob/network.hpp"
#include "specrob/synthetic.hpp"

using namespace specrob;

namespace {

double table_mce(double oracle::TableRow::*column) {
  ErrorGrid f, f0;
  for (const auto& r : oracle::published_accuracy()) {
    f.push_back({1.0 - r.*column});
    f0.push_back({1.0 - r.natural});
  }
  return mce(f, f0);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("published table reproduces the published mCE values") {
    CHECK(std::abs(table_mce(&oracle::TableRow::autoaugment) - 0.6376) < 0.005);
    CHECK(std::abs(table_mce(&oracle::TableRow::gauss) - 0.9831) < 0.005);
    CHECK(std::abs(table_mce(&oracle::TableRow::adversarial) - 1.0825) < 0.005);
    CHECK(std::abs(table_mce(&oracle::TableRow::low_pass) - 0.8924) < 0.005);
    CHECK(std::abs(table_mce(&oracle::TableRow::high_pass) - 1.4449) < 0.005);
    CHECK(table_mce(&oracle::TableRow::natural) == 1.0);
  }

  TEST_CASE("mCE sums over severities before taking the ratio") {
    const ErrorGrid f{{0.1, 0.3}, {0.2, 0.2}};
    const ErrorGrid f0{{0.2, 0.2}, {0.1, 0.3}};
    CHECK(mce(f, f0) == doctest::Approx(1.0));
    const ErrorGrid g{{0.1, 0.1}, {0.4, 0.4}};
    CHECK(mce(g, f0) == doctest::Approx((0.2 / 0.4 + 0.8 / 0.4) / 2));
    CHECK_THROWS_AS(mce(f, ErrorGrid{{0.0, 0.0}, {0.1, 0.1}}), std::domain_error);
    CHECK_THROWS_AS(mce(f, ErrorGrid{{0.1}}), std::invalid_argument);
  }

  TEST_CASE("scatter fit recovers a line and reports RMS residual") {
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * v - 1.0);
    auto fit = scatter_fit(x, y);
    CHECK(fit.slope == doctest::Approx(3.0));
    CHECK(fit.intercept == doctest::Approx(-1.0));
    CHECK(fit.residual == doctest::Approx(0.0).epsilon(1e-12));
    y = {0.0, 1.0, 0.0, 1.0};
    fit = scatter_fit(x, y);
    // Residuals of the OLS line through (0.1,0),(0.2,1),(0.3,0),(0.4,1).
    const double slope = 2.0, intercept = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < 4; ++i) ss += std::pow(y[i] - (slope * x[i] + intercept), 2);
    CHECK(fit.slope == doctest::Approx(slope));
    CHECK(fit.residual == doctest::Approx(std::sqrt(ss / 4)));
    CHECK_THROWS(scatter_fit(std::vector<double>{1.0}, std::vector<double>{1.0}));
    CHECK_THROWS(scatter_fit(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 1.0}));
  }

  TEST_CASE("accuracy table is reproducible and independent of worker count") {
    SyntheticConfig sc;
    sc.count = 150;
    const Dataset d = make_synthetic(sc);
    const Network net(ArchSpec{Arch::linear}, 4);
    setenv("SPECROB_THREADS", "1", 1);
    const auto a = accuracy_table(net, d, {"gaussian_noise", "fog"}, {1, 3}, 8);
    setenv("SPECROB_THREADS", "4", 1);
    const auto b = accuracy_table(net, d, {"gaussian_noise", "fog"}, {1, 3}, 8);
    unsetenv("SPECROB_THREADS");
    REQUIRE(a.rows.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.rows[i].error == b.rows[i].error);
    CHECK(a.rows[0].corruption == "gaussian_noise");
    CHECK(a.rows[1].severity == 3);
    const double avg_g = 1.0 - (a.rows[0].error + a.rows[1].error) / 2;
    CHECK(a.severity_averaged_accuracy.at("gaussian_noise") == doctest::Approx(avg_g));
    CHECK(a.error_grid({"fog", "gaussian_noise"})[1][0] == a.rows[0].error);
    CHECK_THROWS(accuracy_table(net, d, {"snow"}, {1}, 0));
  }
}
