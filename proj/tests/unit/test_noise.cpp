#include <cmath>
#include <sstream>

#include "ccd/noise/ou.hpp"
#include "ccd/noise/selfcheck.hpp"
#include "doctest.h"

using namespace ccd::noise;

TEST_CASE("ou_step closed forms") {
  OUParams p{0.0, 25.0, 1};
  CHECK(ou_step(2.0, 5.0, p, 0.7) == doctest::Approx(2.0 * std::exp(-0.2)));
  p.sigma = 1.5;
  // dt >> tau: memory is gone, output = sigma * g
  CHECK(ou_step(100.0, 1e4, p, 0.3) == doctest::Approx(1.5 * 0.3));
  CHECK_THROWS_AS(ou_step(0.0, 0.0, p, 0.0), std::invalid_argument);
  OUParams bad{-1.0, 1.0, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  OUParams bad_tau{1.0, 0.0, 0};
  CHECK_THROWS_AS(bad_tau.validate(), std::invalid_argument);
}

TEST_CASE("sample_trajectory") {
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(0.5 * i);
  SUBCASE("zero sigma") {
    const auto t = sample_trajectory(grid, {0.0, 10.0, 4});
    for (double v : t.values) CHECK(v == 0.0);
  }
  SUBCASE("determinism") {
    const auto a = sample_trajectory(grid, {0.2, 10.0, 4});
    const auto b = sample_trajectory(grid, {0.2, 10.0, 4});
    CHECK(a.values == b.values);
    const auto c = sample_trajectory(grid, {0.2, 10.0, 5});
    CHECK(a.values != c.values);
  }
  SUBCASE("streaming process matches the uniform-grid chain") {
    const OUParams p{0.2, 10.0, 9};
    const auto a = sample_trajectory(grid, p);
    OUProcess proc(p, 0.5);
    CHECK(proc.value() == a.values[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(proc.advance() == a.values[i]);
  }
  SUBCASE("bad grids") {
    CHECK_THROWS_AS(sample_trajectory(std::vector<double>{}, {0.1, 1.0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(sample_trajectory(std::vector<double>{0.0, 1.0, 1.0}, {0.1, 1.0, 0}), std::invalid_argument);
  }
  SUBCASE("csv dump") {
    std::ostringstream os;
    write_csv(os, sample_trajectory(std::vector<double>{0.0, 0.5}, {0.0, 1.0, 0}));
    CHECK(os.str().rfind("time_us,value\n", 0) == 0);
  }
}

TEST_CASE("seed derivation differs across channels and lanes") {
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
  CHECK(derive_seed(7, 3, 11) == derive_seed(7, 3, 11));
}

TEST_CASE("ks statistic oracle") {
  // Disjoint samples give D = 1; identical samples give D = 0.
  CHECK(ks_statistic({1, 2, 3}, {4, 5, 6}) == doctest::Approx(1.0));
  CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
  CHECK(ks_statistic({1, 2, 3, 4}, {3, 4, 5, 6}) == doctest::Approx(0.5));
  CHECK(ks_pvalue(0.0, 100, 100) == doctest::Approx(1.0));
  CHECK(ks_pvalue(0.5, 1000, 1000) < 1e-10);
}

TEST_CASE("ar1 autocorrelation stderr") {
  // Bartlett for AR(1): var r_k = [(1+phi^2)(1-phi^2k)/(1-phi^2) - 2k phi^2k]/n
  const double phi = 0.9, n = 1e6;
  const int k = 5;
  const double p2 = phi * phi, p2k = std::pow(phi, 2 * k);
  const double ref = std::sqrt(((1 + p2) * (1 - p2k) / (1 - p2) - 2 * k * p2k) / n);
  CHECK(ar1_autocorrelation_stderr(phi, k, static_cast<std::size_t>(n)) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("noise self-check passes") {
  const SelfCheckReport r = run_noise_selfcheck(20240601);
  for (const auto& item : r.items) {
    INFO(item.name << " value=" << item.value << " expected=" << item.expected << " tol=" << item.tolerance);
    CHECK(item.pass);
  }
  CHECK(r.pass());
}
