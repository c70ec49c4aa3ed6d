#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ccd::noise {

struct CheckItem {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SelfCheckReport {
  std::vector<CheckItem> items;
  bool pass() const;
};

/// Two-sample Kolmogorov-Smirnov statistic D = sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic p-value of D for sample sizes n, m (Kolmogorov series with the
/// Stephens small-sample correction).
double ks_pvalue(double d, std::size_t n, std::size_t m);

/// Sample autocorrelation at integer lag (mean removed, biased normalisation).
double autocorrelation(std::span<const double> x, std::size_t lag);

/// Bartlett standard error of the lag-k autocorrelation estimate of an AR(1)
/// chain with coefficient phi and n samples.
double ar1_autocorrelation_stderr(double phi, std::size_t lag, std::size_t n);

/// Statistics of the OU generator: stationary variance, autocorrelation
/// decay, exact one-step marginals (KS against direct Gaussian sampling),
/// invariance under grid halving, and the pooled ensemble correlation at one
/// correlation time.
SelfCheckReport run_noise_selfcheck(std::uint64_t seed, std::size_t chain_steps = 1'000'000);

}  // namespace ccd::noise
