#include "ccd/noise/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ccd/noise/ou.hpp"

namespace ccd::noise {
namespace {

double variance(std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

std::vector<double> chain(const OUParams& p, double dt, std::size_t steps) {
  OUProcess proc(p, dt);
  std::vector<double> x(steps);
  x[0] = proc.value();
  for (std::size_t k = 1; k < steps; ++k) x[k] = proc.advance();
  return x;
}

CheckItem within(std::string name, double value, double expected, double tol) {
  return {std::move(name), value, expected, tol, std::abs(value - expected) <= tol};
}

}  // namespace

bool SelfCheckReport::pass() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.pass; });
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n, std::size_t m) {
  const double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  const double sq = std::sqrt(ne);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double autocorrelation(std::span<const double> x, std::size_t lag) {
  if (lag >= x.size()) throw std::invalid_argument("autocorrelation: lag too large");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    den += (x[k] - mean) * (x[k] - mean);
    if (k + lag < x.size()) num += (x[k] - mean) * (x[k + lag] - mean);
  }
  return num / den;
}

double ar1_autocorrelation_stderr(double phi, std::size_t lag, std::size_t n) {
  const double p2 = phi * phi;
  const double p2k = std::pow(p2, static_cast<double>(lag));
  const double v = (1.0 + p2) * (1.0 - p2k) / (1.0 - p2) - 2.0 * static_cast<double>(lag) * p2k;
  return std::sqrt(std::max(v, 0.0) / static_cast<double>(n));
}

SelfCheckReport run_noise_selfcheck(std::uint64_t seed, std::size_t chain_steps) {
  SelfCheckReport rep;
  const double tau = 25.0;
  const double sigma = 1.0;

  // Long chain at dt = tau/10.
  const double dt = tau / 10.0;
  OUParams p{sigma, tau, derive_seed(seed, 0, 0)};
  const auto x = chain(p, dt, chain_steps);
  rep.items.push_back(within("stationary variance / sigma^2 (dt = tau/10)", variance(x) / (sigma * sigma), 1.0, 0.02));
  const double phi = std::exp(-dt / tau);
  for (std::size_t lag : {1u, 10u, 20u}) {
    const double expected = std::exp(-static_cast<double>(lag) * dt / tau);
    const double se = ar1_autocorrelation_stderr(phi, lag, x.size());
    rep.items.push_back(within("autocorrelation at lag " + std::to_string(lag) + " dt", autocorrelation(x, lag),
                               expected, 3.0 * se));
  }

  // Exact one-step marginals for a fixed start value.
  const double x0 = 0.7;
  const std::size_t n = 20000;
  for (double step : {tau / 100.0, tau, 10.0 * tau}) {
    std::mt19937_64 rng_a(derive_seed(seed, 1, static_cast<std::uint64_t>(step * 1000)));
    std::mt19937_64 rng_b(derive_seed(seed, 2, static_cast<std::uint64_t>(step * 1000)));
    std::normal_distribution<double> g;
    const double mean = x0 * std::exp(-step / tau);
    const double sd = sigma * std::sqrt(1.0 - std::exp(-2.0 * step / tau));
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = ou_step(x0, step, p, g(rng_a));
      b[k] = mean + sd * g(rng_b);
    }
    const double pv = ks_pvalue(ks_statistic(a, b), n, n);
    rep.items.push_back({"KS one-step marginal p-value, dt/tau = " + std::to_string(step / tau), pv, 1.0, 0.999,
                         pv > 1e-3});
  }

  // Grid halving: same statistics at dt/2 (lag doubled).
  OUParams ph{sigma, tau, derive_seed(seed, 3, 0)};
  const auto xh = chain(ph, dt / 2.0, chain_steps);
  rep.items.push_back(within("stationary variance / sigma^2 (dt = tau/20)", variance(xh) / (sigma * sigma), 1.0, 0.02));
  {
    const double r1 = autocorrelation(x, 10);
    const double r2 = autocorrelation(xh, 20);
    const double se = std::hypot(ar1_autocorrelation_stderr(phi, 10, x.size()),
                                 ar1_autocorrelation_stderr(std::exp(-dt / 2.0 / tau), 20, xh.size()));
    rep.items.push_back(within("lag-tau autocorrelation, dt vs dt/2", r2 - r1, 0.0, 3.0 * se));
  }

  // Ensemble of 2000 sampled trajectories on a 1 us grid.
  {
    const std::size_t realizations = 2000;
    std::vector<double> grid(101);
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = static_cast<double>(k);
    const std::size_t lag = 25;
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < realizations; ++r) {
      OUParams pr{sigma, tau, derive_seed(seed, 4, r)};
      const auto tr = sample_trajectory(grid, pr);
      for (std::size_t k = 0; k + lag < grid.size(); ++k) {
        num += tr.values[k] * tr.values[k + lag];
        den += 0.5 * (tr.values[k] * tr.values[k] + tr.values[k + lag] * tr.values[k + lag]);
      }
    }
    const double expected = std::exp(-1.0);
    rep.items.push_back(within("ensemble lag-25us autocorrelation (2000 trajectories)", num / den, expected,
                               0.05 * expected));
  }
  return rep;
}

}  // namespace ccd::noise
