#include "ccd/analysis/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "ccd/analysis/fit.hpp"

namespace ccd::analysis {

SpectralPeak dressed_rabi_frequency(std::span<const double> t, std::span<const double> v, double min_periods) {
  const std::size_t n = t.size();
  if (v.size() != n) throw std::invalid_argument("dressed_rabi_frequency: size mismatch");
  if (n < 16) throw FitError("spectrum needs at least 16 samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(t[i] - t[i - 1] - dt) > 1e-6 * dt) throw std::invalid_argument("dressed_rabi_frequency: uniform grid required");

  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  std::size_t m = 1;
  while (m < n) m <<= 1;
  m *= 8;
  std::vector<double> in(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    in[i] = w * (v[i] - mean);
  }
  const std::size_t bins = m / 2 + 1;
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), out, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::vector<double> mag(bins);
  for (std::size_t k = 0; k < bins; ++k) mag[k] = std::hypot(out[k][0], out[k][1]);
  fftw_destroy_plan(plan);
  fftw_free(out);

  // Skip the DC lobe of the Hann window (two unpadded bins).
  const std::size_t first = 2 * (m / n) + 1;
  if (first + 2 >= bins) throw FitError("spectrum: window too short");
  std::size_t peak = first;
  for (std::size_t k = first; k + 1 < bins; ++k)
    if (mag[k] > mag[peak]) peak = k;
  std::vector<double> band(mag.begin() + static_cast<std::ptrdiff_t>(first), mag.end());
  std::nth_element(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2), band.end());
  const double floor = band[band.size() / 2];

  double shift = 0.0;
  if (peak > first && mag[peak - 1] > 0.0 && mag[peak + 1] > 0.0) {
    const double a = std::log(mag[peak - 1]), b = std::log(mag[peak]), c = std::log(mag[peak + 1]);
    const double den = a - 2.0 * b + c;
    if (den < 0.0) shift = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  }
  SpectralPeak p;
  p.frequency_mhz = (static_cast<double>(peak) + shift) / (static_cast<double>(m) * dt);
  p.magnitude = mag[peak];
  p.noise_floor = floor;
  p.periods = p.frequency_mhz * dt * static_cast<double>(n - 1);
  if (!(p.magnitude >= 10.0 * floor)) throw FitError("spectrum: no peak above 10x the noise floor");
  if (p.periods < min_periods) throw FitError("spectrum: fewer periods in the window than required");
  return p;
}

}  // namespace ccd::analysis
