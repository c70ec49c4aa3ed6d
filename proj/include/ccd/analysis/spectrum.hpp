#pragma once

#include <span>

namespace ccd::analysis {

struct SpectralPeak {
  double frequency_mhz = 0.0;
  double magnitude = 0.0;
  /// Median periodogram magnitude over the searched band.
  double noise_floor = 0.0;
  /// frequency * window length
  double periods = 0.0;
};

/// Dominant nonzero frequency of a uniformly sampled series: mean removed,
/// Hann window, zero padding to 8x the next power of two, peak refined by a
/// parabola through the log magnitudes. Throws analysis::FitError when the
/// peak is below 10x the median floor or the window holds fewer than
/// `min_periods` periods.
SpectralPeak dressed_rabi_frequency(std::span<const double> t, std::span<const double> v, double min_periods = 8.0);

}  // namespace ccd::analysis
