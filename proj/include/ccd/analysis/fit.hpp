#pragma once

// Decay envelopes and their fits.
//
//   gaussian     S(t) = exp(-b^2 t^2 / 2),  T2 = sqrt(2) / b
//   exponential  S(t) = exp(-g t),          T2 = 1 / g
//
// T2 is defined by S(T2) = 1/e. The amplitude is pinned to S(0) = 1.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ccd/evolution/engine.hpp"

namespace ccd::analysis {

enum class DecayModel { gaussian, exponential };
std::string to_string(DecayModel m);

/// Thrown when an envelope cannot be extracted or a fit does not converge.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Envelope {
  std::vector<double> t, s;
  /// Sample index the point was taken from (peak centre).
  std::vector<std::size_t> index;
  bool from_peaks = true;
};

/// Upper peaks of |v| refined by a three-point parabola. A boundary maximum
/// at the first sample counts as a peak. With fewer than three peaks a
/// series that never rises by more than `tolerance` above its running minimum
/// is used as is. The envelope is cut at the first point below floor[i]
/// (empty span: no cut); if fewer than three peaks survive the cut, the
/// samples before the first floor crossing are used when they fall
/// monotonically. Throws FitError otherwise.
Envelope extract_envelope(std::span<const double> t, std::span<const double> v, std::span<const double> floor = {},
                          double tolerance = 1e-9);

struct FitResult {
  DecayModel model = DecayModel::gaussian;
  /// b (rad/us) for gaussian, g (1/us) for exponential.
  double parameter = 0.0;
  double t2 = std::numeric_limits<double>::infinity();
  /// t2 is infinite: the data never decays; t2 >= lower bound.
  bool t2_infinite = true;
  double t2_lower_bound = 0.0;
  double residual_norm = 0.0;
  std::size_t points = 0;
  /// Bootstrap intervals (zero resamples: parameter CI collapses to the estimate).
  double confidence = 0.0;
  std::size_t resamples = 0;
  double parameter_low = 0.0, parameter_high = 0.0;
  double parameter_stderr = 0.0;
  double t2_low = 0.0, t2_high = 0.0;
};

double model_value(DecayModel m, double parameter, double t);
double t2_from_parameter(DecayModel m, double parameter);

/// Least squares over the single parameter (Brent on a bracket found by a
/// log grid). Throws FitError with fewer than 3 points or a minimum at the
/// upper end of the search range.
FitResult fit_decay(const Envelope& e, DecayModel m);

/// Envelope + fit of a plain series.
FitResult fit_envelope(std::span<const double> t, std::span<const double> v, DecayModel m);

struct BootstrapOptions {
  std::size_t resamples = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 1;
  /// Envelope cut at this many standard errors of the mean contrast.
  double floor_sigmas = 3.0;
};

/// Fit of an ensemble contrast series with a nonparametric bootstrap over
/// realizations (needs contrast_samples). Peak positions come from the full
/// mean; each resample re-evaluates the envelope at those peaks.
FitResult fit_ensemble(const evolution::EnsembleResult& r, DecayModel m, const BootstrapOptions& opt = {});

struct ModelSelection {
  FitResult gaussian, exponential;
  DecayModel best = DecayModel::gaussian;
  const FitResult& chosen() const { return best == DecayModel::gaussian ? gaussian : exponential; }
};

/// Both models on the same ensemble; the smaller residual wins.
ModelSelection select_model(const evolution::EnsembleResult& r, const BootstrapOptions& opt = {});

}  // namespace ccd::analysis
