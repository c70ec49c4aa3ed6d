#include "ccd/analysis/fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/tools/minima.hpp>

namespace ccd::analysis {
namespace {

struct Point {
  double t, s;
};

// Vertex of the parabola through (t0,a0), (t1,a1), (t2,a2) around the middle sample.
Point refine_peak(double t0, double a0, double t1, double a1, double t2, double a2) {
  const double x1 = t0 - t1, x2 = t2 - t1;
  const double d = x1 * x2 * (x2 - x1);
  const double y1 = a0 - a1, y2 = a2 - a1;
  const double b = (y1 * x2 * x2 - y2 * x1 * x1) / d;
  const double c = (y2 * x1 - y1 * x2) / d;
  if (!(c < 0.0)) return {t1, a1};
  const double x = std::clamp(-b / (2.0 * c), x1, x2);
  return {t1 + x, a1 + b * x + c * x * x};
}

bool interior_peak(std::span<const double> a, std::size_t i) { return a[i] > a[i - 1] && a[i] >= a[i + 1]; }

double ssr(const Envelope& e, DecayModel m, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < e.t.size(); ++i) {
    const double r = e.s[i] - model_value(m, p, e.t[i]);
    s += r * r;
  }
  return s;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::string to_string(DecayModel m) { return m == DecayModel::gaussian ? "gaussian" : "exponential"; }

double model_value(DecayModel m, double p, double t) {
  return m == DecayModel::gaussian ? std::exp(-0.5 * p * p * t * t) : std::exp(-p * t);
}

double t2_from_parameter(DecayModel m, double p) {
  if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
  return m == DecayModel::gaussian ? std::sqrt(2.0) / p : 1.0 / p;
}

Envelope extract_envelope(std::span<const double> t, std::span<const double> v, std::span<const double> floor,
                          double tolerance) {
  const std::size_t n = t.size();
  if (v.size() != n) throw std::invalid_argument("extract_envelope: size mismatch");
  if (!floor.empty() && floor.size() != n) throw std::invalid_argument("extract_envelope: floor size mismatch");
  if (n < 3) throw FitError("envelope needs at least 3 samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("extract_envelope: times must increase");
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(v[i]);

  Envelope e;
  auto push = [&](double tt, double ss, std::size_t i) {
    e.t.push_back(tt);
    e.s.push_back(ss);
    e.index.push_back(i);
  };
  if (a[0] >= a[1]) push(t[0], a[0], 0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!interior_peak(a, i)) continue;
    const Point p = refine_peak(t[i - 1], a[i - 1], t[i], a[i], t[i + 1], a[i + 1]);
    push(p.t, p.s, i);
  }
  if (e.t.size() < 3) {
    double lowest = a[0];
    for (std::size_t i = 1; i < n; ++i) {
      if (a[i] > lowest + tolerance) throw FitError("envelope: fewer than 3 extrema and the series is not monotone");
      lowest = std::min(lowest, a[i]);
    }
    e = Envelope{};
    e.from_peaks = false;
    for (std::size_t i = 0; i < n; ++i) push(t[i], a[i], i);
  }
  if (!floor.empty()) {
    std::size_t keep = 0;
    while (keep < e.t.size() && e.s[keep] >= floor[e.index[keep]]) ++keep;
    e.t.resize(keep);
    e.s.resize(keep);
    e.index.resize(keep);
    // Decay faster than the peak spacing: use the samples before the floor
    // crossing when they fall monotonically.
    if (keep < 3 && e.from_peaks) {
      std::size_t end = 0;
      while (end < n && a[end] >= floor[end]) ++end;
      double lowest = a[0];
      bool monotone = end >= 3;
      for (std::size_t i = 1; i < end && monotone; ++i) {
        monotone = a[i] <= lowest + tolerance;
        lowest = std::min(lowest, a[i]);
      }
      if (monotone) {
        e = Envelope{};
        e.from_peaks = false;
        for (std::size_t i = 0; i < end; ++i) push(t[i], a[i], i);
      }
    }
  }
  return e;
}

namespace {

// Log grid over [lo, hi] plus p = 0, then Brent around the best node.
double minimize(const Envelope& e, DecayModel m, double lo, double hi, int grid) {
  std::vector<double> p(grid + 1);
  p[0] = 0.0;
  for (int k = 1; k <= grid; ++k) p[k] = lo * std::pow(hi / lo, static_cast<double>(k - 1) / (grid - 1));
  int best = 0;
  double best_v = ssr(e, m, 0.0);
  for (int k = 1; k <= grid; ++k) {
    const double val = ssr(e, m, p[k]);
    if (val < best_v) {
      best_v = val;
      best = k;
    }
  }
  if (best == grid) throw FitError("fit: minimum at the upper end of the search range");
  if (best == 0 && best_v == 0.0) return 0.0;
  const double a = best <= 1 ? 0.0 : p[best - 1];
  auto f = [&](double x) { return ssr(e, m, x); };
  const auto res = boost::math::tools::brent_find_minima(f, a, p[best + 1], std::numeric_limits<double>::digits / 2);
  return ssr(e, m, 0.0) <= res.second ? 0.0 : res.first;
}

void check_points(const Envelope& e, double& t_max, double& t_pos) {
  if (e.t.size() < 3) throw FitError("fit needs at least 3 envelope points");
  t_max = 0.0;
  t_pos = std::numeric_limits<double>::infinity();
  for (double t : e.t) {
    t_max = std::max(t_max, t);
    if (t > 0.0) t_pos = std::min(t_pos, t);
  }
  if (!(t_max > 0.0)) throw FitError("fit needs positive times");
}

FitResult make_result(const Envelope& e, DecayModel m, double est, double t_max) {
  FitResult r;
  r.model = m;
  r.points = e.t.size();
  r.parameter = est;
  r.t2 = t2_from_parameter(m, est);
  r.t2_infinite = !std::isfinite(r.t2);
  r.t2_lower_bound = t_max;
  r.residual_norm = std::sqrt(ssr(e, m, est));
  r.parameter_low = r.parameter_high = est;
  r.t2_low = r.t2_high = r.t2;
  return r;
}

}  // namespace

FitResult fit_decay(const Envelope& e, DecayModel m) {
  double t_max, t_pos;
  check_points(e, t_max, t_pos);
  const double est = minimize(e, m, 1e-4 / t_max, 50.0 / t_pos, 400);
  return make_result(e, m, est, t_max);
}

FitResult fit_envelope(std::span<const double> t, std::span<const double> v, DecayModel m) {
  FitResult r = fit_decay(extract_envelope(t, v), m);
  r.t2_lower_bound = t.back();
  return r;
}

FitResult fit_ensemble(const evolution::EnsembleResult& r, DecayModel m, const BootstrapOptions& opt) {
  const std::size_t nt = r.times.size(), n = r.realizations;
  std::vector<double> floor(nt);
  double tol = 1e-9;
  for (std::size_t i = 0; i < nt; ++i) {
    floor[i] = opt.floor_sigmas * r.contrast_stderr[i];
    tol = std::max(tol, floor[i]);
  }
  const Envelope env = extract_envelope(r.times, r.contrast, floor, tol);
  FitResult fit = fit_decay(env, m);
  fit.t2_lower_bound = r.times.back();
  if (opt.resamples == 0 || n < 2 || r.contrast_samples.size() != nt * n) return fit;

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> weight(n);
  auto mean_at = [&](std::size_t i) {
    const float* row = &r.contrast_samples[i * n];
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += weight[k] * row[k];
    return std::abs(s / static_cast<double>(n));
  };
  std::vector<double> params;
  params.reserve(opt.resamples);
  Envelope e = env;
  for (std::size_t b = 0; b < opt.resamples; ++b) {
    std::fill(weight.begin(), weight.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) weight[pick(rng)] += 1.0;
    for (std::size_t j = 0; j < env.t.size(); ++j) {
      const std::size_t i = env.index[j];
      if (env.from_peaks && i > 0 && i + 1 < nt) {
        const Point p = refine_peak(r.times[i - 1], mean_at(i - 1), r.times[i], mean_at(i), r.times[i + 1], mean_at(i + 1));
        e.t[j] = p.t;
        e.s[j] = p.s;
      } else {
        e.t[j] = r.times[i];
        e.s[j] = mean_at(i);
      }
    }
    try {
      const double est = fit.parameter > 0.0 ? minimize(e, m, fit.parameter / 4.0, fit.parameter * 4.0, 40)
                                             : fit_decay(e, m).parameter;
      params.push_back(est);
    } catch (const FitError&) {
      // resample without a usable minimum: it does not enter the interval
    }
  }
  if (params.size() < opt.resamples / 2) throw FitError("bootstrap: most resamples failed to fit");
  const double alpha = 0.5 * (1.0 - opt.confidence);
  fit.confidence = opt.confidence;
  fit.resamples = params.size();
  fit.parameter_low = quantile(params, alpha);
  fit.parameter_high = quantile(params, 1.0 - alpha);
  double mu = 0.0;
  for (double p : params) mu += p;
  mu /= static_cast<double>(params.size());
  double var = 0.0;
  for (double p : params) var += (p - mu) * (p - mu);
  fit.parameter_stderr = std::sqrt(var / static_cast<double>(params.size() - 1));
  fit.t2_low = t2_from_parameter(m, fit.parameter_high);
  fit.t2_high = t2_from_parameter(m, fit.parameter_low);
  return fit;
}

ModelSelection select_model(const evolution::EnsembleResult& r, const BootstrapOptions& opt) {
  ModelSelection sel;
  bool g_ok = true, e_ok = true;
  std::string why;
  try {
    sel.gaussian = fit_ensemble(r, DecayModel::gaussian, opt);
  } catch (const FitError& e) {
    g_ok = false;
    why = e.what();
  }
  try {
    sel.exponential = fit_ensemble(r, DecayModel::exponential, opt);
  } catch (const FitError& e) {
    e_ok = false;
    why = e.what();
  }
  if (!g_ok && !e_ok) throw FitError(why);
  if (!e_ok)
    sel.best = DecayModel::gaussian;
  else if (!g_ok)
    sel.best = DecayModel::exponential;
  else
    sel.best = sel.gaussian.residual_norm <= sel.exponential.residual_norm ? DecayModel::gaussian
                                                                           : DecayModel::exponential;
  return sel;
}

}  // namespace ccd::analysis
