#include <cmath>
#include <stdexcept>

#include "ccd/evolution/kernels.hpp"

namespace ccd::evolution {
namespace {

// 1/(2k)!, 1/(2k+1)!, 1/(2k+2)! for k = 0..9.
struct SeriesTables {
  double c[10], s[10], v[10];
  SeriesTables() {
    double f = 1.0;  // running factorial
    double fact[23];
    fact[0] = 1.0;
    for (int n = 1; n < 23; ++n) fact[n] = (f *= n);
    for (int k = 0; k < 10; ++k) {
      c[k] = 1.0 / fact[2 * k];
      s[k] = 1.0 / fact[2 * k + 1];
      v[k] = 1.0 / fact[2 * k + 2];
    }
  }
};
const SeriesTables kSeries;

double horner(const double* coef, double u) {
  double acc = coef[9];
  for (int k = 8; k >= 0; --k) acc = coef[k] - u * acc;
  return acc;
}

}  // namespace

BlochBatch::BlochBatch(std::size_t n, int slots)
    : lanes(n), x(n, 0.0), y(n, 0.0), z(n, 0.0), noise(n * static_cast<std::size_t>(slots), 0.0) {}

void BlochBatch::set_lane(std::size_t i, const Bloch& r) {
  x[i] = r[0];
  y[i] = r[1];
  z[i] = r[2];
}

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::automatic: return "auto";
    case KernelKind::reference: return "reference";
    case KernelKind::portable: return "portable";
    case KernelKind::avx2: return "avx2";
  }
  return "?";
}

KernelKind parse_kernel(const std::string& s) {
  if (s == "auto") return KernelKind::automatic;
  if (s == "reference") return KernelKind::reference;
  if (s == "portable") return KernelKind::portable;
  if (s == "avx2") return KernelKind::avx2;
  throw std::invalid_argument("unknown kernel '" + s + "' (expected auto|reference|portable|avx2)");
}

RotationSeries rotation_series(double u) { return {horner(kSeries.c, u), horner(kSeries.s, u), horner(kSeries.v, u)}; }

Mat3 rotation_matrix(const std::array<double, 3>& h, double dt) {
  const double n = std::sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2]);
  if (n == 0.0) return mat3_identity();
  const double th = 2.0 * dt * n;
  const double c = std::cos(th), s = std::sin(th), v = 1.0 - c;
  const double a = h[0] / n, b = h[1] / n, d = h[2] / n;
  return {c + a * a * v,     a * b * v - d * s, a * d * v + b * s,
          b * a * v + d * s, c + b * b * v,     b * d * v - a * s,
          d * a * v - b * s, d * b * v + a * s, c + d * d * v};
}

std::array<double, 3> magnus_field(const std::array<double, 3>& h1, const std::array<double, 3>& h2, double dt) {
  const double k = kMagnusCross * dt;
  return {0.5 * (h1[0] + h2[0]) - k * (h1[1] * h2[2] - h1[2] * h2[1]),
          0.5 * (h1[1] + h2[1]) - k * (h1[2] * h2[0] - h1[0] * h2[2]),
          0.5 * (h1[2] + h2[2]) - k * (h1[0] * h2[1] - h1[1] * h2[0])};
}

Bloch rotate_exact(const Bloch& r, const std::array<double, 3>& h, double dt) {
  return mat3_apply(rotation_matrix(h, dt), r);
}

void step_portable(BlochBatch& b, const StepCoefficients& c) {
  const std::size_t n = b.lanes;
  const double dt = c.dt;
  const double two_dt = 2.0 * dt;
  for (std::size_t i = 0; i < n; ++i) {
    Bloch r{b.x[i], b.y[i], b.z[i]};
    if (c.damping) r = mat3_apply(c.pre, r);
    std::array<double, 3> h = c.h0;
    std::array<double, 3> h2 = c.h0b;
    for (int s = 0; s < c.slots; ++s) {
      const double d = b.noise[static_cast<std::size_t>(s) * n + i];
      for (int k = 0; k < 3; ++k) {
        h[k] += d * c.hc[s][k];
        h2[k] += d * c.hcb[s][k];
      }
    }
    if (c.magnus) h = magnus_field(h, h2, dt);
    const double u = two_dt * two_dt * (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]);
    if (u > 1.0) {
      r = rotate_exact(r, h, dt);
    } else {
      const RotationSeries rs = rotation_series(u);
      const double hr = h[0] * r[0] + h[1] * r[1] + h[2] * r[2];
      const double cx = h[1] * r[2] - h[2] * r[1];
      const double cy = h[2] * r[0] - h[0] * r[2];
      const double cz = h[0] * r[1] - h[1] * r[0];
      const double ks = two_dt * rs.s;
      const double kv = two_dt * two_dt * rs.v * hr;
      r = {rs.c * r[0] + ks * cx + kv * h[0], rs.c * r[1] + ks * cy + kv * h[1], rs.c * r[2] + ks * cz + kv * h[2]};
    }
    if (c.damping) r = mat3_apply(c.post, r);
    b.x[i] = r[0];
    b.y[i] = r[1];
    b.z[i] = r[2];
  }
}

}  // namespace ccd::evolution
