// Compiled with -mavx2 -mfma; only reached when avx2_available() is true.

#include "ccd/evolution/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#endif

namespace ccd::evolution {

#if defined(__AVX2__) && defined(__FMA__)

namespace {

struct Vec3 {
  __m256d x, y, z;
};

inline Vec3 apply_mat(const Mat3& m, const Vec3& r) {
  auto row = [&](int i) {
    __m256d acc = _mm256_mul_pd(_mm256_set1_pd(m[3 * i]), r.x);
    acc = _mm256_fmadd_pd(_mm256_set1_pd(m[3 * i + 1]), r.y, acc);
    return _mm256_fmadd_pd(_mm256_set1_pd(m[3 * i + 2]), r.z, acc);
  };
  return {row(0), row(1), row(2)};
}

// Horner evaluation of sum coef[k] (-u)^k, matching rotation_series.
inline __m256d horner(const double* coef, __m256d u) {
  __m256d acc = _mm256_set1_pd(coef[9]);
  for (int k = 8; k >= 0; --k) acc = _mm256_fnmadd_pd(u, acc, _mm256_set1_pd(coef[k]));
  return acc;
}

struct Tables {
  double c[10], s[10], v[10];
  Tables() {
    double fact[23];
    fact[0] = 1.0;
    for (int n = 1; n < 23; ++n) fact[n] = fact[n - 1] * n;
    for (int k = 0; k < 10; ++k) {
      c[k] = 1.0 / fact[2 * k];
      s[k] = 1.0 / fact[2 * k + 1];
      v[k] = 1.0 / fact[2 * k + 2];
    }
  }
};
const Tables kTables;

}  // namespace

void step_avx2(BlochBatch& b, const StepCoefficients& c) {
  const std::size_t n = b.lanes;
  const std::size_t vec_end = n - n % 4;
  const double two_dt = 2.0 * c.dt;
  const __m256d k2dt = _mm256_set1_pd(two_dt);
  const __m256d k4dt2 = _mm256_set1_pd(two_dt * two_dt);
  const __m256d one = _mm256_set1_pd(1.0);

  for (std::size_t i = 0; i < vec_end; i += 4) {
    Vec3 r{_mm256_loadu_pd(&b.x[i]), _mm256_loadu_pd(&b.y[i]), _mm256_loadu_pd(&b.z[i])};
    const Vec3 r_in = r;
    if (c.damping) r = apply_mat(c.pre, r);
    __m256d hx = _mm256_set1_pd(c.h0[0]);
    __m256d hy = _mm256_set1_pd(c.h0[1]);
    __m256d hz = _mm256_set1_pd(c.h0[2]);
    for (int s = 0; s < c.slots; ++s) {
      const __m256d d = _mm256_loadu_pd(&b.noise[static_cast<std::size_t>(s) * n + i]);
      hx = _mm256_fmadd_pd(d, _mm256_set1_pd(c.hc[s][0]), hx);
      hy = _mm256_fmadd_pd(d, _mm256_set1_pd(c.hc[s][1]), hy);
      hz = _mm256_fmadd_pd(d, _mm256_set1_pd(c.hc[s][2]), hz);
    }
    if (c.magnus) {
      __m256d gx = _mm256_set1_pd(c.h0b[0]);
      __m256d gy = _mm256_set1_pd(c.h0b[1]);
      __m256d gz = _mm256_set1_pd(c.h0b[2]);
      for (int s = 0; s < c.slots; ++s) {
        const __m256d d = _mm256_loadu_pd(&b.noise[static_cast<std::size_t>(s) * n + i]);
        gx = _mm256_fmadd_pd(d, _mm256_set1_pd(c.hcb[s][0]), gx);
        gy = _mm256_fmadd_pd(d, _mm256_set1_pd(c.hcb[s][1]), gy);
        gz = _mm256_fmadd_pd(d, _mm256_set1_pd(c.hcb[s][2]), gz);
      }
      const __m256d half = _mm256_set1_pd(0.5);
      const __m256d k = _mm256_set1_pd(-kMagnusCross * c.dt);
      const __m256d xx = _mm256_fmsub_pd(hy, gz, _mm256_mul_pd(hz, gy));
      const __m256d xy = _mm256_fmsub_pd(hz, gx, _mm256_mul_pd(hx, gz));
      const __m256d xz = _mm256_fmsub_pd(hx, gy, _mm256_mul_pd(hy, gx));
      hx = _mm256_fmadd_pd(k, xx, _mm256_mul_pd(half, _mm256_add_pd(hx, gx)));
      hy = _mm256_fmadd_pd(k, xy, _mm256_mul_pd(half, _mm256_add_pd(hy, gy)));
      hz = _mm256_fmadd_pd(k, xz, _mm256_mul_pd(half, _mm256_add_pd(hz, gz)));
    }
    __m256d h2 = _mm256_mul_pd(hx, hx);
    h2 = _mm256_fmadd_pd(hy, hy, h2);
    h2 = _mm256_fmadd_pd(hz, hz, h2);
    const __m256d u = _mm256_mul_pd(k4dt2, h2);

    const __m256d cc = horner(kTables.c, u);
    const __m256d ks = _mm256_mul_pd(k2dt, horner(kTables.s, u));
    __m256d hr = _mm256_mul_pd(hx, r.x);
    hr = _mm256_fmadd_pd(hy, r.y, hr);
    hr = _mm256_fmadd_pd(hz, r.z, hr);
    const __m256d kv = _mm256_mul_pd(_mm256_mul_pd(k4dt2, horner(kTables.v, u)), hr);

    const __m256d cx = _mm256_fmsub_pd(hy, r.z, _mm256_mul_pd(hz, r.y));
    const __m256d cy = _mm256_fmsub_pd(hz, r.x, _mm256_mul_pd(hx, r.z));
    const __m256d cz = _mm256_fmsub_pd(hx, r.y, _mm256_mul_pd(hy, r.x));

    Vec3 o;
    o.x = _mm256_fmadd_pd(kv, hx, _mm256_fmadd_pd(ks, cx, _mm256_mul_pd(cc, r.x)));
    o.y = _mm256_fmadd_pd(kv, hy, _mm256_fmadd_pd(ks, cy, _mm256_mul_pd(cc, r.y)));
    o.z = _mm256_fmadd_pd(kv, hz, _mm256_fmadd_pd(ks, cz, _mm256_mul_pd(cc, r.z)));
    if (c.damping) o = apply_mat(c.post, o);
    _mm256_storeu_pd(&b.x[i], o.x);
    _mm256_storeu_pd(&b.y[i], o.y);
    _mm256_storeu_pd(&b.z[i], o.z);

    // Lanes outside the series domain are redone on the exact path.
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(u, one, _CMP_GT_OQ));
    if (mask) {
      alignas(32) double ox[4], oy[4], oz[4];
      _mm256_store_pd(ox, r_in.x);
      _mm256_store_pd(oy, r_in.y);
      _mm256_store_pd(oz, r_in.z);
      for (int l = 0; l < 4; ++l) {
        if (!(mask & (1 << l))) continue;
        BlochBatch one_lane(1, c.slots);
        one_lane.set_lane(0, {ox[l], oy[l], oz[l]});
        for (int s = 0; s < c.slots; ++s) one_lane.noise[s] = b.noise[static_cast<std::size_t>(s) * n + i + l];
        step_portable(one_lane, c);
        b.set_lane(i + l, one_lane.lane(0));
      }
    }
  }
  if (vec_end < n) {
    BlochBatch tail(n - vec_end, c.slots);
    for (std::size_t i = vec_end; i < n; ++i) {
      tail.set_lane(i - vec_end, b.lane(i));
      for (int s = 0; s < c.slots; ++s)
        tail.noise[static_cast<std::size_t>(s) * tail.lanes + (i - vec_end)] = b.noise[static_cast<std::size_t>(s) * n + i];
    }
    step_portable(tail, c);
    for (std::size_t i = vec_end; i < n; ++i) b.set_lane(i, tail.lane(i - vec_end));
  }
}

#else

void step_avx2(BlochBatch& b, const StepCoefficients& c) { step_portable(b, c); }

#endif

}  // namespace ccd::evolution
