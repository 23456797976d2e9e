// AVX2 variants. Compiled with -mavx2 -mfma; only called after a runtime
// CPU check. A __m256d holds two interleaved complex numbers [re0 im0 re1 im1].

#include <immintrin.h>

#include "dlab/kernels.hpp"

namespace dlab::kernels {
namespace {

inline const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

cplx cdotc_avx2(const cplx* x, const cplx* y, std::size_t n) {
  const double* xd = as_doubles(x);
  const double* yd = as_doubles(y);
  __m256d acc_re = _mm256_setzero_pd();  // [xr*yr, xi*yi, ...]
  __m256d acc_im = _mm256_setzero_pd();  // [xr*yi, xi*yr, ...]
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    const __m256d ys = _mm256_permute_pd(yv, 0b0101);
    acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
    acc_im = _mm256_fmadd_pd(xv, ys, acc_im);
  }
  alignas(32) double im_parts[4];
  _mm256_store_pd(im_parts, acc_im);
  double re = hsum(acc_re);
  double im = (im_parts[1] - im_parts[0]) + (im_parts[3] - im_parts[2]);
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xi * yr - xr * yi;
  }
  return {re, im};
}

double norm2sq_avx2(const cplx* x, std::size_t n) {
  const double* xd = as_doubles(x);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(xd + 2 * i);
    const __m256d b = _mm256_loadu_pd(xd + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

void axpy_avx2(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double* xd = as_doubles(x);
  double* yd = as_doubles(y);
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);
    // even lanes: ar*xr - ai*xi, odd lanes: ar*xi + ai*xr
    const __m256d prod = _mm256_addsub_pd(_mm256_mul_pd(ar, xv), _mm256_mul_pd(ai, xs));
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = cplx(y[i].real() + (a.real() * xr - a.imag() * xi), y[i].imag() + (a.real() * xi + a.imag() * xr));
  }
}

void mul_real_avx2(const cplx* x, const double* w, cplx* out, std::size_t n) {
  const double* xd = as_doubles(x);
  double* od = as_doubles(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d wv = _mm256_set_pd(w[i + 1], w[i + 1], w[i], w[i]);
    _mm256_storeu_pd(od + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(xd + 2 * i), wv));
  }
  for (; i < n; ++i) out[i] = cplx(x[i].real() * w[i], x[i].imag() * w[i]);
}

void mul_cplx_avx2(const cplx* x, const cplx* d, cplx* out, std::size_t n) {
  const double* xd = as_doubles(x);
  const double* dd = as_doubles(d);
  double* od = as_doubles(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d dv = _mm256_loadu_pd(dd + 2 * i);
    const __m256d dr = _mm256_movedup_pd(dv);            // [dr0 dr0 dr1 dr1]
    const __m256d di = _mm256_permute_pd(dv, 0b1111);    // [di0 di0 di1 di1]
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);    // [xi0 xr0 xi1 xr1]
    _mm256_storeu_pd(od + 2 * i, _mm256_addsub_pd(_mm256_mul_pd(xv, dr), _mm256_mul_pd(xs, di)));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double dr = d[i].real(), di = d[i].imag();
    out[i] = cplx(xr * dr - xi * di, xi * dr + xr * di);
  }
}

double secular_avx2(const double* d, const double* g2, double mu, std::size_t n) {
  const __m256d m = _mm256_set1_pd(mu);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_add_pd(_mm256_loadu_pd(d + i), m);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(g2 + i), _mm256_mul_pd(t, t)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double t = d[i] + mu;
    s += g2[i] / (t * t);
  }
  return s;
}

constexpr KernelTable kAvx2{
    "avx2", cdotc_avx2, norm2sq_avx2, axpy_avx2, mul_real_avx2, mul_cplx_avx2, secular_avx2,
};

}  // namespace

const KernelTable* avx2_table_impl() { return &kAvx2; }

}  // namespace dlab::kernels
