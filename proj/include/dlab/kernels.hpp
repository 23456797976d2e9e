#pragma once

// Inner loops over complex coefficient arrays.
//
// Every kernel has a scalar reference implementation and, on x86-64 hosts
// with AVX2+FMA, a vectorized variant. The active table is chosen once at
// first use from the CPU features; setting LAB_SIMD=scalar forces the
// reference path. Elementwise kernels agree bit-for-bit across variants,
// reductions agree to rounding (summation order differs).

#include <complex>
#include <cstddef>
#include <string_view>

namespace dlab {

using cplx = std::complex<double>;

namespace kernels {

struct KernelTable {
  std::string_view name;
  // sum_i x[i] * conj(y[i])
  cplx (*cdotc)(const cplx* x, const cplx* y, std::size_t n);
  // sum_i |x[i]|^2
  double (*norm2sq)(const cplx* x, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
  // out[i] = x[i] * w[i]   (w real)
  void (*mul_real)(const cplx* x, const double* w, cplx* out, std::size_t n);
  // out[i] = x[i] * d[i]   (d complex)
  void (*mul_cplx)(const cplx* x, const cplx* d, cplx* out, std::size_t n);
  // sum_i g2[i] / (d[i] + mu)^2, the squared step norm of a diagonal
  // trust-region subproblem at multiplier mu
  double (*secular)(const double* d, const double* g2, double mu, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();
bool cpu_has_avx2();

// The table used by the library.
const KernelTable& active();

inline cplx cdotc(const cplx* x, const cplx* y, std::size_t n) { return active().cdotc(x, y, n); }
inline double norm2sq(const cplx* x, std::size_t n) { return active().norm2sq(x, n); }
inline void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) { active().axpy(a, x, y, n); }
inline void mul_real(const cplx* x, const double* w, cplx* out, std::size_t n) {
  active().mul_real(x, w, out, n);
}
inline void mul_cplx(const cplx* x, const cplx* d, cplx* out, std::size_t n) {
  active().mul_cplx(x, d, out, n);
}
inline double secular(const double* d, const double* g2, double mu, std::size_t n) {
  return active().secular(d, g2, mu, n);
}

}  // namespace kernels
}  // namespace dlab
