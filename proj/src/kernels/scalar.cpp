#include "dlab/kernels.hpp"

namespace dlab::kernels {
namespace {

cplx cdotc_scalar(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xi * yr - xr * yi;
  }
  return {re, im};
}

double norm2sq_scalar(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

void axpy_scalar(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = cplx(y[i].real() + (ar * xr - ai * xi), y[i].imag() + (ar * xi + ai * xr));
  }
}

void mul_real_scalar(const cplx* x, const double* w, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = cplx(x[i].real() * w[i], x[i].imag() * w[i]);
}

void mul_cplx_scalar(const cplx* x, const cplx* d, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double dr = d[i].real(), di = d[i].imag();
    out[i] = cplx(xr * dr - xi * di, xi * dr + xr * di);
  }
}

double secular_scalar(const double* d, const double* g2, double mu, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = d[i] + mu;
    s += g2[i] / (t * t);
  }
  return s;
}

constexpr KernelTable kScalar{
    "scalar", cdotc_scalar, norm2sq_scalar, axpy_scalar, mul_real_scalar, mul_cplx_scalar, secular_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace dlab::kernels
