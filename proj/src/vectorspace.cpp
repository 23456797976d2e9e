#include "dlab/vectorspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dlab {

IndexWindow IndexWindow::unilateral(int hi) {
  if (hi < 0) throw PreconditionError("unilateral window needs hi >= 0");
  return IndexWindow(0, hi, WindowKind::Unilateral);
}

IndexWindow IndexWindow::bilateral(int half_width) {
  if (half_width < 0) throw PreconditionError("bilateral window needs M >= 0");
  return IndexWindow(-half_width, half_width, WindowKind::Bilateral);
}

IndexWindow IndexWindow::widened(int extra) const {
  if (kind_ == WindowKind::Unilateral) return unilateral(hi_ + extra);
  return bilateral(hi_ + extra);
}

double Rng::normal() {
  // Box-Muller; avoids implementation-defined std::normal_distribution.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ComplexVector::ComplexVector(IndexWindow window) : window_(window), coeffs_(window.size()) {}

ComplexVector::ComplexVector(IndexWindow window, std::vector<cplx> coeffs)
    : window_(window), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != window_.size()) {
    throw PreconditionError("coefficient count " + std::to_string(coeffs_.size()) + " does not match window size " +
                            std::to_string(window_.size()));
  }
}

ComplexVector ComplexVector::basis(IndexWindow window, int index, cplx value) {
  if (!window.contains(index)) throw PreconditionError("basis index " + std::to_string(index) + " outside window");
  ComplexVector v(window);
  v[index] = value;
  return v;
}

cplx ComplexVector::at(int index) const {
  if (!window_.contains(index)) throw PreconditionError("index " + std::to_string(index) + " outside window");
  return (*this)[index];
}

std::vector<int> ComplexVector::support() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] != cplx(0.0)) out.push_back(window_.lo() + static_cast<int>(i));
  }
  return out;
}

bool ComplexVector::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c == cplx(0.0); });
}

ComplexVector ComplexVector::embedded(const IndexWindow& larger) const {
  if (larger.lo() > window_.lo() || larger.hi() < window_.hi()) {
    throw WindowMismatch("embedding target does not contain the source window");
  }
  ComplexVector out(larger);
  std::copy(coeffs_.begin(), coeffs_.end(), out.coeffs_.begin() + static_cast<std::ptrdiff_t>(larger.offset(window_.lo())));
  return out;
}

ComplexVector ComplexVector::restricted(const IndexWindow& smaller) const {
  ComplexVector out(smaller);
  for (int j = std::max(smaller.lo(), window_.lo()); j <= std::min(smaller.hi(), window_.hi()); ++j) {
    out[j] = (*this)[j];
  }
  return out;
}

namespace {
void require_same_window(const ComplexVector& a, const ComplexVector& b) {
  if (!(a.window() == b.window())) throw WindowMismatch("vectors live on different windows");
}
}  // namespace

ComplexVector& ComplexVector::operator+=(const ComplexVector& other) {
  require_same_window(*this, other);
  kernels::axpy(1.0, other.coeffs_.data(), coeffs_.data(), coeffs_.size());
  return *this;
}

ComplexVector& ComplexVector::operator-=(const ComplexVector& other) {
  require_same_window(*this, other);
  kernels::axpy(-1.0, other.coeffs_.data(), coeffs_.data(), coeffs_.size());
  return *this;
}

ComplexVector& ComplexVector::operator*=(cplx s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

ComplexVector operator+(ComplexVector a, const ComplexVector& b) { return a += b; }
ComplexVector operator-(ComplexVector a, const ComplexVector& b) { return a -= b; }
ComplexVector operator*(cplx s, ComplexVector a) { return a *= s; }

ProductVector::ProductVector(std::vector<ComplexVector> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw PreconditionError("direct-sum vector needs at least one part");
  for (const auto& p : parts_) {
    if (!(p.window() == parts_.front().window())) throw WindowMismatch("direct-sum parts must share a window");
  }
}

cplx inner(const ComplexVector& x, const ComplexVector& y) {
  require_same_window(x, y);
  return kernels::cdotc(x.coeffs().data(), y.coeffs().data(), x.size());
}

double norm(const ComplexVector& x) { return std::sqrt(kernels::norm2sq(x.coeffs().data(), x.size())); }

double norm(const ProductVector& x) {
  double s = 0.0;
  for (const auto& p : x.parts()) s += norm(p);
  return s;
}

double distance(const ComplexVector& x, const ComplexVector& y) { return norm(x - y); }

Ball::Ball(ComplexVector center, double radius) : center_(std::move(center)), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw PreconditionError("ball radius must be positive and finite");
}

ProductBall::ProductBall(std::vector<Ball> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw PreconditionError("product ball needs at least one part");
  for (const auto& b : parts_) {
    if (!(b.window() == parts_.front().window())) throw WindowMismatch("product-ball centers must share a window");
  }
}

ComplexVector sample_finite_support(const IndexWindow& window, int support, double bound, Rng& rng) {
  return sample_finite_support(window, support, bound, rng, window.lo(), window.hi());
}

ComplexVector sample_finite_support(const IndexWindow& window, int support, double bound, Rng& rng, int index_lo,
                                    int index_hi) {
  index_lo = std::max(index_lo, window.lo());
  index_hi = std::min(index_hi, window.hi());
  if (support < 1) throw PreconditionError("support must be positive");
  if (!(bound > 0.0)) throw PreconditionError("coefficient bound must be positive");
  if (index_hi < index_lo || support > index_hi - index_lo + 1) {
    throw PreconditionError("support " + std::to_string(support) + " exceeds available indices");
  }
  // Partial Fisher-Yates over the candidate indices.
  std::vector<int> pool;
  for (int j = index_lo; j <= index_hi; ++j) pool.push_back(j);
  ComplexVector v(window);
  for (int s = 0; s < support; ++s) {
    const int pick = rng.uniform_int(s, static_cast<int>(pool.size()) - 1);
    std::swap(pool[static_cast<std::size_t>(s)], pool[static_cast<std::size_t>(pick)]);
    const double modulus = bound * (1.0 - rng.uniform());
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    v[pool[static_cast<std::size_t>(s)]] = std::polar(modulus, phase);
  }
  return v;
}

ComplexVector sample_ball(const Ball& b, Rng& rng) {
  const std::size_t n = b.center().size();
  std::vector<cplx> dir(n);
  double len2 = 0.0;
  while (len2 == 0.0) {
    for (auto& d : dir) d = cplx(rng.normal(), rng.normal());
    len2 = kernels::norm2sq(dir.data(), n);
  }
  const double rho = b.radius() * std::pow(rng.uniform(), 1.0 / (2.0 * static_cast<double>(n)));
  const cplx scale = rho / std::sqrt(len2);
  ComplexVector z = b.center();
  kernels::axpy(scale, dir.data(), z.coeffs().data(), n);
  // Rounding can land a boundary draw on the sphere; pull it inward.
  for (double shrink = 0.5; !b.contains(z); shrink *= 0.5) {
    z = b.center();
    kernels::axpy(scale * shrink, dir.data(), z.coeffs().data(), n);
  }
  return z;
}

int VectorSampler::index_lo() const {
  return window.kind() == WindowKind::Unilateral ? 0 : std::max(window.lo(), -span);
}

int VectorSampler::index_hi() const { return std::min(window.hi(), span); }

ComplexVector VectorSampler::sample(Rng& rng) const {
  const int available = index_hi() - index_lo() + 1;
  const int support = rng.uniform_int(1, std::min(max_support, available));
  return sample_finite_support(window, support, coeff_bound, rng, index_lo(), index_hi());
}

}  // namespace dlab
