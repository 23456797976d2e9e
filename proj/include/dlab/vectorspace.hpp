#pragma once

// Truncated complex sequence spaces: vectors over a finite window of the
// index set (Z or N), direct-sum vectors, and open balls.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dlab/error.hpp"
#include "dlab/kernels.hpp"

namespace dlab {

enum class WindowKind { Unilateral, Bilateral };

/// Inclusive index range [lo, hi]: [0, M] for sequences on N, [-M, M] on Z.
class IndexWindow {
 public:
  static IndexWindow unilateral(int hi);
  static IndexWindow bilateral(int half_width);

  int lo() const { return lo_; }
  int hi() const { return hi_; }
  WindowKind kind() const { return kind_; }
  std::size_t size() const { return static_cast<std::size_t>(hi_ - lo_ + 1); }
  bool contains(int index) const { return index >= lo_ && index <= hi_; }
  std::size_t offset(int index) const { return static_cast<std::size_t>(index - lo_); }

  // Same kind, widened by `extra` indices on every side that exists.
  IndexWindow widened(int extra) const;

  bool operator==(const IndexWindow&) const = default;

 private:
  IndexWindow(int lo, int hi, WindowKind kind) : lo_(lo), hi_(hi), kind_(kind) {}
  int lo_;
  int hi_;
  WindowKind kind_;
};

/// Deterministic generator; all sampling draws from an explicit instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

class ComplexVector {
 public:
  explicit ComplexVector(IndexWindow window);
  ComplexVector(IndexWindow window, std::vector<cplx> coeffs);

  static ComplexVector zero(IndexWindow window) { return ComplexVector(window); }
  static ComplexVector basis(IndexWindow window, int index, cplx value = 1.0);

  const IndexWindow& window() const { return window_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const cplx> coeffs() const { return coeffs_; }
  std::span<cplx> coeffs() { return coeffs_; }

  // Coefficient at a sequence index (not a storage offset).
  cplx operator[](int index) const { return coeffs_[window_.offset(index)]; }
  cplx& operator[](int index) { return coeffs_[window_.offset(index)]; }
  cplx at(int index) const;

  // Indices with a nonzero coefficient, ascending.
  std::vector<int> support() const;
  bool is_zero() const;

  // Copy onto a window containing this one (zero-filled).
  ComplexVector embedded(const IndexWindow& larger) const;
  // Copy restricted to a smaller window (mass outside is dropped).
  ComplexVector restricted(const IndexWindow& smaller) const;

  ComplexVector& operator+=(const ComplexVector& other);
  ComplexVector& operator-=(const ComplexVector& other);
  ComplexVector& operator*=(cplx s);

  bool operator==(const ComplexVector& other) const {
    return window_ == other.window_ && coeffs_ == other.coeffs_;
  }

 private:
  IndexWindow window_;
  std::vector<cplx> coeffs_;
};

ComplexVector operator+(ComplexVector a, const ComplexVector& b);
ComplexVector operator-(ComplexVector a, const ComplexVector& b);
ComplexVector operator*(cplx s, ComplexVector a);

/// Element of a k-fold direct sum; all parts share one window.
class ProductVector {
 public:
  explicit ProductVector(std::vector<ComplexVector> parts);

  std::size_t arity() const { return parts_.size(); }
  const ComplexVector& part(std::size_t i) const { return parts_.at(i); }
  ComplexVector& part(std::size_t i) { return parts_.at(i); }
  const std::vector<ComplexVector>& parts() const { return parts_; }
  const IndexWindow& window() const { return parts_.front().window(); }

  bool operator==(const ProductVector&) const = default;

 private:
  std::vector<ComplexVector> parts_;
};

// Sesquilinear pairing, conjugate-linear in the second argument.
cplx inner(const ComplexVector& x, const ComplexVector& y);
double norm(const ComplexVector& x);
// Sum norm over the parts.
double norm(const ProductVector& x);
double distance(const ComplexVector& x, const ComplexVector& y);

/// Open ball B(center, radius), radius > 0.
class Ball {
 public:
  Ball(ComplexVector center, double radius);
  const ComplexVector& center() const { return center_; }
  double radius() const { return radius_; }
  const IndexWindow& window() const { return center_.window(); }
  bool contains(const ComplexVector& z) const { return distance(z, center_) < radius_; }

 private:
  ComplexVector center_;
  double radius_;
};

class ProductBall {
 public:
  explicit ProductBall(std::vector<Ball> parts);
  std::size_t arity() const { return parts_.size(); }
  const Ball& part(std::size_t i) const { return parts_.at(i); }
  const std::vector<Ball>& parts() const { return parts_; }
  const IndexWindow& window() const { return parts_.front().window(); }

 private:
  std::vector<Ball> parts_;
};

// `support` distinct indices drawn from [index_lo, index_hi] (clamped to the
// window), each coefficient with modulus in (0, bound] and uniform phase.
ComplexVector sample_finite_support(const IndexWindow& window, int support, double bound, Rng& rng);
ComplexVector sample_finite_support(const IndexWindow& window, int support, double bound, Rng& rng,
                                    int index_lo, int index_hi);

// Uniform point of the open ball (strictly inside).
ComplexVector sample_ball(const Ball& b, Rng& rng);

/// Stand-in for a dense subset: finitely supported vectors with at most
/// `max_support` coefficients on indices within `span` of the window origin.
struct VectorSampler {
  IndexWindow window = IndexWindow::bilateral(64);
  int max_support = 3;
  double coeff_bound = 1.0;
  int span = 3;

  ComplexVector sample(Rng& rng) const;
  // Index range the samples can touch.
  int index_lo() const;
  int index_hi() const;
};

}  // namespace dlab
