#pragma once

// Operator specifications on truncated sequence spaces.
//
// Shifts are described by their weight sequences, so powers are evaluated
// from weight products and norm bounds describe the operator on all of Z
// (or N), not its truncation.

#include <span>
#include <variant>
#include <vector>

#include "dlab/vectorspace.hpp"

namespace dlab {

/// Weight sequence w_n: `pos` for n >= 0, `neg` for n < 0, optionally
/// overridden on [table_start, table_start + table.size()).
struct WeightProfile {
  double pos = 1.0;
  double neg = 1.0;
  int table_start = 0;
  std::vector<double> table;

  static WeightProfile two_sided(double pos, double neg) { return {pos, neg, 0, {}}; }
  static WeightProfile constant(double w) { return {w, w, 0, {}}; }

  double at(int n) const;
  WeightProfile reciprocal() const;
  // Throws unless every weight is positive and finite.
  void validate() const;

  bool operator==(const WeightProfile&) const = default;
};

// e_n -> w_n e_{n+1}
struct ForwardShift {
  WeightProfile weights;
};

// e_n -> w_{n-1} e_{n-1}
struct BackwardShift {
  WeightProfile weights;
};

// e_j -> entries[j - lo] e_j on the window the operator is applied to.
struct Diagonal {
  std::vector<cplx> entries;
};

struct Scalar {
  cplx c;
};

// Square matrix acting on window coefficients, row-major.
struct Dense {
  std::size_t dim = 0;
  std::vector<cplx> data;

  cplx operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }
  cplx& operator()(std::size_t r, std::size_t c) { return data[r * dim + c]; }
};

class OperatorSpec;

struct DirectSum {
  std::vector<OperatorSpec> components;
};

class OperatorSpec {
 public:
  using Variant = std::variant<ForwardShift, BackwardShift, Diagonal, Scalar, Dense, DirectSum>;

  OperatorSpec(ForwardShift v);
  OperatorSpec(BackwardShift v);
  OperatorSpec(Diagonal v);
  OperatorSpec(Scalar v);
  OperatorSpec(Dense v);
  OperatorSpec(DirectSum v);

  const Variant& variant() const { return v_; }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(v_);
  }
  bool is_shift() const { return is<ForwardShift>() || is<BackwardShift>(); }
  // Number of direct-sum components (1 for non-sums).
  std::size_t arity() const;

 private:
  Variant v_;
};

// Convenience constructors.
OperatorSpec forward_shift(double pos, double neg);
OperatorSpec forward_shift(double w);
OperatorSpec diagonal(std::vector<cplx> entries);
OperatorSpec scalar(cplx c);
OperatorSpec direct_sum(std::vector<OperatorSpec> components);

// Applies the operator on the window; mass shifted outside is dropped.
ComplexVector apply(const OperatorSpec& op, const ComplexVector& x);
ProductVector apply(const OperatorSpec& op, const ProductVector& x);

// n-th power on the window (truncating). n = 0 is the identity.
ComplexVector power_apply(const OperatorSpec& op, int n, const ComplexVector& x);
ProductVector power_apply(const OperatorSpec& op, int n, const ProductVector& x);

// S with T S = identity (away from the window boundary). Defined for shifts
// with positive weights, diagonals with nonzero entries, nonzero scalars
// and direct sums of those.
OperatorSpec right_inverse(const OperatorSpec& op);

struct Growth {
  double opnorm_upper;  // ||T^n||
  double minmod_lower;  // inf ||T^n x|| over unit x
};

// Norm and minimum modulus of T^n for the untruncated operator on Z
// (Bilateral) or N (Unilateral). Diagonals use their window entries.
Growth growth(const OperatorSpec& op, int n, WindowKind kind = WindowKind::Bilateral);

// True when `op` has closed-form growth bounds.
bool has_growth_bounds(const OperatorSpec& op);

// Matrix of the truncated operator on `window`.
Dense as_dense(const OperatorSpec& op, const IndexWindow& window);

// True when T^n x keeps all of x's mass inside the window.
bool power_fits_window(const OperatorSpec& op, int n, const ComplexVector& x);

// Guard for horizon scans: throws WindowGuardError when T^n would push the
// source supports, or the right-inverse preimages of the target supports,
// across the window boundary.
void check_window_guard(const OperatorSpec& op, int n, const IndexWindow& window,
                        std::span<const ComplexVector> sources, std::span<const ComplexVector> targets);

/// T^n restricted to a window, mapped into a codomain window large enough
/// that nothing is truncated. Shift, diagonal and scalar powers are
/// monomial (e_j -> c_j e_{j+offset}); dense powers carry the matrix and
/// the eigendecomposition of its Gram matrix.
class PowerMap {
 public:
  PowerMap(const OperatorSpec& op, int n, const IndexWindow& window);

  const IndexWindow& domain() const { return domain_; }
  const IndexWindow& codomain() const { return codomain_; }
  int power() const { return power_; }
  bool monomial() const { return monomial_; }

  // Monomial data, indexed by domain storage offset.
  int offset() const { return offset_; }
  std::span<const cplx> coefficients() const { return coeffs_; }

  // Dense data: row-major matrix, Gram eigenvalues ascending and their
  // eigenvectors column-major.
  std::span<const cplx> matrix() const { return matrix_; }
  std::span<const double> gram_eigenvalues() const { return gram_values_; }
  std::span<const cplx> gram_eigenvectors() const { return gram_vectors_; }

  ComplexVector image(const ComplexVector& z) const;
  // A^H y for y on the codomain.
  ComplexVector adjoint_image(const ComplexVector& y) const;

 private:
  IndexWindow domain_;
  IndexWindow codomain_;
  int power_;
  bool monomial_ = true;
  int offset_ = 0;
  std::vector<cplx> coeffs_;
  std::vector<cplx> matrix_;
  std::vector<double> gram_values_;
  std::vector<cplx> gram_vectors_;
};

}  // namespace dlab
