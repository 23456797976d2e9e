#include "dlab/operators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dlab {

double WeightProfile::at(int n) const {
  if (n >= table_start && n - table_start < static_cast<int>(table.size())) {
    return table[static_cast<std::size_t>(n - table_start)];
  }
  return n >= 0 ? pos : neg;
}

WeightProfile WeightProfile::reciprocal() const {
  validate();
  WeightProfile r{1.0 / pos, 1.0 / neg, table_start, table};
  for (auto& w : r.table) w = 1.0 / w;
  return r;
}

void WeightProfile::validate() const {
  auto ok = [](double w) { return w > 0.0 && std::isfinite(w); };
  if (!ok(pos) || !ok(neg) || !std::all_of(table.begin(), table.end(), ok)) {
    throw PreconditionError("shift weights must be positive and finite");
  }
}

OperatorSpec::OperatorSpec(ForwardShift v) : v_(std::move(v)) { std::get<ForwardShift>(v_).weights.validate(); }
OperatorSpec::OperatorSpec(BackwardShift v) : v_(std::move(v)) { std::get<BackwardShift>(v_).weights.validate(); }
OperatorSpec::OperatorSpec(Diagonal v) : v_(std::move(v)) {}
OperatorSpec::OperatorSpec(Scalar v) : v_(v) {}
OperatorSpec::OperatorSpec(Dense v) : v_(std::move(v)) {
  const auto& d = std::get<Dense>(v_);
  if (d.dim == 0 || d.data.size() != d.dim * d.dim) throw PreconditionError("dense operator must be a square matrix");
}
OperatorSpec::OperatorSpec(DirectSum v) : v_(std::move(v)) {
  const auto& s = std::get<DirectSum>(v_);
  if (s.components.empty()) throw PreconditionError("direct sum needs at least one component");
  for (const auto& c : s.components) {
    if (c.is<DirectSum>()) throw PreconditionError("nested direct sums are not supported; flatten them");
  }
}

std::size_t OperatorSpec::arity() const { return is<DirectSum>() ? as<DirectSum>().components.size() : 1; }

OperatorSpec forward_shift(double pos, double neg) { return ForwardShift{WeightProfile::two_sided(pos, neg)}; }
OperatorSpec forward_shift(double w) { return ForwardShift{WeightProfile::constant(w)}; }
OperatorSpec diagonal(std::vector<cplx> entries) { return Diagonal{std::move(entries)}; }
OperatorSpec scalar(cplx c) { return Scalar{c}; }
OperatorSpec direct_sum(std::vector<OperatorSpec> components) { return DirectSum{std::move(components)}; }

namespace {

using MatrixXcdR = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Product w_a * w_{a+1} * ... * w_{a+n-1}.
double run_product(const WeightProfile& w, int a, int n) {
  double p = 1.0;
  for (int m = a; m < a + n; ++m) p *= w.at(m);
  return p;
}

MatrixXcdR to_eigen(const Dense& d) {
  MatrixXcdR m(static_cast<Eigen::Index>(d.dim), static_cast<Eigen::Index>(d.dim));
  std::copy(d.data.begin(), d.data.end(), m.data());
  return m;
}

}  // namespace

PowerMap::PowerMap(const OperatorSpec& op, int n, const IndexWindow& window)
    : domain_(window), codomain_(window), power_(n) {
  if (n < 0) throw PreconditionError("power must be nonnegative");
  const std::size_t size = window.size();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ForwardShift>) {
          codomain_ = window.widened(n);
          offset_ = n;
          coeffs_.resize(size);
          for (std::size_t k = 0; k < size; ++k) {
            coeffs_[k] = run_product(v.weights, window.lo() + static_cast<int>(k), n);
          }
        } else if constexpr (std::is_same_v<T, BackwardShift>) {
          if (window.kind() == WindowKind::Bilateral) codomain_ = window.widened(n);
          offset_ = -n;
          coeffs_.resize(size);
          for (std::size_t k = 0; k < size; ++k) {
            const int j = window.lo() + static_cast<int>(k);
            // On N the backward shift annihilates e_0.
            const bool killed = window.kind() == WindowKind::Unilateral && j - n < 0;
            coeffs_[k] = killed ? 0.0 : run_product(v.weights, j - n, n);
          }
        } else if constexpr (std::is_same_v<T, Diagonal>) {
          if (v.entries.size() != size) {
            throw PreconditionError("diagonal has " + std::to_string(v.entries.size()) + " entries, window has " +
                                    std::to_string(size));
          }
          coeffs_.resize(size);
          for (std::size_t k = 0; k < size; ++k) coeffs_[k] = std::pow(v.entries[k], n);
          if (n == 0) std::fill(coeffs_.begin(), coeffs_.end(), cplx(1.0));
        } else if constexpr (std::is_same_v<T, Scalar>) {
          coeffs_.assign(size, n == 0 ? cplx(1.0) : std::pow(v.c, n));
        } else if constexpr (std::is_same_v<T, Dense>) {
          if (v.dim != size) {
            throw PreconditionError("dense operator of dimension " + std::to_string(v.dim) +
                                    " applied on window of size " + std::to_string(size));
          }
          monomial_ = false;
          const MatrixXcdR base = to_eigen(v);
          MatrixXcdR p = MatrixXcdR::Identity(base.rows(), base.cols());
          for (int i = 0; i < n; ++i) p = (p * base).eval();
          matrix_.assign(p.data(), p.data() + p.size());
          const Eigen::MatrixXcd gram = p.adjoint() * p;
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
          gram_values_.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
          const Eigen::MatrixXcd& q = es.eigenvectors();
          gram_vectors_.assign(q.data(), q.data() + q.size());
        } else {
          throw UnsupportedOperator("power map of a direct sum: use its components");
        }
      },
      op.variant());
}

ComplexVector PowerMap::image(const ComplexVector& z) const {
  if (!(z.window() == domain_)) throw WindowMismatch("power map applied off its domain window");
  ComplexVector out(codomain_);
  const std::size_t size = domain_.size();
  if (monomial_) {
    // Targets lo+k+offset below the codomain only occur with zero coefficients.
    const int first_target = domain_.lo() + offset_;
    const std::size_t skip = first_target < codomain_.lo() ? static_cast<std::size_t>(codomain_.lo() - first_target) : 0;
    if (skip >= size) return out;
    kernels::mul_cplx(z.coeffs().data() + skip, coeffs_.data() + skip,
                      out.coeffs().data() + codomain_.offset(first_target + static_cast<int>(skip)), size - skip);
    return out;
  }
  for (std::size_t r = 0; r < size; ++r) {
    cplx s = 0.0;
    for (std::size_t c = 0; c < size; ++c) s += matrix_[r * size + c] * z.coeffs()[c];
    out.coeffs()[r] = s;
  }
  return out;
}

ComplexVector PowerMap::adjoint_image(const ComplexVector& y) const {
  if (!(y.window() == codomain_)) throw WindowMismatch("adjoint applied off the codomain window");
  ComplexVector out(domain_);
  const std::size_t size = domain_.size();
  if (monomial_) {
    for (std::size_t k = 0; k < size; ++k) {
      const int target = domain_.lo() + static_cast<int>(k) + offset_;
      if (coeffs_[k] != cplx(0.0) && codomain_.contains(target)) out.coeffs()[k] = std::conj(coeffs_[k]) * y[target];
    }
    return out;
  }
  for (std::size_t c = 0; c < size; ++c) {
    cplx s = 0.0;
    for (std::size_t r = 0; r < size; ++r) s += std::conj(matrix_[r * size + c]) * y.coeffs()[r];
    out.coeffs()[c] = s;
  }
  return out;
}

ComplexVector power_apply(const OperatorSpec& op, int n, const ComplexVector& x) {
  if (n < 0) throw PreconditionError("power must be nonnegative");
  if (op.is<DirectSum>()) {
    if (op.arity() != 1) throw PreconditionError("direct sum applied to a single vector");
    return power_apply(op.as<DirectSum>().components.front(), n, x);
  }
  if (n == 0) return x;
  const PowerMap map(op, n, x.window());
  return map.image(x).restricted(x.window());
}

ProductVector power_apply(const OperatorSpec& op, int n, const ProductVector& x) {
  if (!op.is<DirectSum>()) {
    if (x.arity() != 1) throw PreconditionError("single operator applied to a direct-sum vector");
    return ProductVector({power_apply(op, n, x.part(0))});
  }
  const auto& comps = op.as<DirectSum>().components;
  if (comps.size() != x.arity()) {
    throw PreconditionError("direct sum of arity " + std::to_string(comps.size()) + " applied to vector of arity " +
                            std::to_string(x.arity()));
  }
  std::vector<ComplexVector> parts;
  parts.reserve(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) parts.push_back(power_apply(comps[i], n, x.part(i)));
  return ProductVector(std::move(parts));
}

ComplexVector apply(const OperatorSpec& op, const ComplexVector& x) { return power_apply(op, 1, x); }
ProductVector apply(const OperatorSpec& op, const ProductVector& x) { return power_apply(op, 1, x); }

OperatorSpec right_inverse(const OperatorSpec& op) {
  return std::visit(
      [](const auto& v) -> OperatorSpec {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ForwardShift>) {
          return BackwardShift{v.weights.reciprocal()};
        } else if constexpr (std::is_same_v<T, BackwardShift>) {
          return ForwardShift{v.weights.reciprocal()};
        } else if constexpr (std::is_same_v<T, Diagonal>) {
          Diagonal inv{v.entries};
          for (auto& d : inv.entries) {
            if (d == cplx(0.0)) throw PreconditionError("diagonal with a zero entry has no right inverse");
            d = 1.0 / d;
          }
          return inv;
        } else if constexpr (std::is_same_v<T, Scalar>) {
          if (v.c == cplx(0.0)) throw PreconditionError("zero scalar has no right inverse");
          return Scalar{1.0 / v.c};
        } else if constexpr (std::is_same_v<T, DirectSum>) {
          DirectSum s;
          for (const auto& c : v.components) s.components.push_back(right_inverse(c));
          return s;
        } else {
          throw UnsupportedOperator("right inverse is only available for shifts, diagonals and scalars");
        }
      },
      op.variant());
}

bool has_growth_bounds(const OperatorSpec& op) {
  return op.is<ForwardShift>() || op.is<BackwardShift>() || op.is<Diagonal>() || op.is<Scalar>();
}

namespace {

// Extremes of length-n weight-run products over start positions a >= min_start.
Growth shift_runs(const WeightProfile& w, int n, int min_start) {
  const int table_end = w.table_start + static_cast<int>(w.table.size());
  const int left = std::min(w.table_start, 0);
  const int right = std::max(table_end, 0);
  // Starts left of `left - n` or right of `right` see constant weights, so
  // one representative of each far regime suffices.
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (int a = std::max(left - n - 1, min_start); a <= std::max(right + 1, min_start); ++a) {
    const double p = run_product(w, a, n);
    hi = std::max(hi, p);
    lo = std::min(lo, p);
  }
  return {hi, lo};
}

}  // namespace

Growth growth(const OperatorSpec& op, int n, WindowKind kind) {
  if (n < 0) throw PreconditionError("power must be nonnegative");
  const int min_start = kind == WindowKind::Unilateral ? 0 : std::numeric_limits<int>::min() / 2;
  return std::visit(
      [&](const auto& v) -> Growth {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ForwardShift>) {
          if (n == 0) return {1.0, 1.0};
          return shift_runs(v.weights, n, min_start);
        } else if constexpr (std::is_same_v<T, BackwardShift>) {
          if (n == 0) return {1.0, 1.0};
          // B^n e_j carries the run starting at j - n; on N it kills e_0..e_{n-1}.
          Growth g = shift_runs(v.weights, n, min_start);
          if (kind == WindowKind::Unilateral) g.minmod_lower = 0.0;
          return g;
        } else if constexpr (std::is_same_v<T, Diagonal>) {
          if (v.entries.empty()) throw PreconditionError("empty diagonal");
          double hi = 0.0, lo = std::numeric_limits<double>::infinity();
          for (cplx d : v.entries) {
            hi = std::max(hi, std::abs(d));
            lo = std::min(lo, std::abs(d));
          }
          return {std::pow(hi, n), std::pow(lo, n)};
        } else if constexpr (std::is_same_v<T, Scalar>) {
          const double p = std::pow(std::abs(v.c), n);
          return {p, p};
        } else {
          throw UnsupportedOperator("no closed-form growth bounds for dense operators or direct sums");
        }
      },
      op.variant());
}

Dense as_dense(const OperatorSpec& op, const IndexWindow& window) {
  if (op.is<DirectSum>()) throw UnsupportedOperator("as_dense of a direct sum: use its components");
  const std::size_t size = window.size();
  Dense d{size, std::vector<cplx>(size * size)};
  for (std::size_t c = 0; c < size; ++c) {
    const ComplexVector col = apply(op, ComplexVector::basis(window, window.lo() + static_cast<int>(c)));
    for (std::size_t r = 0; r < size; ++r) d(r, c) = col.coeffs()[r];
  }
  return d;
}

bool power_fits_window(const OperatorSpec& op, int n, const ComplexVector& x) {
  const auto supp = x.support();
  if (supp.empty() || n == 0) return true;
  const IndexWindow& w = x.window();
  if (op.is<ForwardShift>()) return supp.back() + n <= w.hi();
  if (op.is<BackwardShift>()) return w.kind() == WindowKind::Unilateral || supp.front() - n >= w.lo();
  if (op.is<DirectSum>()) return op.arity() == 1 && power_fits_window(op.as<DirectSum>().components[0], n, x);
  return true;
}

void check_window_guard(const OperatorSpec& op, int n, const IndexWindow& window,
                        std::span<const ComplexVector> sources, std::span<const ComplexVector> targets) {
  if (!op.is_shift() || n == 0) return;
  const bool forward = op.is<ForwardShift>();
  const bool bilateral = window.kind() == WindowKind::Bilateral;
  auto fail = [&](const char* what, int index) {
    throw WindowGuardError(std::string(what) + " at index " + std::to_string(index) + " leaves window [" +
                           std::to_string(window.lo()) + ", " + std::to_string(window.hi()) + "] under power " +
                           std::to_string(n));
  };
  for (const auto& s : sources) {
    for (int j : s.support()) {
      if (forward && j + n > window.hi()) fail("source mass", j);
      if (!forward && bilateral && j - n < window.lo()) fail("source mass", j);
    }
  }
  for (const auto& t : targets) {
    for (int j : t.support()) {
      if (forward && bilateral && j - n < window.lo()) fail("target preimage", j);
      if (!forward && j + n > window.hi()) fail("target preimage", j);
    }
  }
}

}  // namespace dlab
