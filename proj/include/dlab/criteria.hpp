#pragma once

// Sampled checkers for the bitransitivity / compound criteria, the scalar
// derivation that turns the scalar-free form into the scalar form, and the
// constructive witnesses for the eigenvector and shift examples.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dlab/operators.hpp"

namespace dlab {

// [component][k] -> lambda at nk[k].
using ScalarTable = std::vector<std::vector<cplx>>;

struct CriterionData {
  std::vector<OperatorSpec> components;  // T_i
  std::vector<OperatorSpec> smaps;       // S_i
  VectorSampler xsampler{IndexWindow::bilateral(64), 3, 1.0, 1};
  VectorSampler ysampler{IndexWindow::bilateral(64), 3, 1.0, 1};
  std::vector<int> nk;
  // Empty: not provided. One table: shared by every sample. sample_count
  // tables: one per sample, in sampling order.
  std::vector<ScalarTable> lambdas;
  double tol = 1e-6;
  int sample_count = 25;
  std::uint64_t seed = 1;

  void validate() const;
  const ScalarTable* lambdas_for(int sample) const;
};

// nk = 1..horizon.
std::vector<int> consecutive_times(int horizon);

struct ConditionCurve {
  std::vector<double> values;  // worst sample at each nk
  bool pass = false;
};

struct CriterionSample {
  ProductVector x;
  ProductVector y;
  std::array<bool, 3> pass{};
};

struct CriterionReport {
  std::vector<int> nk;
  std::array<ConditionCurve, 3> conditions;
  std::vector<CriterionSample> witnesses;

  bool pass() const { return conditions[0].pass && conditions[1].pass && conditions[2].pass; }
};

// A finite sequence "tends to 0": last value below tol and no increase
// (beyond tol * 1e-6) over the last quarter.
bool tends_to_zero(const std::vector<double>& values, double tol);

// Draws sample_count pairs (x, y) of direct-sum vectors from the samplers.
std::vector<std::pair<ProductVector, ProductVector>> draw_samples(const CriterionData& data);

// Conditions: sum_i |lambda_i| ||T_i^n x_i||, sum_i ||S_i^n y_i|| / |lambda_i|,
// sum_i ||T_i^n S_i^n y_i - y_i||. Throws without lambdas.
CriterionReport check_thm175(const CriterionData& data);

// Conditions: sum_i ||T_i^n x_i|| ||S_i^n y_i||, sum_i ||S_i^n y_i||,
// sum_i ||T_i^n S_i^n y_i - y_i||. Lambdas are ignored.
CriterionReport check_prop176(const CriterionData& data);

struct DerivedScalars {
  double eps = 0.0;
  // lambda = ||S^n y|| / eps on the tail; capped at 1 before it.
  std::vector<ScalarTable> fixed;
  // lambda = ||S^n y|| / max(sqrt(||T^n x|| ||S^n y||), ||S^n y||).
  std::vector<ScalarTable> tightest;
  // [sample][component]: first k with ||S^{n_j} y|| <= eps for all j >= k.
  std::vector<std::vector<int>> tail_start;
  // Some ||S^n y|| vanished; lambda was set to the alpha floor there.
  bool degenerate = false;
};

// Samples as check_prop176 does (same seed, same order) and derives the
// scalar sequences. Throws if eps is not in (0, 1) or some ||S^n y|| stays
// above eps at the last nk.
DerivedScalars derive_scalars(const CriterionData& data, double eps, double alpha_floor = 1e-12);

// Same conditions as check_thm175 / check_prop176 along every n: nk must
// be 1..N. c1 additionally requires 0 < |lambda| <= 1.
CriterionReport check_compound_c1(const CriterionData& data);
CriterionReport check_compound_c2(const CriterionData& data);

struct EigenPair {
  cplx value;
  ComplexVector vector;
};

struct GSData {
  OperatorSpec diag;
  double p = 1.0;
  std::vector<EigenPair> small;  // |value| < p
  std::vector<EigenPair> large;  // |value| > p
  cplx c = 1.0;                  // p <= |c| < min |large value|

  void validate() const;
};

// Splits the entries of a diagonal operator on unilateral(size - 1) around p.
GSData build_gs_data(const std::vector<cplx>& entries, double p, cplx c);

struct GSWitness {
  int r = 0;
  std::vector<double> z_norm;          // ||z_n||, n = 0..horizon
  std::vector<double> image_residual;  // ||c^-n T^n (x + z_n) - y||
  ComplexVector x;
  ComplexVector y;
};

// x = sum a_i (small vectors), y = sum b_j (large vectors),
// z_n = sum b_j (c / lambda_j)^n y_j. Throws if no r <= horizon works.
GSWitness gs_witness(const GSData& g, const std::vector<cplx>& x_coeffs, const std::vector<cplx>& y_coeffs,
                     double eps, double delta, int horizon);

struct ShiftWitness {
  double lambda;
  ComplexVector z;
  double perturbation = 0.0;    // ||z - x||
  double image_residual = 0.0;  // ||lambda T^N z - y||
  double predicted = 0.0;       // sqrt(||T^N x|| ||B^N y||)
};

// T = forward shift with weight R1 on n >= 0 and R2 on n < 0, B its right
// inverse, lambda_N = sqrt(||B^N y|| / ||T^N x||), z = x + B^N y / lambda_N.
ShiftWitness example_shift_witness(double r1, double r2, const ComplexVector& x, const ComplexVector& y, int n);

}  // namespace dlab
