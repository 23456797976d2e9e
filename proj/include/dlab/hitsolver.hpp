#pragma once

// Decides, for one power n, whether T^n(a_1 U_1 + ... + a_k U_k) meets
// V_1 + ... + V_k, with the disk scalars a_i either free in the punctured
// closed unit disk or fixed.
//
// The solver is one-sided. A Hit carries a witness that re-verifies, a
// MissCertified carries an analytic lower bound valid for the untruncated
// operator, and MissUncertain only means the local search failed.

#include <optional>
#include <variant>
#include <vector>

#include "dlab/operators.hpp"

namespace dlab {

struct DiskScaled {};

struct FixedAlphas {
  std::vector<cplx> alphas;
};

using HitMode = std::variant<DiskScaled, FixedAlphas>;

FixedAlphas unit_alphas(std::size_t k);

struct HitTolerances {
  double residual_slack = 1e-9;  // hits need residual < radius - slack
  int max_iters = 200;           // alternating steps per start
  double stall_eps = 1e-12;      // stop when a step improves less than this
  double alpha_floor = 1e-12;    // stands in for an optimal alpha of exactly 0
  bool stop_at_first_hit = true;
};

// Which start produced a witness.
enum class SeedKind { Center, Criterion, User, Refined };

struct Witness {
  int n = 0;
  std::vector<cplx> alphas;
  ProductVector z;
  std::vector<double> residuals;
  std::vector<SeedKind> origins;
};

enum class HitStatus { Hit, MissCertified, MissUncertain };

const char* to_string(HitStatus s);
const char* to_string(SeedKind s);

struct ComponentOutcome {
  HitStatus status = HitStatus::MissUncertain;
  cplx alpha = 1.0;
  std::optional<ComplexVector> z;
  double residual = 0.0;       // best residual found (0 if certified before search)
  double lower_bound = 0.0;    // distance bound when certified
  SeedKind origin = SeedKind::Center;
  double max_kkt = 0.0;        // worst KKT residual over inner solves
  int inner_solves = 0;
};

struct HitResult {
  HitStatus status = HitStatus::MissUncertain;
  std::optional<Witness> witness;
  // MissCertified: lower bound on inf ||a T^n z - v|| over the source ball,
  // at least the target radius of the certified component.
  double lower_bound = 0.0;
  // Sum over components of the best residual found.
  double best_residual = 0.0;
  std::vector<ComponentOutcome> components;
  double max_kkt = 0.0;
  int inner_solves = 0;
};

struct HitProblem {
  std::vector<OperatorSpec> components;
  int n = 0;
  ProductBall sources;
  ProductBall targets;
  HitMode mode = DiskScaled{};
  HitTolerances tol{};

  void validate() const;
};

// argmin over |alpha| <= 1 of ||alpha w - v||: the unconstrained optimum
// projected radially onto the disk. Returns 1 for w = 0 and alpha_floor
// when the optimum is exactly 0.
cplx best_alpha(const ComplexVector& w, const ComplexVector& v, double alpha_floor = 1e-12);

struct LsqResult {
  ComplexVector z;
  double residual = 0.0;  // ||scale * A z - target||
  double multiplier = 0.0;
  // Scaled KKT violation: stationarity relative to the gradient scale,
  // primal feasibility and complementarity relative to eps.
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

// min ||scale * A z - target|| subject to ||z - center|| <= eps.
// `target` lives on A's codomain or domain window (embedded if needed).
LsqResult constrained_lsq(const PowerMap& a, cplx scale, const ComplexVector& center, double eps,
                          const ComplexVector& target, int max_iters = 200);

// Analytic miss certificate: a positive margin m such that
// inf ||a T^n z - v|| >= radius(V) + m over the closed source ball, for
// every component, or nullopt. Uses the minimum-modulus bound (fixed
// alpha) and the operator-norm bound (any |alpha| <= |fixed alpha|).
std::optional<double> certify_miss(const HitProblem& p);
std::optional<double> certify_component(const OperatorSpec& op, int n, const Ball& source, const Ball& target,
                                        std::optional<cplx> fixed_alpha);

// Criterion seed u + (1/lambda) S^n v with
// lambda = min(1, sqrt(||S^n v|| / ||T^n u||)) (fixed alpha: lambda = alpha).
// nullopt when T has no right inverse.
struct CriterionSeed {
  ComplexVector z;
  cplx alpha;
};
std::optional<CriterionSeed> criterion_seed(const OperatorSpec& op, int n, const Ball& source, const Ball& target,
                                            std::optional<cplx> fixed_alpha, double alpha_floor = 1e-12);

// Solves one problem. Starts: ball centers, then criterion seeds, then
// `seeds`. Every start is first checked as-is, and a criterion seed outside
// the source ball is projected back with its lambda held; then each start is
// refined by alternating best_alpha and constrained_lsq. The problem separates over
// direct-sum components; a joint hit needs every component to hit.
HitResult solve_hit(const HitProblem& p, const std::vector<ProductVector>& seeds = {});

// Single-component solve used by solve_hit.
ComponentOutcome solve_component(const OperatorSpec& op, int n, const Ball& source, const Ball& target,
                                 std::optional<cplx> fixed_alpha, const HitTolerances& tol,
                                 const std::vector<ComplexVector>& extra_seeds = {});

}  // namespace dlab
