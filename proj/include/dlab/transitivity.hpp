#pragma once

// Horizon scans over n: junction sets (which (n, alpha) pairs hit),
// cross sets (which n hit for every component), and detectors that turn
// sampled scans into horizon-qualified verdicts.

#include <optional>
#include <string>
#include <vector>

#include "dlab/hitsolver.hpp"

namespace dlab {

struct JunctionEntry {
  int n = 0;
  HitStatus status = HitStatus::MissUncertain;
  std::vector<cplx> alphas;        // witness scalars (hits only)
  double residual = 0.0;           // witness or best residual
  double certified_margin = 0.0;   // lower_bound - target radius (certified misses)
  std::vector<SeedKind> origins;   // hits only
  std::optional<ProductVector> z;  // hits only
};

struct JunctionReport {
  int horizon = 0;
  std::vector<JunctionEntry> entries;  // one per n in [0, horizon]
  // Smallest N with a hit at every n in [N, horizon].
  std::optional<int> tail_start;

  std::vector<int> hit_times() const;
};

// Smallest N such that entries[N..] are all hits.
std::optional<int> compute_tail_start(const std::vector<JunctionEntry>& entries);

// Scans n = 0..horizon on the direct sum of `components`.
JunctionReport junction_scan(const std::vector<OperatorSpec>& components, const ProductBall& sources,
                             const ProductBall& targets, int horizon, const HitMode& mode,
                             const HitTolerances& tol = {});
JunctionReport junction_scan(const OperatorSpec& op, const Ball& source, const Ball& target, int horizon,
                             const HitMode& mode, const HitTolerances& tol = {});

struct CrossReport {
  int horizon = 0;
  std::vector<std::vector<int>> component_times;  // C_{T_i}(U_i, V_i) within [0, horizon]
  std::vector<int> intersection;
  std::vector<JunctionReport> component_reports;

  // Intersection restricted to n >= 1.
  std::vector<int> positive_intersection() const;
};

// Per-component disk-scaled scans, hit times intersected.
CrossReport cross_scan(const std::vector<OperatorSpec>& components, const ProductBall& sources,
                       const ProductBall& targets, int horizon, const HitTolerances& tol = {});

enum class VerdictKind { DiskTransitive, Compound, Mixing, KBitransitive };
enum class Outcome { ConfirmedUpToHorizon, RefutedWithCertificate, Inconclusive };

const char* to_string(VerdictKind k);
const char* to_string(Outcome o);
VerdictKind verdict_kind_from_string(const std::string& s);

/// Source/target ball sampler for detectors.
struct BallSampler {
  VectorSampler centers{};
  double source_radius = 0.5;
  double target_radius = 0.5;
};

struct TrialEvidence {
  ProductBall sources;
  ProductBall targets;
  bool satisfied = false;
  bool refuted = false;
  std::optional<int> tail_start;        // Compound / Mixing
  std::optional<int> refutation_start;  // first n of the certified tail
  std::vector<int> common_times;        // DiskTransitive / KBitransitive (n >= 1)
  JunctionReport joint;                 // the scan behind the trial
};

struct DetectOptions {
  double tail_fraction = 0.5;
  HitTolerances tol{};
};

struct Verdict {
  VerdictKind kind;
  Outcome outcome;
  int horizon = 0;
  std::vector<TrialEvidence> trials;
};

// Samples `trials` ball tuples and checks the property on each:
//   DiskTransitive: some hit at n in [1, horizon];
//   KBitransitive: nonempty cross-set intersection in [1, horizon];
//   Compound: disk-scaled tail_start <= horizon * tail_fraction;
//   Mixing: same with alpha fixed to 1.
// A trial is refuted when certified misses cover [n0, horizon] with
// nondecreasing margins (n0 <= horizon * tail_fraction for Compound/Mixing,
// n0 = 1 for the existential kinds). Any refuted trial refutes the kind;
// all trials satisfied confirms it; anything else is inconclusive.
Verdict detect(VerdictKind kind, const std::vector<OperatorSpec>& components, const BallSampler& sampler,
               int trials, int horizon, std::uint64_t seed, const DetectOptions& options = {});

// Evaluates one explicit trial (used by detect and by fixed scenarios).
TrialEvidence evaluate_trial(VerdictKind kind, const std::vector<OperatorSpec>& components,
                             const ProductBall& sources, const ProductBall& targets, int horizon,
                             const DetectOptions& options = {});

// Points alpha_j T^n x for n = 0..horizon and alpha_j on a grid of radii
// k/g (k = 1..g) times angles 2 pi m / g (m = 0..g-1), ordered by n, then
// radius, then angle.
struct OrbitPoint {
  int n;
  cplx alpha;
  ComplexVector point;
};
std::vector<OrbitPoint> disk_orbit_sample(const OperatorSpec& op, const ComplexVector& x, int horizon,
                                          int alpha_grid);

}  // namespace dlab
