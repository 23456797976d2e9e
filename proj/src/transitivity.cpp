#include "dlab/transitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dlab/parallel.hpp"

namespace dlab {

std::vector<int> JunctionReport::hit_times() const {
  std::vector<int> out;
  for (const auto& e : entries) {
    if (e.status == HitStatus::Hit) out.push_back(e.n);
  }
  return out;
}

std::optional<int> compute_tail_start(const std::vector<JunctionEntry>& entries) {
  std::optional<int> start;
  for (auto it = entries.rbegin(); it != entries.rend() && it->status == HitStatus::Hit; ++it) start = it->n;
  return start;
}

std::vector<int> CrossReport::positive_intersection() const {
  std::vector<int> out;
  std::copy_if(intersection.begin(), intersection.end(), std::back_inserter(out), [](int n) { return n >= 1; });
  return out;
}

JunctionReport junction_scan(const std::vector<OperatorSpec>& components, const ProductBall& sources,
                             const ProductBall& targets, int horizon, const HitMode& mode,
                             const HitTolerances& tol) {
  if (horizon < 0) throw PreconditionError("horizon must be nonnegative");
  if (components.size() != sources.arity() || components.size() != targets.arity()) {
    throw PreconditionError("junction scan arity mismatch");
  }
  // The guard at the horizon covers every smaller n.
  for (std::size_t i = 0; i < components.size(); ++i) {
    const ComplexVector& u = sources.part(i).center();
    const ComplexVector& v = targets.part(i).center();
    check_window_guard(components[i], horizon, sources.window(), std::span(&u, 1), std::span(&v, 1));
  }
  JunctionReport report;
  report.horizon = horizon;
  report.entries.resize(static_cast<std::size_t>(horizon) + 1);
  parallel_for(report.entries.size(), [&](std::size_t idx) {
    HitProblem p{components, static_cast<int>(idx), sources, targets, mode, tol};
    const HitResult r = solve_hit(p);
    JunctionEntry& e = report.entries[idx];
    e.n = static_cast<int>(idx);
    e.status = r.status;
    e.residual = r.best_residual;
    if (r.status == HitStatus::Hit) {
      e.alphas = r.witness->alphas;
      e.origins = r.witness->origins;
      e.z = r.witness->z;
      e.residual = 0.0;
      for (double x : r.witness->residuals) e.residual += x;
    } else if (r.status == HitStatus::MissCertified) {
      for (std::size_t i = 0; i < r.components.size(); ++i) {
        if (r.components[i].status == HitStatus::MissCertified) {
          e.certified_margin = r.lower_bound - targets.part(i).radius();
          break;
        }
      }
    }
  });
  report.tail_start = compute_tail_start(report.entries);
  return report;
}

JunctionReport junction_scan(const OperatorSpec& op, const Ball& source, const Ball& target, int horizon,
                             const HitMode& mode, const HitTolerances& tol) {
  return junction_scan(std::vector<OperatorSpec>{op}, ProductBall({source}), ProductBall({target}), horizon, mode,
                       tol);
}

CrossReport cross_scan(const std::vector<OperatorSpec>& components, const ProductBall& sources,
                       const ProductBall& targets, int horizon, const HitTolerances& tol) {
  if (components.size() != sources.arity() || components.size() != targets.arity()) {
    throw PreconditionError("cross scan arity mismatch");
  }
  CrossReport report;
  report.horizon = horizon;
  for (std::size_t i = 0; i < components.size(); ++i) {
    report.component_reports.push_back(
        junction_scan(components[i], sources.part(i), targets.part(i), horizon, DiskScaled{}, tol));
    report.component_times.push_back(report.component_reports.back().hit_times());
  }
  report.intersection = report.component_times.front();
  for (std::size_t i = 1; i < report.component_times.size(); ++i) {
    std::vector<int> next;
    std::set_intersection(report.intersection.begin(), report.intersection.end(), report.component_times[i].begin(),
                          report.component_times[i].end(), std::back_inserter(next));
    report.intersection = std::move(next);
  }
  return report;
}

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::DiskTransitive:
      return "disk_transitive";
    case VerdictKind::Compound:
      return "compound";
    case VerdictKind::Mixing:
      return "mixing";
    case VerdictKind::KBitransitive:
      return "k_bitransitive";
  }
  return "?";
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::ConfirmedUpToHorizon:
      return "confirmed_up_to_horizon";
    case Outcome::RefutedWithCertificate:
      return "refuted_with_certificate";
    case Outcome::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

VerdictKind verdict_kind_from_string(const std::string& s) {
  for (auto k : {VerdictKind::DiskTransitive, VerdictKind::Compound, VerdictKind::Mixing, VerdictKind::KBitransitive}) {
    if (s == to_string(k)) return k;
  }
  throw PreconditionError("unknown verdict kind '" + s + "'");
}

namespace {

// First n0 >= min_start such that every entry in [n0, horizon] is a
// certified miss with nondecreasing margin.
std::optional<int> certified_tail(const std::vector<JunctionEntry>& entries, int min_start) {
  std::optional<int> start;
  for (int n = static_cast<int>(entries.size()) - 1; n >= min_start; --n) {
    const auto& e = entries[static_cast<std::size_t>(n)];
    if (e.status != HitStatus::MissCertified) break;
    if (start) {
      const double later = entries[static_cast<std::size_t>(n + 1)].certified_margin;
      if (later < e.certified_margin - 1e-12 * std::abs(e.certified_margin)) break;
    }
    start = n;
  }
  return start;
}

int tail_limit(int horizon, double tail_fraction) {
  return static_cast<int>(std::floor(static_cast<double>(horizon) * tail_fraction));
}

}  // namespace

TrialEvidence evaluate_trial(VerdictKind kind, const std::vector<OperatorSpec>& components,
                             const ProductBall& sources, const ProductBall& targets, int horizon,
                             const DetectOptions& options) {
  TrialEvidence ev{sources, targets, false, false, {}, {}, {}, {}};
  const int limit = tail_limit(horizon, options.tail_fraction);
  switch (kind) {
    case VerdictKind::Compound:
    case VerdictKind::Mixing: {
      const HitMode mode = kind == VerdictKind::Mixing ? HitMode{unit_alphas(components.size())} : HitMode{DiskScaled{}};
      ev.joint = junction_scan(components, sources, targets, horizon, mode, options.tol);
      ev.tail_start = ev.joint.tail_start;
      ev.satisfied = ev.tail_start && *ev.tail_start <= limit;
      const auto cert = certified_tail(ev.joint.entries, 0);
      if (cert && *cert <= limit) {
        ev.refuted = true;
        ev.refutation_start = cert;
      }
      break;
    }
    case VerdictKind::DiskTransitive: {
      ev.joint = junction_scan(components, sources, targets, horizon, DiskScaled{}, options.tol);
      for (int n : ev.joint.hit_times()) {
        if (n >= 1) ev.common_times.push_back(n);
      }
      ev.satisfied = !ev.common_times.empty();
      const auto cert = certified_tail(ev.joint.entries, 1);
      if (cert && *cert == 1) {
        ev.refuted = true;
        ev.refutation_start = cert;
      }
      break;
    }
    case VerdictKind::KBitransitive: {
      const CrossReport cross = cross_scan(components, sources, targets, horizon, options.tol);
      ev.common_times = cross.positive_intersection();
      ev.satisfied = !ev.common_times.empty();
      for (const auto& rep : cross.component_reports) {
        const auto cert = certified_tail(rep.entries, 1);
        if (cert && *cert == 1) {
          ev.refuted = true;
          ev.refutation_start = cert;
          break;
        }
      }
      // Record the joint view so reports carry per-n detail.
      ev.joint.horizon = horizon;
      for (int n = 0; n <= horizon; ++n) {
        JunctionEntry e;
        e.n = n;
        const bool common = std::binary_search(cross.intersection.begin(), cross.intersection.end(), n);
        e.status = common ? HitStatus::Hit : HitStatus::MissUncertain;
        for (const auto& rep : cross.component_reports) {
          const auto& ce = rep.entries[static_cast<std::size_t>(n)];
          if (!common && ce.status == HitStatus::MissCertified) e.status = HitStatus::MissCertified;
          e.residual += ce.residual;
          if (common) e.alphas.push_back(ce.alphas.front());
        }
        ev.joint.entries.push_back(std::move(e));
      }
      ev.joint.tail_start = compute_tail_start(ev.joint.entries);
      break;
    }
  }
  return ev;
}

Verdict detect(VerdictKind kind, const std::vector<OperatorSpec>& components, const BallSampler& sampler,
               int trials, int horizon, std::uint64_t seed, const DetectOptions& options) {
  if (trials < 1) throw PreconditionError("detect needs at least one trial");
  if (components.empty()) throw PreconditionError("detect needs at least one component");
  Rng rng(seed);
  std::vector<std::pair<ProductBall, ProductBall>> tuples;
  for (int t = 0; t < trials; ++t) {
    std::vector<Ball> src, tgt;
    for (std::size_t i = 0; i < components.size(); ++i) src.emplace_back(sampler.centers.sample(rng), sampler.source_radius);
    for (std::size_t i = 0; i < components.size(); ++i) tgt.emplace_back(sampler.centers.sample(rng), sampler.target_radius);
    tuples.emplace_back(ProductBall(std::move(src)), ProductBall(std::move(tgt)));
  }
  std::vector<std::optional<TrialEvidence>> slots(tuples.size());
  parallel_for(tuples.size(), [&](std::size_t t) {
    slots[t] = evaluate_trial(kind, components, tuples[t].first, tuples[t].second, horizon, options);
  });

  Verdict v{kind, Outcome::Inconclusive, horizon, {}};
  bool all_satisfied = true;
  bool any_refuted = false;
  for (auto& s : slots) {
    all_satisfied = all_satisfied && s->satisfied;
    any_refuted = any_refuted || s->refuted;
    v.trials.push_back(std::move(*s));
  }
  if (any_refuted) {
    v.outcome = Outcome::RefutedWithCertificate;
  } else if (all_satisfied) {
    v.outcome = Outcome::ConfirmedUpToHorizon;
  }
  return v;
}

std::vector<OrbitPoint> disk_orbit_sample(const OperatorSpec& op, const ComplexVector& x, int horizon,
                                          int alpha_grid) {
  if (alpha_grid < 1) throw PreconditionError("alpha_grid must be at least 1");
  if (horizon < 0) throw PreconditionError("horizon must be nonnegative");
  if (!power_fits_window(op, horizon, x)) throw WindowGuardError("orbit leaves the window before the horizon");
  std::vector<OrbitPoint> out;
  ComplexVector y = x;
  for (int n = 0; n <= horizon; ++n) {
    if (n > 0) y = apply(op, y);
    for (int k = 1; k <= alpha_grid; ++k) {
      for (int m = 0; m < alpha_grid; ++m) {
        const cplx alpha = m == 0 ? cplx(static_cast<double>(k) / alpha_grid)
                                  : std::polar(static_cast<double>(k) / alpha_grid,
                                               2.0 * std::numbers::pi * m / alpha_grid);
        out.push_back({n, alpha, alpha * y});
      }
    }
  }
  return out;
}

}  // namespace dlab
