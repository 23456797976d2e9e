#include "dlab/hitsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dlab {

namespace {
// Feasible radius used by the inner solves, so that witnesses sit strictly
// inside their open source balls.
constexpr double kInteriorFactor = 1.0 - 1e-12;
}  // namespace

FixedAlphas unit_alphas(std::size_t k) { return FixedAlphas{std::vector<cplx>(k, cplx(1.0))}; }

const char* to_string(HitStatus s) {
  switch (s) {
    case HitStatus::Hit:
      return "hit";
    case HitStatus::MissCertified:
      return "miss_certified";
    case HitStatus::MissUncertain:
      return "miss_uncertain";
  }
  return "?";
}

const char* to_string(SeedKind s) {
  switch (s) {
    case SeedKind::Center:
      return "center";
    case SeedKind::Criterion:
      return "criterion";
    case SeedKind::User:
      return "user";
    case SeedKind::Refined:
      return "refined";
  }
  return "?";
}

void HitProblem::validate() const {
  const std::size_t k = components.size();
  if (k == 0) throw PreconditionError("hit problem needs at least one component");
  if (sources.arity() != k || targets.arity() != k) {
    throw PreconditionError("hit problem arity mismatch: " + std::to_string(k) + " components, " +
                            std::to_string(sources.arity()) + " sources, " + std::to_string(targets.arity()) +
                            " targets");
  }
  if (!(sources.window() == targets.window())) throw WindowMismatch("sources and targets live on different windows");
  if (n < 0) throw PreconditionError("power must be nonnegative");
  if (const auto* fixed = std::get_if<FixedAlphas>(&mode)) {
    if (fixed->alphas.size() != k) throw PreconditionError("fixed alpha tuple has the wrong arity");
    for (cplx a : fixed->alphas) {
      if (std::abs(a) == 0.0 || std::abs(a) > 1.0) throw PreconditionError("fixed alphas must satisfy 0 < |alpha| <= 1");
    }
  }
  for (const auto& c : components) {
    if (c.is<DirectSum>()) throw PreconditionError("hit problem components must not be direct sums");
  }
}

cplx best_alpha(const ComplexVector& w, const ComplexVector& v, double alpha_floor) {
  const double ww = norm(w);
  if (ww == 0.0) return 1.0;
  cplx a = inner(v, w) / (ww * ww);
  const double m = std::abs(a);
  if (m > 1.0) {
    // a / m can land one ulp outside the disk.
    a /= m;
    while (std::abs(a) > 1.0) a *= std::nextafter(1.0, 0.0);
    return a;
  }
  return m == 0.0 ? cplx(alpha_floor) : a;
}

LsqResult constrained_lsq(const PowerMap& a, cplx scale, const ComplexVector& center, double eps,
                          const ComplexVector& target, int max_iters) {
  if (!(eps > 0.0)) throw PreconditionError("constrained_lsq needs eps > 0");
  if (!(center.window() == a.domain())) throw WindowMismatch("center is not on the map's domain");
  const ComplexVector t = target.window() == a.codomain() ? target : target.embedded(a.codomain());
  const std::size_t size = a.domain().size();

  // r = t - A' u with A' = scale * A.
  ComplexVector r = t;
  {
    const ComplexVector au = a.image(center);
    kernels::axpy(-scale, au.coeffs().data(), r.coeffs().data(), r.size());
  }

  // Diagonalize A'^H A' = Q diag(d) Q^H; g = Q^H A'^H r.
  std::vector<double> d(size);
  std::vector<cplx> g(size);
  const double s2 = std::norm(scale);
  if (a.monomial()) {
    const auto c = a.coefficients();
    for (std::size_t k = 0; k < size; ++k) {
      const int target_index = a.domain().lo() + static_cast<int>(k) + a.offset();
      const cplx ck = scale * c[k];
      d[k] = std::norm(ck);
      g[k] = (c[k] != cplx(0.0) && a.codomain().contains(target_index)) ? std::conj(ck) * r[target_index] : 0.0;
    }
  } else {
    const ComplexVector ahr = a.adjoint_image(r);
    const auto q = a.gram_eigenvectors();
    const auto lam = a.gram_eigenvalues();
    for (std::size_t k = 0; k < size; ++k) {
      d[k] = std::max(0.0, s2 * lam[k]);
      cplx s = 0.0;
      for (std::size_t i = 0; i < size; ++i) s += std::conj(q[k * size + i]) * ahr.coeffs()[i];
      g[k] = std::conj(scale) * s;
    }
  }

  // Only directions with g != 0 move.
  std::vector<std::size_t> active;
  std::vector<double> dd, g2;
  double dmax = 0.0;
  for (std::size_t k = 0; k < size; ++k) dmax = std::max(dmax, d[k]);
  for (std::size_t k = 0; k < size; ++k) {
    if (g[k] != cplx(0.0)) {
      active.push_back(k);
      dd.push_back(d[k]);
      g2.push_back(std::norm(g[k]));
    }
  }

  LsqResult out{center};
  double mu = 0.0;
  bool unbounded = false;
  double free_norm2 = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (dd[i] <= 1e-14 * dmax || dd[i] == 0.0) {
      unbounded = true;
      break;
    }
    free_norm2 += g2[i] / (dd[i] * dd[i]);
  }
  if (!active.empty() && (unbounded || free_norm2 > eps * eps)) {
    // phi(mu) = ||h(mu)||^2 decreases in mu; phi(hi) <= eps^2.
    double gnorm2 = 0.0;
    for (double v : g2) gnorm2 += v;
    double lo = 0.0, hi = std::sqrt(gnorm2) / eps;
    int it = 0;
    out.converged = false;
    for (; it < max_iters; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) {
        out.converged = true;
        break;
      }
      if (kernels::secular(dd.data(), g2.data(), mid, dd.size()) > eps * eps) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    if (it == max_iters) out.converged = (hi - lo) <= 1e-12 * hi;
    out.iterations = it;
    mu = hi;
  }
  out.multiplier = mu;

  // h in eigen-coordinates, mapped back.
  std::vector<cplx> h(size, 0.0);
  for (std::size_t k : active) {
    const double denom = d[k] + mu;
    h[k] = denom > 0.0 ? g[k] / denom : 0.0;
  }
  if (a.monomial()) {
    kernels::axpy(1.0, h.data(), out.z.coeffs().data(), size);
  } else {
    const auto q = a.gram_eigenvectors();
    for (std::size_t k : active) {
      kernels::axpy(h[k], q.data() + k * size, out.z.coeffs().data(), size);
    }
  }
  // Feasibility can be lost to the last rounding step only.
  double step = distance(out.z, center);
  if (step > eps) {
    ComplexVector delta = out.z - center;
    delta *= eps / step;
    out.z = center + delta;
    step = distance(out.z, center);
  }

  // Residual and scaled KKT conditions.
  ComplexVector resid = a.image(out.z);
  resid *= scale;
  const ComplexVector image_scaled = resid;
  resid -= t;
  out.residual = norm(resid);
  ComplexVector grad = a.adjoint_image(resid);
  grad *= std::conj(scale);
  ComplexVector normal_term = a.adjoint_image(image_scaled);
  normal_term *= std::conj(scale);
  ComplexVector at = a.adjoint_image(t);
  at *= std::conj(scale);
  const ComplexVector displacement = out.z - center;
  ComplexVector stationarity = grad;
  kernels::axpy(mu, displacement.coeffs().data(), stationarity.coeffs().data(), size);
  const double grad_scale = norm(normal_term) + norm(at) + mu * step;
  const double stat = grad_scale > 0.0 ? norm(stationarity) / grad_scale : norm(stationarity);
  const double feas = std::max(0.0, step - eps) / eps;
  const double comp = mu > 0.0 ? std::abs(eps - step) / eps : 0.0;
  out.kkt_residual = std::max({stat, feas, comp});
  return out;
}

std::optional<double> certify_component(const OperatorSpec& op, int n, const Ball& source, const Ball& target,
                                        std::optional<cplx> fixed_alpha) {
  if (!has_growth_bounds(op)) return std::nullopt;
  const Growth g = growth(op, n, source.window().kind());
  const double u = norm(source.center());
  const double eps = source.radius();
  const double v = norm(target.center());
  const double delta = target.radius();
  double margin = -std::numeric_limits<double>::infinity();
  if (fixed_alpha) {
    const double a = std::abs(*fixed_alpha);
    if (u > eps) margin = std::max(margin, a * g.minmod_lower * (u - eps) - v - delta);
  }
  const double a_max = fixed_alpha ? std::abs(*fixed_alpha) : 1.0;
  margin = std::max(margin, v - delta - a_max * g.opnorm_upper * (u + eps));
  if (margin > 0.0 && std::isfinite(margin)) return margin;
  return std::nullopt;
}

std::optional<double> certify_miss(const HitProblem& p) {
  p.validate();
  const auto* fixed = std::get_if<FixedAlphas>(&p.mode);
  for (std::size_t i = 0; i < p.components.size(); ++i) {
    std::optional<cplx> a;
    if (fixed) a = fixed->alphas[i];
    if (auto m = certify_component(p.components[i], p.n, p.sources.part(i), p.targets.part(i), a)) return m;
  }
  return std::nullopt;
}

std::optional<CriterionSeed> criterion_seed(const OperatorSpec& op, int n, const Ball& source, const Ball& target,
                                            std::optional<cplx> fixed_alpha, double alpha_floor) {
  if (op.is<Dense>() || op.is<DirectSum>()) return std::nullopt;
  std::optional<OperatorSpec> s;
  try {
    s = right_inverse(op);
  } catch (const Error&) {
    return std::nullopt;
  }
  const ComplexVector& u = source.center();
  const ComplexVector sv = power_apply(*s, n, target.center());
  const double sv_norm = norm(sv);
  if (sv_norm == 0.0) return std::nullopt;
  cplx lambda;
  if (fixed_alpha) {
    lambda = *fixed_alpha;
  } else {
    const double tu = norm(PowerMap(op, n, u.window()).image(u));
    double l = tu > 0.0 ? std::sqrt(sv_norm / tu) : 1.0;
    l = l > 0.0 ? std::min(l, 1.0) : alpha_floor;
    lambda = l;
  }
  ComplexVector z = u;
  kernels::axpy(1.0 / lambda, sv.coeffs().data(), z.coeffs().data(), z.size());
  return CriterionSeed{std::move(z), lambda};
}

namespace {

struct Candidate {
  ComplexVector z;
  cplx alpha;
  SeedKind origin;
};

class ComponentSolver {
 public:
  ComponentSolver(const OperatorSpec& op, int n, const Ball& source, const Ball& target,
                  std::optional<cplx> fixed_alpha, const HitTolerances& tol)
      : map_(op, n, source.window()),
        source_(source),
        target_(target),
        target_ext_(target.center().embedded(map_.codomain())),
        fixed_(fixed_alpha),
        tol_(tol) {}

  double residual(const ComplexVector& z, cplx alpha) const {
    ComplexVector w = map_.image(z);
    w *= alpha;
    w -= target_ext_;
    return norm(w);
  }

  cplx alpha_for(const ComplexVector& z) const {
    if (fixed_) return *fixed_;
    return best_alpha(map_.image(z), target_ext_, tol_.alpha_floor);
  }

  bool is_hit(const ComplexVector& z, double res) const {
    return res < target_.radius() - tol_.residual_slack && source_.contains(z);
  }

  ComplexVector project(const ComplexVector& z) const {
    const double eps_in = source_.radius() * kInteriorFactor;
    const double dist = distance(z, source_.center());
    if (dist <= eps_in) return z;
    ComplexVector delta = z - source_.center();
    delta *= eps_in / dist;
    return source_.center() + delta;
  }

  // Alternating refinement; returns the best (residual, alpha, z).
  // `hit` is set when stop_at_first_hit ends the run early.
  Candidate refine(ComplexVector z, cplx alpha, double& best_res, bool& hit, ComponentOutcome& stats) const {
    const double eps_in = source_.radius() * kInteriorFactor;
    double res = residual(z, alpha);
    Candidate best{z, alpha, SeedKind::Refined};
    best_res = res;
    hit = false;
    for (int it = 0; it < tol_.max_iters; ++it) {
      if (tol_.stop_at_first_hit && is_hit(z, res)) {
        hit = true;
        return Candidate{z, alpha, SeedKind::Refined};
      }
      LsqResult lsq = constrained_lsq(map_, alpha, source_.center(), eps_in, target_ext_);
      stats.max_kkt = std::max(stats.max_kkt, lsq.kkt_residual);
      ++stats.inner_solves;
      z = std::move(lsq.z);
      alpha = alpha_for(z);
      const double next = residual(z, alpha);
      if (next < best_res) {
        best_res = next;
        best = Candidate{z, alpha, SeedKind::Refined};
      }
      const bool stalled = res - next < tol_.stall_eps;
      res = next;
      if (stalled) break;
    }
    hit = tol_.stop_at_first_hit && is_hit(best.z, best_res);
    return best;
  }

  const PowerMap& map() const { return map_; }

 private:
  PowerMap map_;
  const Ball& source_;
  const Ball& target_;
  ComplexVector target_ext_;
  std::optional<cplx> fixed_;
  const HitTolerances& tol_;
};

}  // namespace

ComponentOutcome solve_component(const OperatorSpec& op, int n, const Ball& source, const Ball& target,
                                 std::optional<cplx> fixed_alpha, const HitTolerances& tol,
                                 const std::vector<ComplexVector>& extra_seeds) {
  ComponentOutcome out;
  if (auto margin = certify_component(op, n, source, target, fixed_alpha)) {
    out.status = HitStatus::MissCertified;
    out.lower_bound = target.radius() + *margin;
    return out;
  }

  const ComponentSolver solver(op, n, source, target, fixed_alpha, tol);
  std::vector<Candidate> starts;
  starts.push_back({source.center(), solver.alpha_for(source.center()), SeedKind::Center});
  if (auto seed = criterion_seed(op, n, source, target, fixed_alpha, tol.alpha_floor)) {
    starts.push_back({std::move(seed->z), seed->alpha, SeedKind::Criterion});
  }
  for (const auto& s : extra_seeds) starts.push_back({s, solver.alpha_for(s), SeedKind::User});

  auto accept = [&](const Candidate& c, double res) {
    out.status = HitStatus::Hit;
    out.alpha = c.alpha;
    out.z = c.z;
    out.residual = res;
    out.origin = c.origin;
  };

  double best_res = std::numeric_limits<double>::infinity();
  Candidate best = starts.front();
  // As-is evaluation of every start.
  for (const auto& s : starts) {
    const double res = solver.residual(s.z, s.alpha);
    if (tol.stop_at_first_hit && solver.is_hit(s.z, res)) {
      accept(s, res);
      return out;
    }
    if (res < best_res && source.contains(s.z)) {
      best_res = res;
      best = s;
    }
  }

  // A criterion seed that left the ball is first repaired with its scalar
  // held, so witnesses keep the criterion's lambda whenever that works.
  if (starts.size() > 1 && starts[1].origin == SeedKind::Criterion && !source.contains(starts[1].z)) {
    const cplx lambda = starts[1].alpha;
    LsqResult lsq = constrained_lsq(solver.map(), lambda, source.center(), source.radius() * kInteriorFactor,
                                    target.center());
    out.max_kkt = std::max(out.max_kkt, lsq.kkt_residual);
    ++out.inner_solves;
    const double res = solver.residual(lsq.z, lambda);
    const Candidate repaired{std::move(lsq.z), lambda, SeedKind::Criterion};
    if (tol.stop_at_first_hit && solver.is_hit(repaired.z, res)) {
      accept(repaired, res);
      return out;
    }
    if (res < best_res) {
      best_res = res;
      best = repaired;
    }
  }

  // Refinement. Free-alpha problems also restart from the four unit phases.
  std::vector<Candidate> runs;
  for (const auto& s : starts) runs.push_back({solver.project(s.z), s.alpha, s.origin});
  if (!fixed_alpha) {
    for (cplx phase : {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)}) {
      runs.push_back({solver.project(source.center()), phase, SeedKind::Center});
    }
  }
  for (const auto& r : runs) {
    double res = 0.0;
    bool hit = false;
    Candidate c = solver.refine(r.z, r.alpha, res, hit, out);
    if (hit) {
      accept(c, res);
      return out;
    }
    if (res < best_res) {
      best_res = res;
      best = std::move(c);
    }
  }

  out.residual = best_res;
  out.alpha = best.alpha;
  out.z = best.z;
  out.origin = best.origin;
  if (!tol.stop_at_first_hit && solver.is_hit(best.z, best_res)) {
    out.status = HitStatus::Hit;
  } else {
    out.status = HitStatus::MissUncertain;
  }
  return out;
}

HitResult solve_hit(const HitProblem& p, const std::vector<ProductVector>& seeds) {
  p.validate();
  const std::size_t k = p.components.size();
  for (const auto& s : seeds) {
    if (s.arity() != k) throw PreconditionError("seed arity does not match the problem");
  }
  const auto* fixed = std::get_if<FixedAlphas>(&p.mode);
  HitResult result;
  result.components.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const ComplexVector& u = p.sources.part(i).center();
    const ComplexVector& v = p.targets.part(i).center();
    check_window_guard(p.components[i], p.n, p.sources.window(), std::span(&u, 1), std::span(&v, 1));
    std::vector<ComplexVector> extra;
    for (const auto& s : seeds) extra.push_back(s.part(i));
    std::optional<cplx> a;
    if (fixed) a = fixed->alphas[i];
    result.components.push_back(
        solve_component(p.components[i], p.n, p.sources.part(i), p.targets.part(i), a, p.tol, extra));
  }

  bool all_hit = true;
  for (const auto& c : result.components) {
    result.best_residual += c.residual;
    result.max_kkt = std::max(result.max_kkt, c.max_kkt);
    result.inner_solves += c.inner_solves;
    all_hit = all_hit && c.status == HitStatus::Hit;
  }
  for (const auto& c : result.components) {
    if (c.status == HitStatus::MissCertified) {
      result.status = HitStatus::MissCertified;
      result.lower_bound = c.lower_bound;
      return result;
    }
  }
  if (!all_hit) {
    result.status = HitStatus::MissUncertain;
    return result;
  }
  result.status = HitStatus::Hit;
  std::vector<cplx> alphas;
  std::vector<ComplexVector> zs;
  std::vector<double> residuals;
  std::vector<SeedKind> origins;
  for (const auto& c : result.components) {
    alphas.push_back(c.alpha);
    zs.push_back(*c.z);
    residuals.push_back(c.residual);
    origins.push_back(c.origin);
  }
  Witness w{p.n, std::move(alphas), ProductVector(std::move(zs)), std::move(residuals), std::move(origins)};
  result.witness = std::move(w);
  return result;
}

}  // namespace dlab
