#include "lab/run.hpp"

#include <chrono>
#include <ctime>
#include <ostream>

#include "dlab/transitivity.hpp"
#include "lab/scenarios.hpp"

namespace dlab::lab {

int exit_code_for(Outcome o) {
  switch (o) {
    case Outcome::ConfirmedUpToHorizon:
      return 0;
    case Outcome::RefutedWithCertificate:
      return 2;
    case Outcome::Inconclusive:
      return 3;
  }
  return 1;
}

VectorSampler sampler_from(const Fields& p, const std::string& key, VectorSampler fallback) {
  if (!p.has(key)) return fallback;
  const Fields s = p.child(key);
  fallback.max_support = s.integer("max_support", fallback.max_support);
  fallback.span = s.integer("span", fallback.span);
  fallback.coeff_bound = s.number("coeff_bound", fallback.coeff_bound);
  if (fallback.max_support < 1) s.fail("max_support", "must be at least 1");
  if (fallback.span < 0) s.fail("span", "must be nonnegative");
  if (!(fallback.coeff_bound > 0.0)) s.fail("coeff_bound", "must be positive");
  return fallback;
}

HitTolerances tolerances_from(const Fields& p) {
  HitTolerances tol;
  if (!p.has("tolerances")) return tol;
  const Fields t = p.child("tolerances");
  tol.residual_slack = t.number("residual_slack", tol.residual_slack);
  tol.max_iters = t.integer("max_iters", tol.max_iters);
  tol.stall_eps = t.number("stall_eps", tol.stall_eps);
  tol.alpha_floor = t.number("alpha_floor", tol.alpha_floor);
  tol.stop_at_first_hit = t.boolean("stop_at_first_hit", tol.stop_at_first_hit);
  return tol;
}

DetectOptions detect_options_from(const Fields& p) {
  DetectOptions o;
  o.tail_fraction = p.number("tail_fraction", o.tail_fraction);
  if (!(o.tail_fraction > 0.0 && o.tail_fraction <= 1.0)) p.fail("tail_fraction", "must lie in (0, 1]");
  o.tol = tolerances_from(p);
  return o;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

int horizon_of(const Fields& p, int fallback) {
  const int h = p.integer("horizon", fallback);
  if (h < 0) p.fail("horizon", "must be nonnegative");
  return h;
}

struct BallTuples {
  std::vector<OperatorSpec> components;
  ProductBall sources;
  ProductBall targets;
};

BallTuples ball_tuples(const Fields& p) {
  auto comps = p.ops("components");
  auto src = p.balls("sources");
  auto tgt = p.balls("targets");
  if (src.size() != comps.size()) p.fail("sources", "need one source ball per component");
  if (tgt.size() != comps.size()) p.fail("targets", "need one target ball per component");
  for (const auto& c : comps) {
    if (c.is<DirectSum>()) p.fail("components", "list the summands instead of a direct_sum operator");
  }
  return {std::move(comps), ProductBall(std::move(src)), ProductBall(std::move(tgt))};
}

RunOutput run_orbit(const LabConfig& cfg) {
  const Fields p = cfg.parameters();
  const OperatorSpec& op = p.op("operator");
  const ComplexVector x = p.vector("x");
  const int horizon = horizon_of(p, 20);
  const int grid = p.integer("alpha_grid", 4);
  const auto points = disk_orbit_sample(op, x, horizon, grid);

  RunOutput out;
  out.main.columns = {"n", "orbit_norm"};
  Table pts;
  pts.columns = {"n", "alpha_re", "alpha_im", "norm"};
  json norms = json::array();
  for (const auto& pt : points) {
    const double nrm = norm(pt.point);
    pts.rows.push_back({static_cast<long long>(pt.n), pt.alpha.real(), pt.alpha.imag(), nrm});
    if (pt.alpha == cplx(1.0)) {
      out.main.rows.push_back({static_cast<long long>(pt.n), nrm});
      norms.push_back(nrm);
    }
  }
  out.curves["points"] = std::move(pts);
  out.result = {{"horizon", horizon}, {"alpha_grid", grid}, {"points", points.size()}, {"orbit_norms", norms}};
  out.verdict = "computed";
  return out;
}

RunOutput run_hit(const LabConfig& cfg) {
  const Fields p = cfg.parameters();
  BallTuples bt = ball_tuples(p);
  const int n = p.integer("n");
  if (n < 0) p.fail("n", "must be nonnegative");
  HitMode mode = DiskScaled{};
  const std::string m = p.string("mode", "disk");
  if (m == "fixed") {
    FixedAlphas fa{p.has("alphas") ? p.complex_list("alphas") : unit_alphas(bt.components.size()).alphas};
    if (fa.alphas.size() != bt.components.size()) p.fail("alphas", "need one alpha per component");
    mode = std::move(fa);
  } else if (m != "disk") {
    p.fail("mode", "expected 'disk' or 'fixed'");
  }
  HitProblem prob{bt.components, n, bt.sources, bt.targets, mode, tolerances_from(p)};
  const HitResult r = solve_hit(prob);

  RunOutput out;
  out.verdict = to_string(r.status);
  out.exit_code = r.status == HitStatus::Hit ? 0 : r.status == HitStatus::MissCertified ? 2 : 3;
  out.result = {{"status", to_string(r.status)},
                {"best_residual", r.best_residual},
                {"lower_bound", r.lower_bound},
                {"max_kkt", r.max_kkt},
                {"inner_solves", r.inner_solves}};
  out.main.columns = {"component", "status", "abs_alpha", "residual"};
  for (std::size_t i = 0; i < r.components.size(); ++i) {
    const auto& c = r.components[i];
    out.main.rows.push_back({static_cast<long long>(i), std::string(to_string(c.status)), std::abs(c.alpha), c.residual});
  }
  if (r.witness) {
    json alphas = json::array();
    for (cplx a : r.witness->alphas) alphas.push_back(to_json(a));
    json origins = json::array();
    for (auto o : r.witness->origins) origins.push_back(to_string(o));
    out.result["witness"] = {{"n", r.witness->n},
                             {"alphas", alphas},
                             {"z", to_json(r.witness->z)},
                             {"residuals", r.witness->residuals},
                             {"origins", origins}};
  }
  return out;
}

RunOutput run_junction(const LabConfig& cfg) {
  const Fields p = cfg.parameters();
  BallTuples bt = ball_tuples(p);
  const int horizon = horizon_of(p, 40);
  const VerdictKind kind = [&] {
    try {
      return verdict_kind_from_string(p.string("kind", "compound"));
    } catch (const PreconditionError& e) {
      p.fail("kind", e.what());
    }
  }();
  if (kind == VerdictKind::KBitransitive) p.fail("kind", "use the cross experiment for k_bitransitive");
  const TrialEvidence ev = evaluate_trial(kind, bt.components, bt.sources, bt.targets, horizon, detect_options_from(p));
  const Outcome o = ev.refuted ? Outcome::RefutedWithCertificate
                    : ev.satisfied ? Outcome::ConfirmedUpToHorizon
                                   : Outcome::Inconclusive;
  RunOutput out;
  out.verdict = to_string(o);
  out.exit_code = exit_code_for(o);
  out.result = to_json(ev.joint);
  out.result["kind"] = to_string(kind);
  out.result["refutation_start"] = ev.refutation_start ? json(*ev.refutation_start) : json();
  out.main = junction_table(ev.joint, bt.components.size());
  return out;
}

RunOutput run_cross(const LabConfig& cfg) {
  const Fields p = cfg.parameters();
  BallTuples bt = ball_tuples(p);
  const int horizon = horizon_of(p, 40);
  const DetectOptions opts = detect_options_from(p);
  const CrossReport cr = cross_scan(bt.components, bt.sources, bt.targets, horizon, opts.tol);
  const TrialEvidence ev =
      evaluate_trial(VerdictKind::KBitransitive, bt.components, bt.sources, bt.targets, horizon, opts);
  const Outcome o = ev.refuted ? Outcome::RefutedWithCertificate
                    : ev.satisfied ? Outcome::ConfirmedUpToHorizon
                                   : Outcome::Inconclusive;
  RunOutput out;
  out.verdict = to_string(o);
  out.exit_code = exit_code_for(o);
  json comps = json::array();
  for (const auto& r : cr.component_reports) comps.push_back(to_json(r));
  out.result = {{"horizon", horizon},
                {"component_times", cr.component_times},
                {"intersection", cr.intersection},
                {"positive_intersection", cr.positive_intersection()},
                {"components", comps}};
  out.main = junction_table(ev.joint, bt.components.size());
  for (std::size_t i = 0; i < cr.component_reports.size(); ++i) {
    out.curves["component" + std::to_string(i + 1)] = junction_table(cr.component_reports[i], 1);
  }
  return out;
}

RunOutput run_detect(const LabConfig& cfg) {
  const Fields p = cfg.parameters();
  const VerdictKind kind = [&] {
    try {
      return verdict_kind_from_string(p.string("kind"));
    } catch (const PreconditionError& e) {
      p.fail("kind", e.what());
    }
  }();
  const auto comps = p.ops("components");
  const int trials = p.integer("trials", 20);
  const int horizon = horizon_of(p, 40);
  BallSampler bs;
  bs.centers = sampler_from(p, "sampler", VectorSampler{cfg.window(), 3, 1.0, 3});
  bs.source_radius = p.number("source_radius", 0.5);
  bs.target_radius = p.number("target_radius", 0.5);
  if (!(bs.source_radius > 0.0)) p.fail("source_radius", "must be positive");
  if (!(bs.target_radius > 0.0)) p.fail("target_radius", "must be positive");
  const Verdict v = detect(kind, comps, bs, trials, horizon, p.seed("seed", 1), detect_options_from(p));

  RunOutput out;
  out.verdict = to_string(v.outcome);
  out.exit_code = exit_code_for(v.outcome);
  out.main.columns = {"trial", "satisfied", "refuted", "tail_start", "refutation_start", "common_times"};
  json trials_json = json::array();
  for (std::size_t i = 0; i < v.trials.size(); ++i) {
    const auto& t = v.trials[i];
    auto opt = [](const std::optional<int>& o) { return o ? Cell(static_cast<long long>(*o)) : Cell(std::string()); };
    out.main.rows.push_back({static_cast<long long>(i), static_cast<long long>(t.satisfied),
                             static_cast<long long>(t.refuted), opt(t.tail_start), opt(t.refutation_start),
                             static_cast<long long>(t.common_times.size())});
    json sources = json::array(), targets = json::array();
    for (const auto& b : t.sources.parts()) sources.push_back({{"center", to_json(b.center())}, {"radius", b.radius()}});
    for (const auto& b : t.targets.parts()) targets.push_back({{"center", to_json(b.center())}, {"radius", b.radius()}});
    json jt = {{"sources", sources}, {"targets", targets}, {"satisfied", t.satisfied}, {"refuted", t.refuted},
               {"common_times", t.common_times}, {"scan", to_json(t.joint)}};
    trials_json.push_back(std::move(jt));
    out.curves["trial" + std::to_string(i)] = junction_table(t.joint, comps.size());
  }
  out.result = {{"kind", to_string(kind)}, {"outcome", to_string(v.outcome)}, {"horizon", horizon},
                {"trials", trials_json}};
  return out;
}

ScalarTable lambda_table(const Fields& p, std::size_t arity, const std::vector<int>& nk) {
  ScalarTable table(arity);
  if (p.has("lambda_ratio")) {
    const auto ratios = p.complex_list("lambda_ratio");
    if (ratios.size() != arity) p.fail("lambda_ratio", "need one ratio per component");
    for (std::size_t i = 0; i < arity; ++i) {
      for (int n : nk) table[i].push_back(std::pow(ratios[i], n));
    }
    return table;
  }
  const json& rows = p.node()["lambdas"];
  if (!rows.is_array() || rows.size() != arity) p.fail("lambdas", "need one list per component");
  for (std::size_t i = 0; i < arity; ++i) {
    if (!rows[i].is_array() || rows[i].size() != nk.size()) p.fail("lambdas", "each list needs one value per n_k");
    for (const auto& v : rows[i]) {
      try {
        table[i].push_back(parse_complex(v));
      } catch (const std::invalid_argument& e) {
        p.fail("lambdas", e.what());
      }
    }
  }
  return table;
}

RunOutput run_criterion(const LabConfig& cfg) {
  const Fields p = cfg.parameters();
  const std::string check = p.string("check");
  CriterionData d;
  d.components = p.ops("components");
  if (p.has("smaps")) {
    d.smaps = p.ops("smaps");
  } else {
    try {
      for (const auto& t : d.components) d.smaps.push_back(right_inverse(t));
    } catch (const Error& e) {
      p.fail("components", std::string("no right inverse: ") + e.what());
    }
  }
  d.nk = p.has("nk") ? p.int_list("nk") : consecutive_times(horizon_of(p, 40));
  d.tol = p.number("tol", d.tol);
  d.sample_count = p.integer("samples", d.sample_count);
  d.seed = p.seed("seed", d.seed);
  d.xsampler = sampler_from(p, "xsampler", VectorSampler{cfg.window(), 3, 1.0, 1});
  d.ysampler = sampler_from(p, "ysampler", VectorSampler{cfg.window(), 3, 1.0, 1});
  if (p.has("lambdas") || p.has("lambda_ratio")) d.lambdas = {lambda_table(p, d.components.size(), d.nk)};

  RunOutput out;
  CriterionReport rep;
  if (check == "thm175") {
    if (d.lambdas.empty()) p.fail("lambdas", "thm175 needs lambdas or lambda_ratio");
    rep = check_thm175(d);
  } else if (check == "prop176") {
    rep = check_prop176(d);
  } else if (check == "compound_c1") {
    if (d.lambdas.empty()) p.fail("lambdas", "compound_c1 needs lambdas or lambda_ratio");
    rep = check_compound_c1(d);
  } else if (check == "compound_c2") {
    rep = check_compound_c2(d);
  } else if (check == "derive_scalars") {
    const double eps = p.number("eps");
    const std::string schedule = p.string("schedule", "fixed");
    if (schedule != "fixed" && schedule != "tightest") p.fail("schedule", "expected 'fixed' or 'tightest'");
    const DerivedScalars ds = derive_scalars(d, eps);
    d.lambdas = schedule == "fixed" ? ds.fixed : ds.tightest;
    rep = check_thm175(d);
    Table lam;
    lam.columns = {"sample", "component", "n_k", "abs_lambda"};
    for (std::size_t s = 0; s < d.lambdas.size(); ++s) {
      for (std::size_t i = 0; i < d.lambdas[s].size(); ++i) {
        for (std::size_t k = 0; k < d.nk.size(); ++k) {
          lam.rows.push_back({static_cast<long long>(s), static_cast<long long>(i),
                              static_cast<long long>(d.nk[k]), std::abs(d.lambdas[s][i][k])});
        }
      }
    }
    out.curves["lambda"] = std::move(lam);
    out.result["derived"] = {{"eps", eps}, {"schedule", schedule}, {"degenerate", ds.degenerate},
                             {"tail_start", ds.tail_start}};
  } else {
    p.fail("check", "unknown check '" + check + "'");
  }
  out.verdict = rep.pass() ? "pass" : "fail";
  out.exit_code = rep.pass() ? 0 : 2;
  out.result["check"] = check;
  out.result["report"] = to_json(rep);
  out.main = criterion_table(rep);
  return out;
}

}  // namespace

RunOutput execute(const LabConfig& cfg) {
  const std::string& e = cfg.experiment();
  try {
    if (e == "orbit") return run_orbit(cfg);
    if (e == "hit") return run_hit(cfg);
    if (e == "junction") return run_junction(cfg);
    if (e == "cross") return run_cross(cfg);
    if (e == "detect") return run_detect(cfg);
    if (e == "criterion") return run_criterion(cfg);
    return run_scenario(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const PreconditionError& err) {
    throw ConfigError(cfg.where("parameters"), "parameters", err.what());
  }
}

int run(const LabConfig& cfg, std::ostream& log) {
  const RunOutput out = execute(cfg);
  write_outputs(cfg, out, utc_timestamp());
  log << cfg.experiment() << ": " << out.verdict << "\n";
  return out.exit_code;
}

}  // namespace dlab::lab
