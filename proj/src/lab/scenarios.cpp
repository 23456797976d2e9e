#include "lab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dlab/parallel.hpp"
#include "lab/run.hpp"

namespace dlab::lab {

namespace {

struct Tally {
  bool failed = false;
  bool unsure = false;

  void require(bool ok) { failed = failed || !ok; }
  void expect(Outcome got, Outcome want) {
    if (got == want) return;
    if (got == Outcome::Inconclusive) {
      unsure = true;
    } else {
      failed = true;
    }
  }
  void finish(RunOutput& out) const {
    out.verdict = failed ? "fail" : unsure ? "inconclusive" : "pass";
    out.exit_code = failed ? 2 : unsure ? 3 : 0;
  }
};

json trials_json(const Verdict& v) {
  json trials = json::array();
  for (const auto& t : v.trials) {
    json jt = {{"satisfied", t.satisfied}, {"refuted", t.refuted}, {"common_times", t.common_times}};
    jt["tail_start"] = t.tail_start ? json(*t.tail_start) : json();
    jt["refutation_start"] = t.refutation_start ? json(*t.refutation_start) : json();
    trials.push_back(std::move(jt));
  }
  return {{"kind", to_string(v.kind)}, {"outcome", to_string(v.outcome)}, {"horizon", v.horizon}, {"trials", trials}};
}

Outcome trial_outcome(const TrialEvidence& ev) {
  if (ev.refuted) return Outcome::RefutedWithCertificate;
  return ev.satisfied ? Outcome::ConfirmedUpToHorizon : Outcome::Inconclusive;
}

Outcome merge(Outcome a, Outcome b) {
  if (a == Outcome::RefutedWithCertificate || b == Outcome::RefutedWithCertificate) {
    return Outcome::RefutedWithCertificate;
  }
  if (a == Outcome::Inconclusive || b == Outcome::Inconclusive) return Outcome::Inconclusive;
  return Outcome::ConfirmedUpToHorizon;
}

BallSampler ball_sampler(const Fields& p, const IndexWindow& window) {
  BallSampler bs;
  bs.centers = sampler_from(p, "sampler", VectorSampler{window, 3, 1.0, 3});
  bs.source_radius = p.number("source_radius", 0.5);
  bs.target_radius = p.number("target_radius", 0.5);
  return bs;
}

RunOutput example_compound_not_mixing(const LabConfig& cfg, const Fields& p) {
  const double r1 = p.number("r1", 2.0);
  const double r2 = p.number("r2", 3.0);
  if (!(1.0 < r1 && r1 < r2)) p.fail("r1", "the example needs 1 < r1 < r2");
  const int horizon = p.integer("horizon", 40);
  const double radius = p.number("radius", 0.5);
  const int trials = p.integer("trials", 10);
  const auto seed = p.seed("seed", 1);
  const DetectOptions opts = detect_options_from(p);
  const OperatorSpec t = forward_shift(r1, r2);
  const std::vector<OperatorSpec> comps{t};

  const Ball u(ComplexVector::basis(cfg.window(), 0), radius);
  const ProductBall uu({u}), vv({u});
  const TrialEvidence compound = evaluate_trial(VerdictKind::Compound, comps, uu, vv, horizon, opts);
  const TrialEvidence mixing = evaluate_trial(VerdictKind::Mixing, comps, uu, vv, horizon, opts);
  const BallSampler bs = ball_sampler(p, cfg.window());
  const Verdict dc = detect(VerdictKind::Compound, comps, bs, trials, horizon, seed, opts);
  const Verdict dm = detect(VerdictKind::Mixing, comps, bs, trials, horizon, seed, opts);

  const Outcome c = merge(trial_outcome(compound), dc.outcome);
  const Outcome m = merge(trial_outcome(mixing), dm.outcome);

  // Disk scalars on the fixed-ball tail against (||B^n e0|| / ||T^n e0||)^(1/2).
  Table lam;
  lam.columns = {"n", "abs_alpha", "predicted"};
  for (const auto& e : compound.joint.entries) {
    if (e.status != HitStatus::Hit) continue;
    const double predicted = std::pow(r1 * r2, -e.n / 2.0);
    lam.rows.push_back({static_cast<long long>(e.n), std::abs(e.alphas.front()), predicted});
  }

  RunOutput out;
  out.result = {{"compound", to_string(c)},
                {"mixing", to_string(m)},
                {"fixed_balls",
                 {{"compound", to_json(compound.joint)}, {"mixing", to_json(mixing.joint)}}},
                {"detect_compound", trials_json(dc)},
                {"detect_mixing", trials_json(dm)}};
  out.main = junction_table(compound.joint, 1);
  out.curves["mixing"] = junction_table(mixing.joint, 1);
  out.curves["lambda"] = std::move(lam);
  Tally tally;
  tally.expect(c, Outcome::ConfirmedUpToHorizon);
  tally.expect(m, Outcome::RefutedWithCertificate);
  tally.finish(out);
  return out;
}

std::vector<cplx> random_coeffs(std::size_t count, Rng& rng) {
  std::vector<cplx> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double mod = 1.0 - rng.uniform();
    out.push_back(std::polar(mod, 2.0 * std::numbers::pi * rng.uniform()));
  }
  return out;
}

double geometric_ratio_error(const GSData& g, const std::vector<cplx>& b, const GSWitness& w) {
  double expected = 0.0;
  for (std::size_t j = 0; j < g.large.size(); ++j) {
    if (b[j] != cplx(0.0)) expected = std::max(expected, std::abs(g.c / g.large[j].value));
  }
  const std::size_t last = w.z_norm.size() - 1;
  if (expected == 0.0 || last == 0) return 0.0;
  return std::abs(w.z_norm[last] / w.z_norm[last - 1] - expected);
}

RunOutput gs_diagonal(const Fields& p) {
  std::vector<cplx> entries{0.5, 2.0};
  if (p.has("entries")) entries = p.complex_list("entries");
  GSData g = [&] {
    try {
      return build_gs_data(entries, p.number("p", 1.0), p.has("c") ? p.complex("c") : cplx(1.5));
    } catch (const PreconditionError& e) {
      p.fail("entries", e.what());
    }
  }();
  const double eps = p.number("eps", 0.1);
  const double delta = p.number("delta", 0.1);
  const int horizon = p.integer("horizon", 60);
  const int pairs = p.integer("pairs", 0);
  const double ratio_tol = p.number("ratio_tol", 1e-10);
  std::vector<cplx> a(g.small.size(), 1.0), b(g.large.size(), 1.0);
  if (p.has("x_coeffs")) a = p.complex_list("x_coeffs");
  if (p.has("y_coeffs")) b = p.complex_list("y_coeffs");
  if (a.size() != g.small.size()) p.fail("x_coeffs", "one coefficient per small eigenvalue");
  if (b.size() != g.large.size()) p.fail("y_coeffs", "one coefficient per large eigenvalue");

  Tally tally;
  RunOutput out;
  json canonical;
  try {
    const GSWitness w = gs_witness(g, a, b, eps, delta, horizon);
    const double err = geometric_ratio_error(g, b, w);
    tally.require(err <= ratio_tol);
    canonical = {{"r", w.r}, {"z_norm", w.z_norm}, {"image_residual", w.image_residual}, {"ratio_error", err}};
    out.main.columns = {"n", "z_norm", "image_residual"};
    for (std::size_t n = 0; n < w.z_norm.size(); ++n) {
      out.main.rows.push_back({static_cast<long long>(n), w.z_norm[n], w.image_residual[n]});
    }
  } catch (const PreconditionError& e) {
    tally.require(false);
    canonical = {{"r", nullptr}, {"error", e.what()}};
  }

  Rng rng(p.seed("seed", 1));
  json random = json::array();
  Table rtab;
  rtab.columns = {"pair", "r", "ratio_error"};
  for (int i = 0; i < pairs; ++i) {
    const auto ra = random_coeffs(g.small.size(), rng);
    const auto rb = random_coeffs(g.large.size(), rng);
    try {
      const GSWitness w = gs_witness(g, ra, rb, eps, delta, horizon);
      const double err = geometric_ratio_error(g, rb, w);
      tally.require(err <= ratio_tol);
      random.push_back({{"r", w.r}, {"ratio_error", err}});
      rtab.rows.push_back({static_cast<long long>(i), static_cast<long long>(w.r), err});
    } catch (const PreconditionError&) {
      tally.require(false);
      random.push_back({{"r", nullptr}});
      rtab.rows.push_back({static_cast<long long>(i), std::string(), std::string()});
    }
  }
  out.result = {{"r", canonical["r"]}, {"canonical", canonical}, {"random_pairs", random}};
  if (pairs > 0) out.curves["pairs"] = std::move(rtab);
  tally.finish(out);
  return out;
}

RunOutput direct_sum_equivalence(const LabConfig& cfg, const Fields& p) {
  const int tuples = p.integer("tuples", 50);
  const int horizon = p.integer("horizon", 25);
  std::vector<int> ks{1, 2, 3};
  if (p.has("k")) ks = p.int_list("k");
  Rng rng(p.seed("seed", 1));
  const HitTolerances tol = tolerances_from(p);
  const VectorSampler centers = sampler_from(p, "sampler", VectorSampler{cfg.window(), 3, 1.0, 3});

  const std::vector<std::pair<std::string, OperatorSpec>> pool = {
      {"scalar(0.5)", scalar(0.5)},
      {"scalar(1)", scalar(1.0)},
      {"scalar(2)", scalar(2.0)},
      {"scalar(1.5i)", scalar(cplx(0.0, 1.5))},
      {"shift(2,3)", forward_shift(2.0, 3.0)},
      {"shift(2,4)", forward_shift(2.0, 4.0)},
      {"shift(1.5,2)", forward_shift(1.5, 2.0)},
      {"backward(2,3)", right_inverse(forward_shift(2.0, 3.0))},
  };

  struct Case {
    int k;
    std::vector<std::size_t> picks;
    ProductBall sources;
    ProductBall targets;
  };
  std::vector<Case> cases;
  for (int k : ks) {
    if (k < 1) p.fail("k", "arity must be positive");
    for (int t = 0; t < tuples; ++t) {
      std::vector<std::size_t> picks;
      std::vector<Ball> src, tgt;
      for (int i = 0; i < k; ++i) picks.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1)));
      for (int i = 0; i < k; ++i) src.emplace_back(centers.sample(rng), 0.2 + 0.6 * rng.uniform());
      for (int i = 0; i < k; ++i) tgt.emplace_back(centers.sample(rng), 0.2 + 0.6 * rng.uniform());
      cases.push_back({k, std::move(picks), ProductBall(std::move(src)), ProductBall(std::move(tgt))});
    }
  }

  std::vector<std::vector<int>> joint_times(cases.size()), cross_times(cases.size());
  parallel_for(cases.size(), [&](std::size_t c) {
    std::vector<OperatorSpec> comps;
    for (auto i : cases[c].picks) comps.push_back(pool[i].second);
    joint_times[c] = junction_scan(comps, cases[c].sources, cases[c].targets, horizon, DiskScaled{}, tol).hit_times();
    cross_times[c] = cross_scan(comps, cases[c].sources, cases[c].targets, horizon, tol).intersection;
  });

  Tally tally;
  RunOutput out;
  out.main.columns = {"tuple", "k", "components", "joint_hits", "cross_hits", "disagreements"};
  json rows = json::array();
  long long total = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    long long bad = 0;
    for (int n = 0; n <= horizon; ++n) {
      const bool j = std::binary_search(joint_times[c].begin(), joint_times[c].end(), n);
      const bool x = std::binary_search(cross_times[c].begin(), cross_times[c].end(), n);
      bad += j != x;
    }
    total += bad;
    std::string names;
    for (auto i : cases[c].picks) names += (names.empty() ? "" : "+") + pool[i].first;
    out.main.rows.push_back({static_cast<long long>(c), static_cast<long long>(cases[c].k), names,
                             static_cast<long long>(joint_times[c].size()),
                             static_cast<long long>(cross_times[c].size()), bad});
    rows.push_back({{"k", cases[c].k}, {"components", names}, {"joint_times", joint_times[c]},
                    {"cross_times", cross_times[c]}, {"disagreements", bad}});
  }
  tally.require(total == 0);
  out.result = {{"horizon", horizon}, {"tuples", rows}, {"disagreements", total}};
  tally.finish(out);
  return out;
}

CriterionData shift_criterion_data(const std::vector<OperatorSpec>& comps, const Fields& p, int horizon) {
  CriterionData d;
  d.components = comps;
  for (const auto& t : comps) d.smaps.push_back(right_inverse(t));
  d.nk = consecutive_times(horizon);
  d.tol = p.number("tol", 1e-6);
  d.sample_count = p.integer("samples", 25);
  d.seed = p.seed("seed", 1);
  d.xsampler = sampler_from(p, "xsampler", d.xsampler);
  d.ysampler = sampler_from(p, "ysampler", d.ysampler);
  return d;
}

RunOutput scalar_roundtrip(const Fields& p) {
  const double r1 = p.number("r1", 2.0);
  const double r2 = p.number("r2", 3.0);
  if (!(1.0 < r1 && r1 < r2)) p.fail("r1", "the example needs 1 < r1 < r2");
  const double eps = p.number("eps", 0.1);
  const int horizon = p.integer("horizon", 40);
  const int extended = p.integer("extended_horizon", 80);
  const OperatorSpec t = forward_shift(r1, r2);
  CriterionData d = shift_criterion_data({t}, p, horizon);

  const CriterionReport r176 = check_prop176(d);
  const DerivedScalars ds = derive_scalars(d, eps);

  // |lambda| <= 1 on every reported tail and ||S^n y|| / |lambda| = eps there.
  const auto samples = draw_samples(d);
  bool bounded = true;
  double eps_error = 0.0;
  const OperatorSpec s = d.smaps.front();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ComplexVector& y = samples[i].second.part(0);
    for (std::size_t k = static_cast<std::size_t>(ds.tail_start[i][0]); k < d.nk.size(); ++k) {
      const cplx lambda = ds.fixed[i][0][k];
      bounded = bounded && std::abs(lambda) <= 1.0;
      const ComplexVector sy = PowerMap(s, d.nk[k], y.window()).image(y);
      eps_error = std::max(eps_error, std::abs(norm(sy) / std::abs(lambda) - eps));
    }
  }

  CriterionData dfixed = d;
  dfixed.lambdas = ds.fixed;
  const CriterionReport r175 = check_thm175(dfixed);
  CriterionData dtight = d;
  dtight.lambdas = ds.tightest;
  const CriterionReport r175t = check_thm175(dtight);
  CriterionData dext = shift_criterion_data({t}, p, extended);
  dext.lambdas = derive_scalars(dext, eps).tightest;
  const CriterionReport r175x = check_thm175(dext);

  RunOutput out;
  out.result = {{"prop176", to_json(r176)},
                {"derived",
                 {{"eps", eps},
                  {"bounded_on_tail", bounded},
                  {"eps_identity_error", eps_error},
                  {"degenerate", ds.degenerate},
                  {"tail_start", ds.tail_start}}},
                {"thm175_derived", to_json(r175)},
                {"thm175_tightest", to_json(r175t)},
                {"thm175_tightest_extended", to_json(r175x)}};
  out.main = criterion_table(r175);
  out.curves["prop176"] = criterion_table(r176);
  out.curves["tightest"] = criterion_table(r175t);
  out.curves["tightest_extended"] = criterion_table(r175x);
  Tally tally;
  tally.require(r176.pass());
  tally.require(bounded);
  tally.require(eps_error <= 1e-10);
  tally.require(r175.pass());
  tally.finish(out);
  return out;
}

RunOutput compound_plus_transitive(const LabConfig& cfg, const Fields& p) {
  const OperatorSpec t1 = forward_shift(p.number("t1_r1", 2.0), p.number("t1_r2", 3.0));
  const OperatorSpec t2 = forward_shift(p.number("t2_r1", 2.0), p.number("t2_r2", 4.0));
  const int trials = p.integer("trials", 20);
  const int horizon = p.integer("horizon", 40);
  const auto seed = p.seed("seed", 1);
  const DetectOptions opts = detect_options_from(p);
  const BallSampler bs = ball_sampler(p, cfg.window());

  const Verdict c1 = detect(VerdictKind::Compound, {t1}, bs, trials, horizon, seed, opts);
  const Verdict c2 = detect(VerdictKind::DiskTransitive, {t2}, bs, trials, horizon, seed + 1, opts);
  const Verdict kb = detect(VerdictKind::KBitransitive, {t1, t2}, bs, trials, horizon, seed + 2, opts);

  RunOutput out;
  out.result = {{"t1_compound", trials_json(c1)}, {"t2_disk_transitive", trials_json(c2)}, {"k_bitransitive", trials_json(kb)}};
  out.main.columns = {"trial", "common_times", "first_common"};
  for (std::size_t i = 0; i < kb.trials.size(); ++i) {
    const auto& ct = kb.trials[i].common_times;
    out.main.rows.push_back({static_cast<long long>(i), static_cast<long long>(ct.size()),
                             ct.empty() ? Cell(std::string()) : Cell(static_cast<long long>(ct.front()))});
  }
  Tally tally;
  tally.expect(c1.outcome, Outcome::ConfirmedUpToHorizon);
  tally.expect(c2.outcome, Outcome::ConfirmedUpToHorizon);
  tally.expect(kb.outcome, Outcome::ConfirmedUpToHorizon);
  tally.finish(out);
  return out;
}

RunOutput direct_sum_criterion(const LabConfig& cfg, const Fields& p) {
  const OperatorSpec t1 = forward_shift(p.number("t1_r1", 2.0), p.number("t1_r2", 3.0));
  const OperatorSpec t2 = forward_shift(p.number("t2_r1", 2.0), p.number("t2_r2", 4.0));
  const int horizon = p.integer("horizon", 40);
  const int trials = p.integer("trials", 20);
  const DetectOptions opts = detect_options_from(p);
  const BallSampler bs = ball_sampler(p, cfg.window());

  const CriterionReport each1 = check_prop176(shift_criterion_data({t1}, p, horizon));
  const CriterionReport each2 = check_prop176(shift_criterion_data({t2}, p, horizon));
  const CriterionReport sum = check_prop176(shift_criterion_data({t1, t2}, p, horizon));
  const Verdict kb = detect(VerdictKind::KBitransitive, {t1, t2}, bs, trials, horizon, p.seed("seed", 1), opts);

  RunOutput out;
  out.result = {{"t1_criterion", to_json(each1)},
                {"t2_criterion", to_json(each2)},
                {"direct_sum_criterion", to_json(sum)},
                {"k_bitransitive", trials_json(kb)}};
  out.main = criterion_table(sum);
  out.curves["t1"] = criterion_table(each1);
  out.curves["t2"] = criterion_table(each2);
  Tally tally;
  tally.require(each1.pass() && each2.pass() && sum.pass());
  tally.expect(kb.outcome, Outcome::ConfirmedUpToHorizon);
  tally.finish(out);
  return out;
}

}  // namespace

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = {
      "example-compound-not-mixing",    "gs-diagonal", "prop126-equivalence", "prop177-roundtrip",
      "thm220-compound-plus-transitive", "direct-sum-diskcyclic-criterion"};
  return ids;
}

RunOutput run_scenario(const LabConfig& cfg) {
  const Fields p = cfg.parameters();
  const std::string id = p.string("id");
  RunOutput out;
  if (id == "example-compound-not-mixing") {
    out = example_compound_not_mixing(cfg, p);
  } else if (id == "gs-diagonal") {
    out = gs_diagonal(p);
  } else if (id == "prop126-equivalence") {
    out = direct_sum_equivalence(cfg, p);
  } else if (id == "prop177-roundtrip") {
    out = scalar_roundtrip(p);
  } else if (id == "thm220-compound-plus-transitive") {
    out = compound_plus_transitive(cfg, p);
  } else if (id == "direct-sum-diskcyclic-criterion") {
    out = direct_sum_criterion(cfg, p);
  } else {
    p.fail("id", "unknown scenario '" + id + "'");
  }
  out.result["scenario"] = id;
  return out;
}

}  // namespace dlab::lab
