#include "dlab/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dlab/parallel.hpp"

namespace dlab {

namespace {

// T^n x without truncation (the codomain grows with n for shifts).
ComplexVector exact_power(const OperatorSpec& op, int n, const ComplexVector& x) {
  if (n == 0) return x;
  return PowerMap(op, n, x.window()).image(x);
}

// Per-sample, per-component norms needed by every checker.
struct Norms {
  std::vector<double> tx;    // ||T^n x||
  std::vector<double> sy;    // ||S^n y||
  std::vector<double> tsy;   // ||T^n S^n y - y||
};

Norms component_norms(const OperatorSpec& t, const OperatorSpec& s, const ComplexVector& x, const ComplexVector& y,
                      const std::vector<int>& nk) {
  Norms out;
  for (int n : nk) {
    out.tx.push_back(norm(exact_power(t, n, x)));
    const ComplexVector sy = exact_power(s, n, y);
    out.sy.push_back(norm(sy));
    const ComplexVector tsy = exact_power(t, n, sy);
    out.tsy.push_back(norm(tsy - y.embedded(tsy.window())));
  }
  return out;
}

using SampleNorms = std::vector<Norms>;  // one per component

std::vector<SampleNorms> all_norms(const CriterionData& data,
                                   const std::vector<std::pair<ProductVector, ProductVector>>& samples) {
  std::vector<SampleNorms> out(samples.size(), SampleNorms(data.components.size()));
  parallel_for(samples.size(), [&](std::size_t s) {
    for (std::size_t i = 0; i < data.components.size(); ++i) {
      out[s][i] = component_norms(data.components[i], data.smaps[i], samples[s].first.part(i),
                                  samples[s].second.part(i), data.nk);
    }
  });
  return out;
}

using CurveFn = double (*)(const Norms&, std::size_t k, cplx lambda);

CriterionReport assemble(const CriterionData& data, const std::vector<std::pair<ProductVector, ProductVector>>& samples,
                         const std::vector<SampleNorms>& norms, const std::array<CurveFn, 3>& fns, bool use_lambdas) {
  CriterionReport rep;
  rep.nk = data.nk;
  const std::size_t kcount = data.nk.size();
  for (auto& c : rep.conditions) {
    c.values.assign(kcount, 0.0);
    c.pass = true;
  }
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const ScalarTable* table = use_lambdas ? data.lambdas_for(static_cast<int>(s)) : nullptr;
    CriterionSample sample{samples[s].first, samples[s].second, {}};
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<double> curve(kcount, 0.0);
      for (std::size_t k = 0; k < kcount; ++k) {
        for (std::size_t i = 0; i < data.components.size(); ++i) {
          const cplx lambda = table ? (*table)[i][k] : cplx(1.0);
          curve[k] += fns[c](norms[s][i], k, lambda);
        }
        rep.conditions[c].values[k] = std::max(rep.conditions[c].values[k], curve[k]);
      }
      sample.pass[c] = tends_to_zero(curve, data.tol);
      rep.conditions[c].pass = rep.conditions[c].pass && sample.pass[c];
    }
    rep.witnesses.push_back(std::move(sample));
  }
  return rep;
}

void require_consecutive(const CriterionData& data) {
  for (std::size_t k = 0; k < data.nk.size(); ++k) {
    if (data.nk[k] != static_cast<int>(k) + 1) throw PreconditionError("compound criteria run along n = 1..N");
  }
}

}  // namespace

void CriterionData::validate() const {
  if (components.empty()) throw PreconditionError("criterion data needs at least one component");
  if (smaps.size() != components.size()) throw PreconditionError("components and smaps differ in arity");
  if (nk.empty()) throw PreconditionError("nk is empty");
  for (std::size_t k = 0; k < nk.size(); ++k) {
    if (nk[k] < 1) throw PreconditionError("nk must be positive");
    if (k > 0 && nk[k] <= nk[k - 1]) throw PreconditionError("nk must be strictly increasing");
  }
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  if (sample_count < 1) throw PreconditionError("sample_count must be at least 1");
  if (!lambdas.empty() && lambdas.size() != 1 && lambdas.size() != static_cast<std::size_t>(sample_count)) {
    throw PreconditionError("lambdas must hold one table or one per sample");
  }
  for (const auto& table : lambdas) {
    if (table.size() != components.size()) throw PreconditionError("lambda table arity mismatch");
    for (const auto& row : table) {
      if (row.size() != nk.size()) throw PreconditionError("lambda row length differs from nk");
      for (cplx l : row) {
        if (l == cplx(0.0)) throw PreconditionError("lambda must be nonzero");
        if (std::abs(l) > 1.0 + 1e-12) throw PreconditionError("lambda must satisfy |lambda| <= 1");
      }
    }
  }
}

const ScalarTable* CriterionData::lambdas_for(int sample) const {
  if (lambdas.empty()) return nullptr;
  if (lambdas.size() == 1) return &lambdas.front();
  return &lambdas.at(static_cast<std::size_t>(sample));
}

std::vector<int> consecutive_times(int horizon) {
  std::vector<int> out;
  for (int n = 1; n <= horizon; ++n) out.push_back(n);
  return out;
}

bool tends_to_zero(const std::vector<double>& values, double tol) {
  if (values.empty()) return false;
  if (!(values.back() < tol)) return false;
  const std::size_t quarter = std::max<std::size_t>(1, (values.size() + 3) / 4);
  const std::size_t from = values.size() > quarter ? values.size() - quarter - 1 : 0;
  const double noise = tol * 1e-6;
  for (std::size_t k = from; k + 1 < values.size(); ++k) {
    if (values[k + 1] > values[k] + noise) return false;
  }
  return true;
}

std::vector<std::pair<ProductVector, ProductVector>> draw_samples(const CriterionData& data) {
  Rng rng(data.seed);
  std::vector<std::pair<ProductVector, ProductVector>> out;
  for (int s = 0; s < data.sample_count; ++s) {
    std::vector<ComplexVector> xs, ys;
    for (std::size_t i = 0; i < data.components.size(); ++i) xs.push_back(data.xsampler.sample(rng));
    for (std::size_t i = 0; i < data.components.size(); ++i) ys.push_back(data.ysampler.sample(rng));
    out.emplace_back(ProductVector(std::move(xs)), ProductVector(std::move(ys)));
  }
  return out;
}

CriterionReport check_thm175(const CriterionData& data) {
  data.validate();
  if (data.lambdas.empty()) throw PreconditionError("check_thm175 needs lambdas");
  const auto samples = draw_samples(data);
  const auto norms = all_norms(data, samples);
  return assemble(data, samples, norms,
                  {[](const Norms& n, std::size_t k, cplx l) { return std::abs(l) * n.tx[k]; },
                   [](const Norms& n, std::size_t k, cplx l) { return n.sy[k] / std::abs(l); },
                   [](const Norms& n, std::size_t k, cplx) { return n.tsy[k]; }},
                  true);
}

CriterionReport check_prop176(const CriterionData& data) {
  data.validate();
  const auto samples = draw_samples(data);
  const auto norms = all_norms(data, samples);
  return assemble(data, samples, norms,
                  {[](const Norms& n, std::size_t k, cplx) { return n.tx[k] * n.sy[k]; },
                   [](const Norms& n, std::size_t k, cplx) { return n.sy[k]; },
                   [](const Norms& n, std::size_t k, cplx) { return n.tsy[k]; }},
                  false);
}

DerivedScalars derive_scalars(const CriterionData& data, double eps, double alpha_floor) {
  data.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0, 1)");
  const auto samples = draw_samples(data);
  const auto norms = all_norms(data, samples);
  const std::size_t kcount = data.nk.size();

  DerivedScalars out;
  out.eps = eps;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    ScalarTable fixed(data.components.size()), tight(data.components.size());
    std::vector<int> starts(data.components.size());
    for (std::size_t i = 0; i < data.components.size(); ++i) {
      const Norms& nm = norms[s][i];
      std::size_t start = kcount;
      while (start > 0 && nm.sy[start - 1] <= eps) --start;
      if (start == kcount) {
        throw PreconditionError("eps is too small for the horizon: ||S^n y|| = " + std::to_string(nm.sy.back()) +
                                " at the last n");
      }
      starts[i] = static_cast<int>(start);
      for (std::size_t k = 0; k < kcount; ++k) {
        const double sy = nm.sy[k];
        if (sy == 0.0) {
          out.degenerate = true;
          fixed[i].push_back(alpha_floor);
          tight[i].push_back(alpha_floor);
          continue;
        }
        fixed[i].push_back(k >= start ? sy / eps : std::min(1.0, sy / eps));
        const double scale = std::max(std::sqrt(nm.tx[k] * sy), sy);
        tight[i].push_back(sy / scale);
      }
    }
    out.fixed.push_back(std::move(fixed));
    out.tightest.push_back(std::move(tight));
    out.tail_start.push_back(std::move(starts));
  }
  return out;
}

CriterionReport check_compound_c1(const CriterionData& data) {
  require_consecutive(data);
  return check_thm175(data);
}

CriterionReport check_compound_c2(const CriterionData& data) {
  require_consecutive(data);
  return check_prop176(data);
}

void GSData::validate() const {
  if (!diag.is<Diagonal>()) throw PreconditionError("gs data needs a diagonal operator");
  if (!(p > 0.0)) throw PreconditionError("p must be positive");
  if (large.empty()) throw PreconditionError("gs data needs at least one eigenvalue above p");
  double min_large = std::numeric_limits<double>::infinity();
  for (const auto& e : small) {
    if (!(std::abs(e.value) < p)) throw PreconditionError("small eigenvalue with modulus >= p");
  }
  for (const auto& e : large) {
    if (!(std::abs(e.value) > p)) throw PreconditionError("large eigenvalue with modulus <= p");
    min_large = std::min(min_large, std::abs(e.value));
  }
  if (!(std::abs(c) >= p && std::abs(c) < min_large)) {
    throw PreconditionError("c must satisfy p <= |c| < min |large eigenvalue|");
  }
  std::vector<int> seen;
  for (const auto* set : {&small, &large}) {
    for (const auto& e : *set) {
      for (int j : e.vector.support()) {
        if (std::find(seen.begin(), seen.end(), j) != seen.end()) {
          throw PreconditionError("small and large eigenvectors overlap");
        }
        seen.push_back(j);
      }
    }
  }
}

GSData build_gs_data(const std::vector<cplx>& entries, double p, cplx c) {
  if (entries.empty()) throw PreconditionError("diagonal has no entries");
  const IndexWindow w = IndexWindow::unilateral(static_cast<int>(entries.size()) - 1);
  GSData g{diagonal(entries), p, {}, {}, c};
  for (std::size_t j = 0; j < entries.size(); ++j) {
    EigenPair e{entries[j], ComplexVector::basis(w, static_cast<int>(j))};
    if (std::abs(entries[j]) < p) {
      g.small.push_back(std::move(e));
    } else if (std::abs(entries[j]) > p) {
      g.large.push_back(std::move(e));
    }
  }
  g.validate();
  return g;
}

GSWitness gs_witness(const GSData& g, const std::vector<cplx>& x_coeffs, const std::vector<cplx>& y_coeffs,
                     double eps, double delta, int horizon) {
  g.validate();
  if (x_coeffs.size() != g.small.size() || y_coeffs.size() != g.large.size()) {
    throw PreconditionError("coefficient counts must match the eigenvector sets");
  }
  if (!(eps > 0.0 && delta > 0.0)) throw PreconditionError("eps and delta must be positive");
  if (horizon < 0) throw PreconditionError("horizon must be nonnegative");
  const IndexWindow w = g.large.front().vector.window();
  ComplexVector x(w), y(w);
  for (std::size_t i = 0; i < g.small.size(); ++i) x += x_coeffs[i] * g.small[i].vector;
  for (std::size_t j = 0; j < g.large.size(); ++j) y += y_coeffs[j] * g.large[j].vector;

  GSWitness out{0, {}, {}, x, y};
  for (int n = 0; n <= horizon; ++n) {
    ComplexVector z(w);
    for (std::size_t j = 0; j < g.large.size(); ++j) {
      z += (y_coeffs[j] * std::pow(g.c / g.large[j].value, n)) * g.large[j].vector;
    }
    out.z_norm.push_back(norm(z));
    const ComplexVector image = std::pow(g.c, -n) * exact_power(g.diag, n, x + z);
    out.image_residual.push_back(norm(image - y));
  }
  int r = horizon + 1;
  while (r > 0 && out.z_norm[static_cast<std::size_t>(r - 1)] < eps &&
         out.image_residual[static_cast<std::size_t>(r - 1)] < delta) {
    --r;
  }
  if (r > horizon) throw PreconditionError("no r within the horizon");
  out.r = r;
  return out;
}

ShiftWitness example_shift_witness(double r1, double r2, const ComplexVector& x, const ComplexVector& y, int n) {
  if (!(1.0 < r1 && r1 < r2)) throw PreconditionError("example shift needs 1 < R1 < R2");
  if (n < 0) throw PreconditionError("N must be nonnegative");
  if (!(x.window() == y.window())) throw WindowMismatch("x and y live on different windows");
  const OperatorSpec t = forward_shift(r1, r2);
  const OperatorSpec b = right_inverse(t);
  check_window_guard(t, n, x.window(), std::span(&x, 1), std::span(&y, 1));

  const ComplexVector tx = power_apply(t, n, x);
  const ComplexVector by = power_apply(b, n, y);
  const double ntx = norm(tx);
  const double nby = norm(by);
  if (ntx == 0.0) throw PreconditionError("x must be nonzero");
  const double lambda = std::sqrt(nby / ntx);
  ShiftWitness out{lambda, x + cplx(1.0 / lambda) * by};
  out.perturbation = distance(out.z, x);
  out.image_residual = distance(cplx(out.lambda) * power_apply(t, n, out.z), y);
  out.predicted = std::sqrt(ntx * nby);
  return out;
}

}  // namespace dlab
