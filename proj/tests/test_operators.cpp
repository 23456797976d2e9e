#include <doctest.h>

#include <cmath>

#include "dlab/operators.hpp"
#include "support.hpp"

using namespace dlab;

namespace {

const IndexWindow W = IndexWindow::bilateral(16);
const OperatorSpec T = forward_shift(2.0, 3.0);

ComplexVector random_on(Rng& rng, const IndexWindow& w, int lo, int hi) {
  ComplexVector v(w);
  for (int j = lo; j <= hi; ++j) v[j] = {rng.normal(), rng.normal()};
  return v;
}

double seq_distance(const oracle::Seq& a, const oracle::Seq& b) { return oracle::norm(oracle::sub(a, b)); }

// Random shift with two-sided weights in [0.5, 3] and a short random table.
WeightProfile random_profile(Rng& rng) {
  WeightProfile w{0.5 + 2.5 * rng.uniform(), 0.5 + 2.5 * rng.uniform(), rng.uniform_int(-4, 2), {}};
  const int len = rng.uniform_int(0, 4);
  for (int i = 0; i < len; ++i) w.table.push_back(0.5 + 2.5 * rng.uniform());
  return w;
}

}  // namespace

TEST_CASE("apply examples") {
  CHECK(apply(T, ComplexVector::basis(W, 0)) == ComplexVector::basis(W, 1, 2.0));
  CHECK(apply(T, ComplexVector::basis(W, -1)) == ComplexVector::basis(W, 0, 3.0));
  const auto u = IndexWindow::unilateral(1);
  CHECK(apply(diagonal({1.0, 0.5}), ComplexVector::basis(u, 1)) == ComplexVector::basis(u, 1, 0.5));
  // Backward shift: e_n -> w_{n-1} e_{n-1}.
  const OperatorSpec b = BackwardShift{WeightProfile::two_sided(2.0, 3.0)};
  CHECK(apply(b, ComplexVector::basis(W, 0)) == ComplexVector::basis(W, -1, 3.0));
  CHECK(apply(b, ComplexVector::basis(W, 1)) == ComplexVector::basis(W, 0, 2.0));
  // Mass leaving the window is dropped.
  CHECK(apply(T, ComplexVector::basis(W, 16)).is_zero());
}

TEST_CASE("power examples") {
  CHECK(power_apply(forward_shift(2.0), 2, ComplexVector::basis(W, 0)) == ComplexVector::basis(W, 2, 4.0));
  Rng rng(2);
  const auto x = random_on(rng, W, -3, 3);
  CHECK(power_apply(T, 0, x) == x);
  const auto e0 = ComplexVector::basis(W, 0);
  const auto sum = direct_sum({T, T});
  const auto img = power_apply(sum, 3, ProductVector({e0, e0}));
  CHECK(img.part(0) == power_apply(T, 3, e0));
  CHECK(img.part(1) == power_apply(T, 3, e0));
  CHECK(img.part(0) == ComplexVector::basis(W, 3, 8.0));
  CHECK_THROWS_AS(power_apply(sum, 1, ProductVector({e0})), PreconditionError);
  CHECK_THROWS_AS(power_apply(T, -1, e0), PreconditionError);
  CHECK_THROWS_AS(apply(diagonal({1.0, 2.0}), e0), PreconditionError);
}

TEST_CASE("shift powers match step-by-step application") {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const double pos = 0.5 + 2.5 * rng.uniform(), neg = 0.5 + 2.5 * rng.uniform();
    const int n = rng.uniform_int(0, 8);
    const auto x = random_on(rng, W, -6, 6);
    const auto got = support::to_seq(power_apply(forward_shift(pos, neg), n, x));
    const auto want = oracle::forward_power({pos, neg}, n, support::to_seq(x));
    CHECK(seq_distance(got, want) <= 1e-13 * oracle::norm(want));
    // The right inverse against the oracle's reciprocal backward steps.
    const auto back = support::to_seq(power_apply(right_inverse(forward_shift(pos, neg)), n, x));
    const auto back_want = oracle::backward_inverse_power({pos, neg}, n, support::to_seq(x));
    CHECK(seq_distance(back, back_want) <= 1e-13 * oracle::norm(back_want));
  }
}

TEST_CASE("power map widens instead of truncating") {
  const IndexWindow w = IndexWindow::bilateral(4);
  const PowerMap pm(T, 6, w);
  CHECK(pm.codomain() == IndexWindow::bilateral(10));
  const auto img = pm.image(ComplexVector::basis(w, 4));
  CHECK(img[10] == cplx(64.0));
  const PowerMap back(right_inverse(T), 2, w);
  CHECK(std::abs(back.image(ComplexVector::basis(w, -4))[-6] - 1.0 / 9.0) <= 1e-16);
}

TEST_CASE("semigroup law on interior supports") {
  Rng rng(5);
  const IndexWindow w = IndexWindow::bilateral(40);
  for (int t = 0; t < 200; ++t) {
    const auto prof = random_profile(rng);
    const OperatorSpec op = rng.uniform() < 0.5 ? OperatorSpec(ForwardShift{prof}) : OperatorSpec(BackwardShift{prof});
    const int m = rng.uniform_int(0, 10), n = rng.uniform_int(0, 10);
    const auto x = random_on(rng, w, -5, 5);
    const auto lhs = power_apply(op, m + n, x);
    const auto rhs = power_apply(op, m, power_apply(op, n, x));
    CHECK(norm(lhs - rhs) <= 1e-13 * norm(lhs));
  }
}

TEST_CASE("right inverse") {
  const auto s = right_inverse(T);
  CHECK(apply(s, ComplexVector::basis(W, 0)) == ComplexVector::basis(W, -1, 1.0 / 3.0));
  CHECK(apply(T, apply(s, ComplexVector::basis(W, 0))) == ComplexVector::basis(W, 0));
  const auto d = right_inverse(diagonal({2.0}));
  REQUIRE(d.is<Diagonal>());
  CHECK(d.as<Diagonal>().entries == std::vector<cplx>{0.5});
  CHECK(right_inverse(scalar(4.0)).as<Scalar>().c == cplx(0.25));
  CHECK_THROWS_AS(right_inverse(diagonal({1.0, 0.0})), PreconditionError);
  CHECK_THROWS_AS(right_inverse(scalar(0.0)), PreconditionError);
  CHECK_THROWS_AS(right_inverse(Dense{1, {cplx(1.0)}}), UnsupportedOperator);
  CHECK_THROWS_AS(forward_shift(0.0, 1.0), PreconditionError);
}

TEST_CASE("right inverse law away from the boundary") {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const OperatorSpec op = ForwardShift{random_profile(rng)};
    const auto s = right_inverse(op);
    const int n = rng.uniform_int(0, 6);
    for (int j = W.lo() + n; j <= W.hi(); ++j) {
      const auto e = ComplexVector::basis(W, j);
      const auto back = power_apply(op, n, power_apply(s, n, e));
      CHECK(norm(back - e) <= 1e-14);
    }
  }
}

TEST_CASE("growth examples") {
  const auto g = growth(T, 4);
  CHECK(g.opnorm_upper == 81.0);
  CHECK(g.minmod_lower == 16.0);
  const auto [mn, mx] = oracle::weight_run_extremes({2.0, 3.0}, 4, -30, 30);
  CHECK(g.opnorm_upper == mx);
  CHECK(g.minmod_lower == mn);
  const auto d = growth(diagonal({0.5, 2.0}), 3);
  CHECK(d.opnorm_upper == 8.0);
  CHECK(d.minmod_lower == 0.125);
  const auto c = growth(scalar(cplx(0.0, 1.5)), 5);
  CHECK(c.opnorm_upper == doctest::Approx(std::pow(1.5, 5)).epsilon(1e-15));
  CHECK(c.opnorm_upper == c.minmod_lower);
  CHECK(growth(T, 0).opnorm_upper == 1.0);
  CHECK_THROWS_AS(growth(direct_sum({T}), 1), UnsupportedOperator);
  CHECK_THROWS_AS(growth(Dense{1, {cplx(1.0)}}, 1), UnsupportedOperator);
  // On N the forward shift only sees the n >= 0 weights.
  CHECK(growth(T, 4, WindowKind::Unilateral).opnorm_upper == 16.0);
  CHECK(growth(BackwardShift{WeightProfile::constant(2.0)}, 2, WindowKind::Unilateral).minmod_lower == 0.0);
}

TEST_CASE("growth agrees with brute-force weight runs") {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    const auto prof = random_profile(rng);
    const int n = rng.uniform_int(1, 9);
    double lo = INFINITY, hi = 0.0;
    for (int a = -40; a <= 40; ++a) {
      double p = 1.0;
      for (int m = a; m < a + n; ++m) p *= prof.at(m);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    const auto g = growth(ForwardShift{prof}, n);
    CHECK(g.opnorm_upper == doctest::Approx(hi).epsilon(1e-14));
    CHECK(g.minmod_lower == doctest::Approx(lo).epsilon(1e-14));
  }
}

TEST_CASE("growth bounds the image norm") {
  Rng rng(31);
  const IndexWindow w = IndexWindow::bilateral(30);
  for (int t = 0; t < 300; ++t) {
    const auto prof = random_profile(rng);
    const OperatorSpec op = rng.uniform() < 0.5 ? OperatorSpec(ForwardShift{prof}) : OperatorSpec(BackwardShift{prof});
    const int n = rng.uniform_int(0, 8);
    const auto x = random_on(rng, w, -10, 10);
    const auto g = growth(op, n);
    const double img = norm(power_apply(op, n, x));
    CHECK(img <= g.opnorm_upper * norm(x) * (1.0 + 1e-12));
    CHECK(img >= g.minmod_lower * norm(x) * (1.0 - 1e-12));
  }
  for (int t = 0; t < 100; ++t) {
    std::vector<cplx> entries(w.size());
    for (auto& e : entries) e = {rng.normal(), rng.normal()};
    const OperatorSpec op = diagonal(entries);
    const int n = rng.uniform_int(0, 5);
    const auto x = random_on(rng, w, -30, 30);
    const auto g = growth(op, n);
    const double img = norm(power_apply(op, n, x));
    CHECK(img <= g.opnorm_upper * norm(x) * (1.0 + 1e-12));
    CHECK(img >= g.minmod_lower * norm(x) * (1.0 - 1e-12));
  }
}

TEST_CASE("as_dense") {
  const auto w3 = IndexWindow::unilateral(2);
  const auto s = as_dense(scalar(2.0), w3);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) CHECK(s(r, c) == cplx(r == c ? 2.0 : 0.0));
  }
  const auto sh = as_dense(forward_shift(5.0, 7.0), w3);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      const cplx want = r == 1 && c == 0 ? 5.0 : r == 2 && c == 1 ? 5.0 : 0.0;
      CHECK(sh(r, c) == want);
    }
  }
  CHECK_THROWS_AS(as_dense(direct_sum({T}), w3), UnsupportedOperator);
}

TEST_CASE("as_dense round trip on random vectors") {
  Rng rng(41);
  const IndexWindow w = IndexWindow::bilateral(5);
  std::vector<cplx> entries(w.size());
  for (auto& e : entries) e = {rng.normal(), rng.normal()};
  const std::vector<OperatorSpec> ops = {T, right_inverse(T), diagonal(entries), scalar(cplx(0.3, -2.0))};
  for (const auto& op : ops) {
    const auto m = as_dense(op, w);
    for (int t = 0; t < 100; ++t) {
      const auto x = random_on(rng, w, w.lo(), w.hi());
      ComplexVector mx(w);
      for (std::size_t r = 0; r < w.size(); ++r) {
        cplx acc = 0.0;
        for (std::size_t c = 0; c < w.size(); ++c) acc += m(r, c) * x.coeffs()[c];
        mx.coeffs()[r] = acc;
      }
      CHECK(mx == apply(op, x));
    }
  }
  // A dense operator rebuilt from its own matrix acts the same way.
  const Dense d = as_dense(T, w);
  const auto x = random_on(rng, w, w.lo(), w.hi());
  CHECK(norm(apply(d, x) - apply(T, x)) <= 1e-15 * norm(x));
}

TEST_CASE("window guard") {
  const auto e10 = ComplexVector::basis(W, 10);
  CHECK(power_fits_window(T, 6, e10));
  CHECK_FALSE(power_fits_window(T, 7, e10));
  const std::vector<ComplexVector> src{e10}, tgt{ComplexVector::basis(W, -10)};
  CHECK_NOTHROW(check_window_guard(T, 6, W, src, tgt));
  CHECK_THROWS_AS(check_window_guard(T, 7, W, src, {}), WindowGuardError);
  // Target preimages under the right inverse move left.
  CHECK_THROWS_AS(check_window_guard(T, 7, W, {}, tgt), WindowGuardError);
  CHECK_NOTHROW(check_window_guard(scalar(2.0), 100, W, src, tgt));
}
