#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"
#include "renormlab/seed_norm.hpp"

using namespace renormlab;

namespace {

// Closed form for x0 = f0 = e_i over sup: on the cone |y_i| >= (1-delta)|y|
// the value is m + (|y_i| - (1-delta) m)/(1-delta/2), m the off-axis sup.
double seed_oracle(Index i, double delta, const SparseVector& y) {
  double m = 0.0;
  for (const auto& [j, v] : y.entries())
    if (j != i) m = std::max(m, std::abs(v));
  const double yi = std::abs(y[i]);
  const double sup = std::max(m, yi);
  if (yi < (1.0 - delta) * sup || sup == 0.0) return sup;
  return m + (yi - (1.0 - delta) * m) / (1.0 - 0.5 * delta);
}

}  // namespace

TEST(SeedNorm, WorkedValues) {
  const SeedNorm s(coordinate_seed_params(1, 0.4));
  EXPECT_NEAR(s(SparseVector::unit(2)), 1.0, 1e-9);
  EXPECT_NEAR(s(SparseVector::unit(1, 0.8)), 1.0, 1e-9);
  EXPECT_NEAR(s(SparseVector::unit(1)), 1.25, 1e-9);
  EXPECT_NEAR(s(SparseVector{{1, 1.0}, {2, 0.5}}), 1.375, 1e-9);
  EXPECT_EQ(s.evaluate(SparseVector::unit(2)).branch, ConeSide::Outside);
  EXPECT_EQ(s.evaluate(SparseVector::unit(1, -1.0)).branch, ConeSide::Minus);
}

TEST(SeedNorm, MatchesClosedForm) {
  for (double delta : {0.1, 0.25, 0.4}) {
    const SeedNorm s(coordinate_seed_params(3, delta));
    CounterRng rng(23, "seed-oracle");
    const auto coords = coordinate_range(1, 8);
    for (int k = 0; k < 1000; ++k) {
      SparseVector y = random_vector(rng, coords, rng.uniform(0.1, 4.0), 0.6);
      if (k % 2 == 0) y.set(3, rng.sign() * rng.uniform(0.5, 2.0) * sup_norm(y));
      const double want = seed_oracle(3, delta, y);
      EXPECT_NEAR(s(y), want, 1e-9 * std::max(1.0, want)) << describe(y);
    }
  }
}

TEST(SeedNorm, VertexHasUnitNorm) {
  const SeedNorm s(coordinate_seed_params(5, 0.3));
  EXPECT_EQ(s.vertex(), SparseVector::unit(5, 0.85));
  EXPECT_NEAR(s(s.vertex()), 1.0, 1e-12);
}

TEST(SeedNorm, InvariantSuitePasses) {
  for (double delta : {0.1, 0.4}) {
    const SuiteReport r = seed_norm_invariant_suite(SeedNorm(coordinate_seed_params(1, delta)), 2000, 5);
    EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
  }
}

TEST(SeedNorm, UnitPointDecomposes) {
  const SeedNorm s(coordinate_seed_params(1, 0.4));
  SparseVector y{{1, 1.0}, {2, 0.5}};
  y *= 1.0 / s(y);
  const auto d = decompose_unit_point(s, y);
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR(d->a + d->b, 1.0, 1e-12);
  EXPECT_LE(d->reconstruction_error, 1e-9);
  EXPECT_LE(d->cone_defect, 1e-9);
}

TEST(Lemmas, DerivativeBound) {
  const SeedNorm s(coordinate_seed_params(1, 0.4));
  const auto b = lemma_derivative_bound(s, SparseVector::unit(2));
  EXPECT_NEAR(b.rhs, 0.15625, 1e-12);
  EXPECT_NEAR(b.t_max, 0.32 / 0.6, 1e-12);
  EXPECT_NEAR(lemma_derivative_bound(s, SparseVector::unit(1)).rhs, -1.25, 1e-12);
  // Measured one-sided quotient along e2 from the closed form.
  for (double t : {0.05, 0.25, 0.5}) {
    const double q = (s(axpy(t, SparseVector::unit(2), s.vertex())) - 1.0) / t;
    EXPECT_NEAR(q, 0.25, 1e-9);
    EXPECT_GE(q, b.rhs);
  }
  EXPECT_THROW(lemma_derivative_bound(s, SparseVector::unit(2, 0.5)), ParameterError);
}

TEST(Lemmas, SliceAndConeConstants) {
  EXPECT_NEAR(lemma_slice_bound(0.4, 0.05), 0.9, 1e-12);
  EXPECT_NEAR(lemma_slice_bound(0.4, 0.1), 1.8, 1e-12);
  EXPECT_THROW(lemma_slice_bound(0.4, 0.2), ParameterError);
  EXPECT_THROW(lemma_slice_bound(0.4, 0.0), ParameterError);
  EXPECT_NEAR(lemma_cone_factor(0.4), 0.888889, 1e-6);
  const SeedNorm s(coordinate_seed_params(1, 0.4));
  EXPECT_NEAR(sup_norm(SparseVector::unit(1)) / s(SparseVector::unit(1)), 0.8, 1e-9);
}

TEST(Lemmas, SuitePasses) {
  const SuiteReport r = seed_lemma_suite(SeedNorm(coordinate_seed_params(2, 0.25)), 2000, 8);
  EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
}
