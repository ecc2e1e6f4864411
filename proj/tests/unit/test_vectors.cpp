#include <gtest/gtest.h>

#include <cmath>

#include "renormlab/errors.hpp"
#include "renormlab/report.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"
#include "renormlab/vectors.hpp"

using namespace renormlab;

TEST(SparseVector, DuplicatesSumAndZerosVanish) {
  const SparseVector v{{3, 1.0}, {1, 2.0}, {3, -1.0}, {7, 0.0}};
  EXPECT_EQ(v.support_size(), 1u);
  EXPECT_EQ(v[1], 2.0);
  EXPECT_EQ(v[3], 0.0);
  EXPECT_EQ(v.max_index().value(), 1u);
}

TEST(SparseVector, EntriesStaySorted) {
  const SparseVector v = SparseVector::from_entries({{9, 1.0}, {2, -3.0}, {5, 0.5}});
  Index last = 0;
  for (const auto& [i, x] : v.entries()) {
    EXPECT_GT(i, last);
    last = i;
  }
}

TEST(SparseVector, ArithmeticMatchesDenseOracle) {
  CounterRng rng(7, "arith");
  const auto coords = coordinate_range(1, 12);
  for (int k = 0; k < 200; ++k) {
    const SparseVector a = random_vector(rng, coords, 2.0, 0.5);
    const SparseVector b = random_vector(rng, coords, 2.0, 0.5);
    const double s = rng.uniform(-3.0, 3.0);
    const SparseVector c = axpy(s, a, b);
    const SparseVector d = a - b;
    for (Index i = 0; i <= 13; ++i) {
      EXPECT_DOUBLE_EQ(c[i], s * a[i] + b[i]);
      EXPECT_DOUBLE_EQ(d[i], a[i] - b[i]);
    }
  }
}

TEST(SparseVector, SetZeroErases) {
  SparseVector v{{4, 1.0}};
  v.set(4, 0.0);
  EXPECT_TRUE(v.empty());
  EXPECT_FALSE(v.max_index().has_value());
}

TEST(Norms, ClosedFormValues) {
  const SparseVector v{{1, 3.0}, {2, -4.0}};
  EXPECT_EQ(sup_norm(v), 4.0);
  EXPECT_EQ(l1_norm(v), 7.0);
  EXPECT_NEAR(lp_norm(v, 2.0), 5.0, 1e-15);
  EXPECT_NEAR(lp_norm_oracle(2.0, 8)(v), 5.0, 1e-15);
  EXPECT_NEAR(scaled(sup_norm_oracle(), 2.5)(v), 10.0, 1e-15);
}

TEST(Norms, LpRejectsBadExponent) { EXPECT_THROW(lp_norm_oracle(0.5, 4), ParameterError); }

TEST(Norms, SupIsLatticeMonotone) {
  CounterRng rng(3, "lattice");
  const auto coords = coordinate_range(1, 10);
  for (int k = 0; k < 500; ++k) {
    const SparseVector y = random_vector(rng, coords, 1.0, 0.7);
    std::vector<SparseVector::Entry> e;
    for (const auto& [i, v] : y.entries()) e.emplace_back(i, v * rng.uniform(-1.0, 1.0));
    EXPECT_LE(sup_norm(SparseVector::from_entries(e)), sup_norm(y));
  }
}

TEST(Dual, PairingAndNorm) {
  const DualFunctional f(SparseVector{{1, 0.5}, {2, -0.5}});
  EXPECT_EQ(f.dual_norm(), 1.0);
  EXPECT_TRUE(f.is_normalized());
  EXPECT_EQ(pairing(f, SparseVector{{1, 2.0}, {2, 4.0}, {9, 100.0}}), -1.0);
}

TEST(Cone, Sides) {
  const auto sup = sup_norm_oracle();
  const auto f = DualFunctional::unit(1);
  EXPECT_EQ(cone_side(f, 0.6, sup, SparseVector{{1, 1.0}, {2, 0.5}}), ConeSide::Plus);
  EXPECT_EQ(cone_side(f, 0.6, sup, SparseVector{{1, -1.0}, {2, 0.5}}), ConeSide::Minus);
  EXPECT_EQ(cone_side(f, 0.6, sup, SparseVector{{1, 0.5}, {2, 1.0}}), ConeSide::Outside);
  EXPECT_EQ(cone_side(f, 0.6, sup, SparseVector{}), ConeSide::Plus);
}

TEST(Cone, SmallBallAroundOffAxisPointAvoidsCone) {
  const SparseVector x{{2, 1.0}, {3, -0.4}, {1, 0.1}};
  const auto r = fact1_probe(DualFunctional::unit(1), 0.4, x, 2000, 11);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.samples, 2000u);
}

TEST(Cone, ProbeRejectsPointNearAxis) {
  EXPECT_THROW(fact1_probe(DualFunctional::unit(1), 0.4, SparseVector{{1, 1.0}}, 10, 1), HypothesisNotMet);
}

TEST(Rng, DeterministicAndSplittable) {
  CounterRng a(42, "x"), b(42, "x"), c(42, "y");
  for (int i = 0; i < 10; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
  }
  EXPECT_EQ(CounterRng(1).split(5).next_u64(), CounterRng(1).split(5).next_u64());
  EXPECT_NE(CounterRng(1).split(5).next_u64(), CounterRng(1).split(6).next_u64());
}

TEST(Rng, UniformInRange) {
  CounterRng r(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Sampling, RandomUnitVectorHasUnitNorm) {
  CounterRng rng(5, "unit");
  const auto coords = coordinate_range(1, 6);
  for (int i = 0; i < 200; ++i) {
    EXPECT_NEAR(sup_norm(random_unit_vector(rng, coords, sup_norm_oracle(), 0.3)), 1.0, 1e-15);
  }
}

TEST(Report, JsonRoundTrip) {
  const SparseVector v{{1, 0.25}, {10, -3.5}};
  EXPECT_EQ(sparse_vector_from_json(to_json(v)), v);
  const DualFunctional f(SparseVector{{2, 1.0}});
  EXPECT_EQ(dual_functional_from_json(to_json(f)), f);
}

TEST(Report, CheckResultCountsFailures) {
  CheckResult c("c", 0.0);
  c.record(-1.0, [] { return std::string("a"); });
  EXPECT_TRUE(c.pass());
  c.record(0.5, [] { return std::string("b"); });
  c.record(0.7, [] { return std::string("c"); });
  EXPECT_FALSE(c.pass());
  EXPECT_EQ(c.failures, 2u);
  EXPECT_EQ(c.first_failure.value(), "b");
  EXPECT_DOUBLE_EQ(c.worst, 0.7);
}
