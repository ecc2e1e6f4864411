#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "renormlab/errors.hpp"
#include "renormlab/psi.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"

using namespace renormlab;

namespace {

// For x0 = f0 = e_i over sup, t = (1-delta) max(|t|, max_{j != i} |y_j|)
// solves to (1-delta) times the off-axis sup.
double psi_oracle(Index i, double delta, const SparseVector& y) {
  double m = 0.0;
  for (const auto& [j, v] : y.entries())
    if (j != i) m = std::max(m, std::abs(v));
  return (1.0 - delta) * m;
}

}  // namespace

TEST(Psi, WorkedValues) {
  const SeedParams p = coordinate_seed_params(1, 0.4);
  EXPECT_NEAR(psi_eval(p, SparseVector::unit(1)), 0.0, 1e-12);
  EXPECT_NEAR(psi_eval(p, SparseVector::unit(2)), 0.6, 1e-10);
  EXPECT_NEAR(psi_eval(p, SparseVector{{1, 0.8}, {2, 0.5}}), 0.3, 1e-10);
  EXPECT_NEAR(psi_eval(p, SparseVector::unit(2, 2.0)), 1.2, 1e-10);
}

TEST(Psi, MatchesClosedFormOnCoordinatePresets) {
  for (double delta : {0.1, 0.25, 0.4}) {
    for (Index i : {1u, 4u}) {
      const SeedParams p = coordinate_seed_params(i, delta);
      CounterRng rng(17, "psi-oracle");
      const auto coords = coordinate_range(1, 10);
      for (int k = 0; k < 500; ++k) {
        const SparseVector y = random_vector(rng, coords, rng.uniform(0.1, 5.0), 0.6);
        const double want = psi_oracle(i, delta, y);
        EXPECT_NEAR(psi_eval(p, y), want, 1e-10 * std::max(1.0, sup_norm(y)));
      }
    }
  }
}

TEST(Psi, ResidualIsSmall) {
  const SeedParams p = coordinate_seed_params(2, 0.25);
  const auto e = psi_detailed(p, SparseVector{{1, 0.3}, {2, -7.0}, {5, 2.0}});
  EXPECT_LE(e.residual, 1e-10 * 7.0);
  EXPECT_GT(e.bracket, e.value);
}

TEST(Psi, DefectIsDecreasing) {
  const SeedParams p = coordinate_seed_params(1, 0.4);
  const SparseVector y{{1, 0.2}, {3, 0.9}};
  double prev = psi_defect(p, y, 0.0);
  for (double t = 0.05; t < 3.0; t += 0.05) {
    const double g = psi_defect(p, y, t);
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(Psi, NonUnitX0IsHandled) {
  // x0 = e1 + 0.5 e2 with f0 = e1 still satisfies the seed hypotheses.
  const SeedParams p =
      SeedParams::make(SparseVector{{1, 1.0}, {2, 0.5}}, DualFunctional::unit(1), 0.3, sup_norm_oracle());
  const SparseVector y{{1, 0.4}, {2, -1.0}, {3, 0.25}};
  const double t = psi_eval(p, y);
  EXPECT_NEAR(psi_defect(p, y, t), 0.0, 1e-10);
  EXPECT_NEAR(psi_eval(p, axpy(3.7, p.x0(), y)), t, 1e-9);
}

TEST(Psi, PropertySuitePasses) {
  for (double delta : {0.1, 0.25, 0.4}) {
    const SuiteReport r = psi_property_suite(coordinate_seed_params(1, delta), 1000, 99);
    EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
  }
}

TEST(SeedParams, RejectsInvalidData) {
  const auto sup = sup_norm_oracle();
  EXPECT_THROW(coordinate_seed_params(1, 0.5), ParameterError);
  EXPECT_THROW(coordinate_seed_params(1, 0.0), ParameterError);
  EXPECT_THROW(SeedParams::make(SparseVector::unit(1, 2.0), DualFunctional::unit(1), 0.3, sup), ParameterError);
  EXPECT_THROW(SeedParams::make(SparseVector::unit(1), DualFunctional::unit(2), 0.3, sup), ParameterError);
}
