#include <gtest/gtest.h>

#include <cmath>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"
#include "renormlab/seed_norm.hpp"
#include "renormlab/smooth.hpp"

using namespace renormlab;

namespace {

// Plain composite Simpson on the original variable s, no rescaling.
double phi_oracle(double eps, double t) {
  const double a = 1.0 / (1.0 + eps);
  if (t <= a) return 0.0;
  auto w = [&](double s) {
    if (s <= a || s >= 1.0) return 0.0;
    return std::exp(-1.0 / ((s - a) * (1.0 - s)));
  };
  auto integral = [&](double hi, double pivot) {
    const int n = 40000;
    const double h = (hi - a) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double s = a + i * h;
      const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += c * (pivot - s) * w(s);
    }
    return acc * h / 3.0;
  };
  const double norm = integral(1.0, 1.0);
  if (t <= 1.0) return integral(t, t) / norm;
  // Affine continuation: phi(t) = phi(1) + phi'(1)(t-1) with phi'(1) = int w / norm.
  const int n = 40000;
  const double h = (1.0 - a) / n;
  double slope = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    slope += c * w(a + i * h);
  }
  slope *= h / 3.0;
  return 1.0 + slope / norm * (t - 1.0);
}

double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Profile, FlatThenUnit) {
  const BumpProfile bp(0.1);
  EXPECT_DOUBLE_EQ(bp.a(), 1.0 / 1.1);
  EXPECT_EQ(bp(0.0), 0.0);
  EXPECT_EQ(bp(0.9), 0.0);
  EXPECT_NEAR(bp(1.0), 1.0, 1e-12);
  EXPECT_GT(bp(1.01), 1.0);
  EXPECT_THROW(phi_eval(bp, -0.1), ParameterError);
  EXPECT_THROW(BumpProfile(0.0), ParameterError);
}

TEST(Profile, MatchesIndependentQuadrature) {
  for (double eps : {0.1, 0.5}) {
    const BumpProfile bp(eps);
    for (double t : {0.93, 0.95, 0.97, 0.99, 1.0, 1.2}) {
      if (t <= bp.a()) continue;
      EXPECT_NEAR(bp(t), phi_oracle(eps, t), 1e-8) << "eps " << eps << " t " << t;
    }
  }
}

TEST(Profile, ConvexAndNondecreasing) {
  const BumpProfile bp(0.05);
  double prev = 0.0, prev_slope = 0.0;
  for (double t = 0.9; t < 1.1; t += 0.001) {
    const double v = bp(t), v2 = bp(t + 0.001);
    EXPECT_GE(v, prev - 1e-14);
    EXPECT_GE(v2 - v, prev_slope - 1e-10);
    prev = v;
    prev_slope = v2 - v;
  }
}

TEST(Combine, EqualSupNormsGiveInverseHalfLevel) {
  const double eps = 0.1;
  const double s = bisect([&](double t) { return 2.0 * phi_oracle(eps, t) - 1.0; }, 1.0 / 1.1, 1.0);
  const NormOracle c = combine_norms(sup_norm_oracle(), sup_norm_oracle(), eps);
  EXPECT_NEAR(c(SparseVector::unit(1)), 1.0 / s, 1e-8);
}

TEST(Combine, DominatedPairSelectsLarger) {
  const NormOracle sup = sup_norm_oracle();
  const NormOracle c = combine_norms(sup, scaled(sup, 2.0), 0.1);
  CounterRng rng(4, "dominated");
  const auto coords = coordinate_range(1, 10);
  for (int k = 0; k < 200; ++k) {
    const SparseVector x = random_vector(rng, coords, 3.0, 0.5);
    EXPECT_NEAR(c(x), 2.0 * sup(x), 1e-9 * sup(x));
  }
  EXPECT_EQ(combine_values(BumpProfile(0.1), 1.0, 2.0), 2.0);
  EXPECT_EQ(combine_values(BumpProfile(0.1), 0.0, 0.0), 0.0);
}

TEST(Combine, SandwichAcrossPairs) {
  const NormOracle sup = sup_norm_oracle();
  const NormOracle seed = SeedNorm(coordinate_seed_params(1, 0.4)).oracle();
  const SuiteReport a = combine_property_suite(sup, seed, 0.01, 500, 3);
  const SuiteReport b = combine_property_suite(lp_norm_oracle(2.0, 16), sup, 0.1, 500, 3);
  EXPECT_TRUE(a.pass()) << a.to_json().dump(1);
  EXPECT_TRUE(b.pass()) << b.to_json().dump(1);
}

TEST(Minkowski, EuclideanBall) {
  ImplicitBall ball{[](const SparseVector& x) { return lp_norm(x, 2.0) * lp_norm(x, 2.0); },
                    [](const SparseVector& x) { return std::pair{0.5 * sup_norm(x), 4.0 * sup_norm(x)}; }};
  EXPECT_NEAR(minkowski(ball, SparseVector{{1, 3.0}, {2, 4.0}}), 5.0, 1e-12);
  EXPECT_EQ(minkowski(ball, SparseVector{}), 0.0);
}

TEST(Approx, RescaleOfSeed) {
  const NormOracle seed = SeedNorm(coordinate_seed_params(1, 0.4)).oracle();
  const ApproxNorm a = rescale_approx(seed, 0.21);
  EXPECT_NEAR(a(SparseVector::unit(1)), 1.25 / 1.1, 1e-12);
  EXPECT_THROW(rescale_approx(seed, 0.0), ParameterError);
}

TEST(Lfc, UnitVectorAndSandwich) {
  const NormOracle l = lfc_sup_approx(0.1);
  EXPECT_NEAR(l(SparseVector::unit(1)), 1.0, 1e-12);
  CounterRng rng(6, "lfc");
  const auto coords = coordinate_range(1, 10);
  for (int k = 0; k < 200; ++k) {
    const SparseVector x = random_vector(rng, coords, 2.0, 0.7);
    const double v = l(x), s = sup_norm(x);
    EXPECT_GE(v, s * (1.0 - 1e-12));
    EXPECT_LE(v, 1.1 * s * (1.0 + 1e-12));
  }
}

TEST(Lfc, FlatCoordinatesDoNotMatter) {
  const NormOracle l = lfc_sup_approx(0.1);
  const SparseVector x{{1, 1.0}, {2, 0.2}};
  const double v = l(x);
  SparseVector y = x;
  y.set(2, -0.5);
  y.set(40, 0.7);
  EXPECT_EQ(l(y), v);
  const SuiteReport r = lfc_probe(0.1, 300, 2);
  EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
}

TEST(Smoothness, KinkIsVisibleOnSupButNotOnCombination) {
  const auto coords = coordinate_range(1, 2);
  const SparseVector x{{1, 1.0}, {2, 1.0}};
  const SparseVector v{{1, 1.0}, {2, -1.0}};
  const double sup_ratio = kink_ratio_at(sup_norm_oracle(), x, v, coords);
  const double smooth_ratio = kink_ratio_at(lfc_sup_approx(0.1), x, v, coords);
  EXPECT_GT(sup_ratio, 0.5);
  EXPECT_LT(smooth_ratio, sup_ratio);
}
