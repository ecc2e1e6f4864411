#include <gtest/gtest.h>

#include <cmath>

#include "renormlab/analysis.hpp"
#include "renormlab/errors.hpp"

using namespace renormlab;

namespace {

const CascadeNorm& c0() {
  static const CascadeNorm cn = build_cascade(c0_preset());
  return cn;
}

}  // namespace

TEST(Quotient, ClosedFormOnSeed) {
  const SeedNorm s(coordinate_seed_params(1, 0.4));
  // Both one-sided quotients along e2 at the vertex are 0.25.
  EXPECT_NEAR(diff_quotient(s.oracle(), s.vertex(), SparseVector::unit(2), 0.25), 0.5, 1e-9);
  EXPECT_NEAR(diff_quotient(sup_norm_oracle(), SparseVector::unit(1), SparseVector::unit(2), 0.1), 0.0, 1e-15);
  EXPECT_THROW(diff_quotient(sup_norm_oracle(), SparseVector::unit(1), SparseVector::unit(2), 0.0), ParameterError);
}

TEST(Quotient, PropertiesHold) {
  const SuiteReport r = quotient_property_suite(SeedNorm(coordinate_seed_params(1, 0.25)).oracle(), 300, 4);
  EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
}

TEST(Directions, FixedSetOfUnitVectors) {
  const auto& d = direction_set_v1();
  ASSERT_EQ(d.size(), 32u);
  for (const auto& h : d) EXPECT_NEAR(sup_norm(h), 1.0, 1e-15);
  EXPECT_EQ(d[0], SparseVector::unit(1));
  EXPECT_EQ(d[16], (SparseVector{{1, 1.0}, {2, -1.0}}));
  EXPECT_EQ(&direction_set_v1(), &d);
}

TEST(Witness, QuotientExceedsThresholdAtSmallScales) {
  const double eps0 = 0.4 / 16.0;
  for (double tau : {1e-1, 1e-3, 1e-5}) {
    const UgWitness w = ug_witness(c0(), SparseVector::unit(2), tau);
    EXPECT_TRUE(w.pass);
    EXPECT_LT(w.t0, tau);
    EXPECT_GT(w.quotient, eps0);
    EXPECT_DOUBLE_EQ(w.tau_effective, std::min(tau, eps0));
    // Least n != 2 with eta_n/(1+eta_n) 32/delta < tau_eff.
    std::size_t want = 1;
    for (;; ++want) {
      const double eta = c0().config().etas(want);
      if (want != 2 && eta / (1.0 + eta) * 80.0 < w.tau_effective) break;
    }
    EXPECT_EQ(w.n0, want);
    const double eta = c0().config().etas(want);
    EXPECT_DOUBLE_EQ(w.t0, eta / (1.0 + eta) * 80.0);
  }
}

TEST(Witness, RejectsBadInput) {
  EXPECT_THROW(ug_witness(c0(), SparseVector::unit(2, 2.0), 1e-2), ParameterError);
  EXPECT_THROW(ug_witness(c0(), SparseVector::unit(2), 0.0), ParameterError);
  const CascadeNorm small = build_cascade(c0_preset(0.4, {}, Backend::RescaleExact, 4));
  EXPECT_THROW(ug_witness(small, SparseVector::unit(1), 1e-5), NumericalError);
}

TEST(Witness, SweepPasses) {
  const std::vector<SparseVector> dirs(direction_set_v1().begin(), direction_set_v1().begin() + 8);
  const SuiteReport r = ug_witness_sweep(c0(), dirs, {1e-1, 1e-4});
  EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
  EXPECT_EQ(r.details["rows"].size(), 16u);
}

TEST(Dentability, TargetChoiceAndBound) {
  const double K = (8.0 - 0.8) / 0.4;
  const DentabilityTarget t = dentability_target(c0(), 0.01, 100, 3);
  EXPECT_DOUBLE_EQ(t.eps0, std::min(0.1, 0.01 / (2.0 * K)));
  EXPECT_EQ(t.n0, 7u);
  EXPECT_NEAR(t.bound, K * (t.eps0 + t.eta_n0 * 0.8), 1e-15);
  EXPECT_LT(t.bound, 0.01);
  EXPECT_TRUE(t.certified);
  EXPECT_LE(t.diameter.lower, t.bound + 1e-8);
  EXPECT_GT(t.witness_margin, 0.0);
  EXPECT_LE(t.witness_norm, 1.0);
  EXPECT_THROW(dentability_target(c0(), -1.0, 10, 1), ParameterError);
}

TEST(Dentability, ReportPasses) {
  const SuiteReport r = dentability_report(c0(), {0.5, 0.1}, 100, 9);
  EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
}

TEST(Slice, EmptyWitnessIsRejected) {
  const SeedNorm s(coordinate_seed_params(1, 0.4));
  SliceSpec spec{s.oracle(), DualFunctional::unit(1), 0.99, s.oracle(), SparseVector::unit(1, 0.5), {1, 2}};
  EXPECT_THROW(slice_diameter_estimate(spec, 10, 1), NumericalError);
  spec.witness.reset();
  EXPECT_THROW(slice_diameter_estimate(spec, 10, 1), NumericalError);
}

TEST(Slice, SeedSliceRespectsBound) {
  const SeedNorm s(coordinate_seed_params(1, 0.4));
  const double eps = 0.05;
  SliceSpec spec{s.oracle(), DualFunctional::unit(1), 0.8 - eps, s.oracle(), s.vertex(), {1, 2, 3, 4}};
  const SliceDiameter d = slice_diameter_estimate(spec, 300, 5);
  EXPECT_GT(d.points, 10u);
  EXPECT_GT(d.lower, 0.0);
  EXPECT_LE(d.lower, lemma_slice_bound(0.4, eps) + 1e-8);
}

TEST(Estimates, ApproximationSuitePasses) {
  const SuiteReport r = approximation_estimates_suite(SeedNorm(coordinate_seed_params(1, 0.4)), 0.02, 300, 6);
  EXPECT_TRUE(r.pass()) << r.to_json().dump(1);
  const SuiteReport d = derivative_lemma_sweep(SeedNorm(coordinate_seed_params(1, 0.4)), direction_set_v1());
  EXPECT_TRUE(d.pass());
  EXPECT_EQ(d.checks.at(0).checked, 640u);
}
