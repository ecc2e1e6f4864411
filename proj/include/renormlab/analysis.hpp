#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "renormlab/cascade.hpp"
#include "renormlab/report.hpp"
#include "renormlab/seed_norm.hpp"
#include "renormlab/vectors.hpp"

namespace renormlab {

struct QuotientQuery {
  NormOracle norm;
  SparseVector x;
  SparseVector h;
  double t = 0.0;
};

/// (N(x+th) + N(x-th) - 2N(x))/t.
double diff_quotient(const QuotientQuery& q);
double diff_quotient(const NormOracle& n, const SparseVector& x, const SparseVector& h, double t);

/// One witness against uniform Gateaux smoothness in direction h at scale tau.
struct UgWitness {
  std::size_t n0 = 0;
  double t0 = 0.0;
  double quotient = 0.0;
  double tau = 0.0;
  double tau_effective = 0.0;  // min(tau, delta/16)
  double eps0 = 0.0;           // delta/16
  bool pass = false;           // quotient > eps0 (1 - 1e-6) and t0 < tau
};

/// Picks the least n0 with |<f_n0, h>| < delta/(2(4-delta)) and
/// t0 = (eta/(1+eta)) 32/delta < min(tau, delta/16), then evaluates the
/// quotient of the cascade at (1-delta/2) x_n0 with step t0.
/// Throws NumericalError("insufficient stages for tau") if no stage qualifies.
UgWitness ug_witness(const CascadeNorm& cn, const SparseVector& h, double tau);

/// The fixed 32-direction test set, each of sup norm 1: coordinate vectors,
/// normalized sums and differences, and seeded random unit vectors.
const std::vector<SparseVector>& direction_set_v1();

struct SliceSpec {
  NormOracle norm;    // owner of the ball B = {norm <= 1}
  DualFunctional f;
  double level = 0.0; // S = {x in B : <f,x> > level}
  NormOracle metric;
  std::optional<SparseVector> witness;  // a point of S
  std::vector<Index> coords;            // section on which points are drawn
};

struct SliceDiameter {
  double lower = 0.0;  // max sampled pairwise distance
  SparseVector p;
  SparseVector q;
  std::size_t points = 0;
};

/// Lower bound on the metric diameter of the slice from sampled points:
/// segments from the witness towards random sphere points, stopped before
/// they leave the slice, plus accepted random perturbations of the witness.
/// Throws NumericalError("slice possibly empty") without a usable witness.
SliceDiameter slice_diameter_estimate(const SliceSpec& s, std::size_t samples, std::uint64_t seed);

struct DentabilityTarget {
  double r = 0.0;
  double eps0 = 0.0;
  std::size_t n0 = 0;
  double eta_n0 = 0.0;
  double bound = 0.0;          // ((8-2delta)/delta)(eps0 + eta_n0 (1-delta/2))
  double witness_norm = 0.0;   // cascade((1-delta/2) x_n0)
  double witness_margin = 0.0; // <f_n0, w> - level
  SliceDiameter diameter;
  bool certified = false;
};

/// Chooses eps0 = min(delta/4, r/(2K)) with K = (8-2delta)/delta and the
/// least n0 with K(eps0 + eta_n0 (1-delta/2)) < r, then samples the cascade
/// slice S(B, f_n0, 1-delta/2-eps0) in the seed_n0 metric.
/// Throws NumericalError naming the required eta when no stage qualifies.
DentabilityTarget dentability_target(const CascadeNorm& cn, double r, std::size_t samples,
                                     std::uint64_t seed);
SuiteReport dentability_report(const CascadeNorm& cn, const std::vector<double>& targets,
                               std::size_t samples, std::uint64_t seed);

/// The witness sweep over a direction set and a list of scales.
SuiteReport ug_witness_sweep(const CascadeNorm& cn, const std::vector<SparseVector>& directions,
                             const std::vector<double>& taus);

/// One-sided quotient at the vertex against the derivative bound, for each
/// direction and 20 admissible steps t_max j/21.
SuiteReport derivative_lemma_sweep(const SeedNorm& s, const std::vector<SparseVector>& directions);

/// The two estimates for a norm sandwiched by the seed norm with factor
/// 1+eta (realized by rescaling): the quotient lower bound at the vertex and
/// the slice diameter bound in the seed metric.
SuiteReport approximation_estimates_suite(const SeedNorm& s, double eta, std::size_t samples,
                                          std::uint64_t seed, std::size_t section_dim = 16);

/// Convexity (quotient >= 0) and homogeneity of diff_quotient.
SuiteReport quotient_property_suite(const NormOracle& n, std::size_t samples, std::uint64_t seed,
                                    std::size_t section_dim = 16);

}  // namespace renormlab
