#pragma once

#include <optional>

#include "renormlab/psi.hpp"
#include "renormlab/report.hpp"
#include "renormlab/vectors.hpp"

namespace renormlab {

struct SeedEvaluation {
  double value = 0.0;
  ConeSide branch = ConeSide::Outside;
  double psi = 0.0;  // psi(y) on Plus, psi(-y) on Minus, 0 outside
};

/// The renorming whose unit ball is the closed convex hull of the part of
/// the base ball outside C(f0, 1-delta) together with +-(1-delta/2) x0.
///
/// Outside the cone the value is the base norm; on C+(f0, 1-delta) it is
/// psi(y)/(1-delta) + (<f0,y> - psi(y))/(1-delta/2), mirrored on C-.
class SeedNorm {
 public:
  explicit SeedNorm(SeedParams params);

  [[nodiscard]] SeedEvaluation evaluate(const SparseVector& y) const;
  double operator()(const SparseVector& y) const { return evaluate(y).value; }

  [[nodiscard]] const SeedParams& params() const { return params_; }
  [[nodiscard]] double delta() const { return params_.delta(); }
  /// (1 - delta/2) x0, the vertex of the unit ball.
  [[nodiscard]] SparseVector vertex() const;
  /// Shares this norm; lower constant 1 and upper 1/(1-delta) relative to
  /// the base norm's own constants.
  [[nodiscard]] NormOracle oracle() const;

 private:
  SeedParams params_;
};

SeedEvaluation seed_eval(const SeedNorm& s, const SparseVector& y);

struct DerivativeBound {
  double rhs = 0.0;    // lower bound for the one-sided quotient at the vertex
  double t_max = 0.0;  // admissible steps are 0 < t < t_max
};

/// Lower bound on (seed(vertex + t h) - 1)/t for base-unit h.
DerivativeBound lemma_derivative_bound(const SeedNorm& s, const SparseVector& h);
/// Upper bound ((8-2delta)/delta)*eps on the diameter of the slice
/// S(B_seed, f0, 1-delta/2-eps); requires 0 < eps < delta/2.
double lemma_slice_bound(double delta, double eps);
/// (4-2delta)/(4-delta): base(x) <= factor*seed(x) on C(f0, 1-delta/4).
double lemma_cone_factor(double delta);

/// Writes a Plus-cone point y with seed(y) = 1 as a z1 + b (1-delta/2) x0
/// with a + b = 1, <f0,z1> = (1-delta) base(z1) and base(z1) <= 1.
struct BallDecomposition {
  double a = 0.0;
  double b = 0.0;
  SparseVector z1;
  double reconstruction_error = 0.0;  // base(y - a z1 - b vertex)
  double cone_defect = 0.0;           // |<f0,z1> - (1-delta) base(z1)|
};
std::optional<BallDecomposition> decompose_unit_point(const SeedNorm& s, const SparseVector& y);

/// Randomized checks of the seed norm: equivalence constants, symmetry,
/// the unit-ball decomposition and, for coordinate presets, the lattice
/// property.
SuiteReport seed_norm_invariant_suite(const SeedNorm& s, std::size_t samples, std::uint64_t seed,
                                      std::size_t section_dim = 16);

/// Randomized checks of the derivative, slice and cone estimates.
SuiteReport seed_lemma_suite(const SeedNorm& s, std::size_t samples, std::uint64_t seed,
                             std::size_t section_dim = 16);

}  // namespace renormlab
