#pragma once

#include <cstdint>

#include "renormlab/report.hpp"
#include "renormlab/vectors.hpp"

namespace renormlab {

/// The data (x0, f0, delta) over a base norm that defines one seed norm.
///
/// Valid parameters satisfy <f0,x0> = 1, |f0|* = 1, base(x0) = 1 and
/// 0 < delta < 1/2. `x0_tolerance` relaxes only the unit-norm requirement on
/// x0 (base(x0) may exceed 1 by that relative amount), which is what
/// rescaled almost-biorthogonal pairs need.
class SeedParams {
 public:
  static SeedParams make(SparseVector x0, DualFunctional f0, double delta, NormOracle base,
                         double x0_tolerance = 1e-9);

  [[nodiscard]] const SparseVector& x0() const { return x0_; }
  [[nodiscard]] const DualFunctional& f0() const { return f0_; }
  [[nodiscard]] double delta() const { return delta_; }
  [[nodiscard]] const NormOracle& base() const { return base_; }
  /// base(x0), cached.
  [[nodiscard]] double x0_norm() const { return x0_norm_; }

 private:
  SeedParams(SparseVector x0, DualFunctional f0, double delta, NormOracle base, double x0_norm)
      : x0_(std::move(x0)), f0_(std::move(f0)), delta_(delta), base_(std::move(base)), x0_norm_(x0_norm) {}

  SparseVector x0_;
  DualFunctional f0_;
  double delta_;
  NormOracle base_;
  double x0_norm_;
};

/// Presets over the sup norm with x0 = f0 = e_i.
SeedParams coordinate_seed_params(Index i, double delta);

/// g(t) = (1-delta) * base(y + (t - <f0,y>) x0) - t. Strictly decreasing in t.
double psi_defect(const SeedParams& p, const SparseVector& y, double t);

struct PsiEvaluation {
  double value = 0.0;
  double residual = 0.0;  // |g(value)|
  double bracket = 0.0;   // upper end of the initial bracket
  int iterations = 0;
};

/// The unique t >= 0 with t = (1-delta) * base(y + (t - <f0,y>) x0),
/// located by bisection on [0, T].
PsiEvaluation psi_detailed(const SeedParams& p, const SparseVector& y);
double psi_eval(const SeedParams& p, const SparseVector& y);

/// Randomized check of subadditivity, positive homogeneity, invariance
/// along x0 and the zero-set characterization, plus the fixed-point
/// residual. Samples live on coordinates [0, section_dim) together with the
/// supports of x0 and f0.
SuiteReport psi_property_suite(const SeedParams& p, std::size_t samples, std::uint64_t seed,
                               std::size_t section_dim = 16);

}  // namespace renormlab
