#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "renormlab/report.hpp"
#include "renormlab/vectors.hpp"

namespace renormlab {

/// Smooth convex profile phi with phi = 0 on [0, a], a = 1/(1+eps),
/// phi(1) = 1 and phi > 1 beyond 1.
///
/// phi(t) = int_a^t (t-s) w(s) ds / int_a^1 (1-s) w(s) ds with the bump
/// weight w(s) = exp(-1/((s-a)(1-s))) on (a, 1). Since phi'' = w / const,
/// phi is convex and flat exactly on [0, a]; beyond 1 it is affine.
/// Integrals are taken in the normalized variable u = (s-a)/(1-a) and the
/// weight is rescaled by its peak value, which cancels in the ratio and
/// keeps very narrow profiles from underflowing.
class BumpProfile {
 public:
  explicit BumpProfile(double eps, double quadrature_tol = 1e-10);

  double operator()(double t) const;

  [[nodiscard]] double eps() const { return eps_; }
  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double quadrature_tol() const { return tol_; }

 private:
  double weight(double u) const;
  // int_lo^hi (v - u) w(u) du by adaptive Simpson.
  double partial_moment(double lo, double hi, double v) const;

  double eps_;
  double a_;
  double tol_;
  double kappa_;  // 1/(1-a)^2
  std::vector<double> knots_;     // panel boundaries on [0, 1] in u
  std::vector<double> prefix_w_;  // int_0^knot w
  std::vector<double> prefix_uw_; // int_0^knot u w
  double normalizer_ = 0.0;       // int_0^1 (1-u) w du
};

/// phi(t) for the given profile; throws ParameterError for t < 0.
double phi_eval(const BumpProfile& bp, double t);

/// An absorbing convex body {x : level(x) <= 1}, given by an even convex
/// level function vanishing at 0. `bound_hint` returns a first bracket
/// [lo, hi] for the Minkowski functional at x.
struct ImplicitBall {
  std::function<double(const SparseVector&)> level;
  std::function<std::pair<double, double>(const SparseVector&)> bound_hint;
};

/// inf{t > 0 : level(x/t) <= 1}; 0 for x = 0.
double minkowski(const ImplicitBall& ball, const SparseVector& x);

/// Scalar core: smallest t in [lo, hi] with ray_level(t) <= 1 for a
/// non-increasing ray_level; requires ray_level(lo) > 1 or returns lo.
/// The bracket is expanded geometrically if it does not straddle 1.
double ray_minkowski_root(const std::function<double(double)>& ray_level, double lo, double hi);

/// Minkowski functional of {x : phi(n1(x)) + phi(n2(x)) <= 1}. Along a ray
/// the level only depends on n1(x) and n2(x), so each evaluation costs one
/// call of each norm plus a scalar root.
NormOracle combine_norms(const NormOracle& n1, const NormOracle& n2, double eps);

/// Scalar form of combine_norms for precomputed norm values.
double combine_values(const BumpProfile& bp, double v1, double v2);

/// A norm sandwiched as approx <= target <= (1+eta) approx.
struct ApproxNorm {
  NormOracle norm;
  NormOracle target;
  double eta = 0.0;

  double operator()(const SparseVector& x) const { return norm(x); }
};

/// target / sqrt(1+eta).
ApproxNorm rescale_approx(const NormOracle& target, double eta);

/// Minkowski functional of {x : sum_gamma phi(|x_gamma|) <= 1}. Sandwiched
/// between the sup norm and (1+eta) times it, and locally dependent on
/// finitely many coordinates: coordinates below a*value contribute nothing.
NormOracle lfc_sup_approx(double eta);

/// Randomized checks of the combination properties for one pair of norms:
/// exact selection when one norm dominates by the factor 1+eps, and the
/// max <= value <= (1+eps) max sandwich.
SuiteReport combine_property_suite(const NormOracle& n1, const NormOracle& n2, double eps,
                                   std::size_t samples, std::uint64_t seed,
                                   std::size_t section_dim = 16);

/// Finite-difference kink probe: central-difference gradients at x and at
/// x + s v for s in {1e-3, 1e-4}. Smooth norms give gradient differences
/// that shrink with s; `kink_ratio` is max over samples of
/// |dg(1e-4)| / max(|dg(1e-3)|, floor), about 0.1 when smooth and about 1
/// across a kink.
struct SmoothnessProbe {
  double kink_ratio = 0.0;
  double max_difference_small_step = 0.0;
  std::size_t samples = 0;
};
SmoothnessProbe smoothness_probe(const NormOracle& n, std::size_t samples, std::uint64_t seed,
                                 std::span<const Index> coords);
/// The same ratio at one point x along one direction v.
double kink_ratio_at(const NormOracle& n, const SparseVector& x, const SparseVector& v,
                     std::span<const Index> coords);

/// Local finite dependence of lfc_sup_approx(eta): overwriting coordinates
/// whose new magnitude stays below 0.99*a*value (existing small coordinates
/// and fresh ones) must leave the value bit-identical.
SuiteReport lfc_probe(double eta, std::size_t trials, std::uint64_t seed,
                      std::size_t section_dim = 16);

}  // namespace renormlab
