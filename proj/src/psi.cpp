#include "renormlab/psi.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"

namespace renormlab {

SeedParams SeedParams::make(SparseVector x0, DualFunctional f0, double delta, NormOracle base,
                            double x0_tolerance) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw ParameterError("seed parameters: delta must lie in (0, 1/2)");
  }
  if (!f0.is_normalized(1e-9)) {
    throw ParameterError("seed parameters: f0 must have dual norm 1");
  }
  if (std::abs(pairing(f0, x0) - 1.0) > 1e-9) {
    throw ParameterError("seed parameters: <f0,x0> must equal 1");
  }
  const double x0_norm = base(x0);
  if (x0_norm < 1.0 - 1e-9 || x0_norm > 1.0 + std::max(x0_tolerance, 1e-9)) {
    throw ParameterError("seed parameters: x0 must be a unit vector of the base norm");
  }
  if (!((1.0 - delta) * x0_norm < 1.0)) {
    throw ParameterError("seed parameters: (1-delta)*|x0| must be below 1");
  }
  return SeedParams(std::move(x0), std::move(f0), delta, std::move(base), x0_norm);
}

SeedParams coordinate_seed_params(Index i, double delta) {
  return SeedParams::make(SparseVector::unit(i), DualFunctional::unit(i), delta, sup_norm_oracle());
}

double psi_defect(const SeedParams& p, const SparseVector& y, double t) {
  const double shift = t - pairing(p.f0(), y);
  return (1.0 - p.delta()) * p.base()(axpy(shift, p.x0(), y)) - t;
}

PsiEvaluation psi_detailed(const SeedParams& p, const SparseVector& y) {
  const double c = pairing(p.f0(), y);
  const double contraction = (1.0 - p.delta()) * p.x0_norm();
  auto g = [&](double t) { return (1.0 - p.delta()) * p.base()(axpy(t - c, p.x0(), y)) - t; };

  PsiEvaluation out;
  const double g0 = g(0.0);
  if (g0 <= 0.0) {
    // g(0) >= 0 always; equality means y lies on the x0 axis.
    out.residual = std::abs(g0);
    return out;
  }

  // g(T) <= 0 for this T because the norm term grows at rate at most
  // (1-delta)|x0| in t. The small inflation keeps the sign robust to rounding.
  double hi = (1.0 - p.delta()) * (p.base()(y) + std::abs(c) * p.x0_norm()) / (1.0 - contraction);
  hi *= 1.0 + 1e-9;
  out.bracket = hi;
  double g_hi = g(hi);
  if (g_hi > 0.0) {
    throw InternalInvariantError("psi: bracket failure, the base norm oracle is inconsistent");
  }
  double lo = 0.0;
  double g_lo = g0;
  for (int it = 0; it < 128; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) {
      break;
    }
    ++out.iterations;
    const double gm = g(mid);
    if (gm == 0.0) {
      out.value = mid;
      out.residual = 0.0;
      return out;
    }
    if (gm > 0.0) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
      g_hi = gm;
    }
  }
  if (std::abs(g_lo) < std::abs(g_hi)) {
    out.value = lo;
    out.residual = std::abs(g_lo);
  } else {
    out.value = hi;
    out.residual = std::abs(g_hi);
  }
  return out;
}

double psi_eval(const SeedParams& p, const SparseVector& y) { return psi_detailed(p, y).value; }

namespace {

std::string fmt_pair(const SparseVector& y, const SparseVector& z) {
  return "y=" + describe(y) + " z=" + describe(z);
}

}  // namespace

SuiteReport psi_property_suite(const SeedParams& p, std::size_t samples, std::uint64_t seed,
                               std::size_t section_dim) {
  std::set<Index> coord_set;
  for (Index i = 0; i < section_dim; ++i) {
    coord_set.insert(i);
  }
  for (const auto& e : p.x0().entries()) {
    coord_set.insert(e.first);
  }
  for (const auto& e : p.f0().coefficients().entries()) {
    coord_set.insert(e.first);
  }
  const std::vector<Index> coords(coord_set.begin(), coord_set.end());

  SuiteReport report;
  report.suite = "psi";
  report.property = "psi-fixed-point-properties";
  report.seed = seed;
  CheckResult residual("fixed_point_residual", 1e-10);
  CheckResult subadditive("subadditivity", 1e-8);
  CheckResult homogeneous("positive_homogeneity", 1e-8);
  CheckResult translation("x0_translation_invariance", 1e-8);
  CheckResult zero_set("zero_set_characterization", 1e-8);
  CheckResult uniqueness("strictly_below_diagonal_past_root", 0.0);
  CheckResult cone_bound("psi_below_pairing_on_plus_cone", 1e-8);

  const double delta = p.delta();
  const auto& base = p.base();
  CounterRng root(seed, "psi_property_suite");
  for (std::size_t s = 0; s < samples; ++s) {
    CounterRng rng = root.split(s);
    const double density = rng.uniform(0.2, 1.0);
    SparseVector y = random_vector(rng, coords, rng.uniform(0.1, 3.0), density);
    SparseVector z = random_vector(rng, coords, rng.uniform(0.1, 3.0), density);
    // Bias a quarter of the samples towards the cone around x0.
    if (rng.below(4) == 0) {
      y = axpy(rng.sign() * rng.uniform(1.0, 4.0) * base(y), p.x0(), y);
    }
    const double lambda = rng.uniform(0.0, 5.0);
    const double mu = rng.uniform(-5.0, 5.0);
    const double scale = std::max({1.0, base(y), base(z)});

    const PsiEvaluation py = psi_detailed(p, y);
    residual.record(py.residual - 1e-10 * std::max(1.0, base(y)),
                    [&] { return "y=" + describe(y); });

    const double pz = psi_eval(p, z);
    subadditive.record(psi_eval(p, y + z) - py.value - pz - 1e-8 * scale,
                       [&] { return fmt_pair(y, z); });

    homogeneous.record(std::abs(psi_eval(p, lambda * y) - lambda * py.value) -
                           1e-8 * scale * std::max(1.0, lambda),
                       [&] { return "y=" + describe(y) + " lambda=" + std::to_string(lambda); });

    translation.record(std::abs(psi_eval(p, axpy(mu, p.x0(), y)) - py.value) -
                           1e-8 * scale * std::max(1.0, std::abs(mu)),
                       [&] { return "y=" + describe(y) + " mu=" + std::to_string(mu); });

    // Points on the axis have psi = 0; elsewhere the distance to the axis is
    // controlled by psi, so psi = 0 forces y onto the axis.
    const double c = pairing(p.f0(), y);
    const double off_axis = base(axpy(-c, p.x0(), y));
    zero_set.record(off_axis - py.value * (1.0 / (1.0 - delta) + p.x0_norm()) - 1e-8 * scale,
                    [&] { return "y=" + describe(y); });
    const double axis_mu = rng.uniform(-3.0, 3.0);
    const SparseVector on_axis = axis_mu * p.x0();
    zero_set.record(psi_eval(p, on_axis) - 1e-8 * std::max(1.0, std::abs(axis_mu)),
                    [&] { return "axis point " + describe(on_axis); });

    for (double step : {0.1, 1.0}) {
      uniqueness.record_bool(psi_defect(p, y, py.value + step * scale) < 0.0,
                             [&] { return "y=" + describe(y); });
    }

    if (cone_side_from(c, base(y), 1.0 - delta) == ConeSide::Plus) {
      cone_bound.record(py.value - c - 1e-8 * scale, [&] { return "y=" + describe(y); });
    }
  }
  report.checks = {residual, subadditive, homogeneous, translation, zero_set, uniqueness, cone_bound};
  report.details["delta"] = delta;
  report.details["samples"] = samples;
  report.details["section_dim"] = section_dim;
  return report;
}

}  // namespace renormlab
