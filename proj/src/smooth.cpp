#include "renormlab/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"

namespace renormlab {

namespace {

constexpr int kPanels = 64;  // even, so u = 1/2 (the weight's peak) is a knot
constexpr int kMaxDepth = 60;

template <typename F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
    return left + right + diff / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (!(b > a)) {
    return 0.0;
  }
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, kMaxDepth);
}

}  // namespace

BumpProfile::BumpProfile(double eps, double quadrature_tol)
    : eps_(eps), a_(1.0 / (1.0 + eps)), tol_(quadrature_tol) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ParameterError("BumpProfile: eps must be positive");
  }
  if (!(quadrature_tol > 0.0)) {
    throw ParameterError("BumpProfile: quadrature tolerance must be positive");
  }
  const double width = 1.0 - a_;
  kappa_ = 1.0 / (width * width);
  // Absolute tolerance relative to the size of int w, which behaves like
  // sqrt(pi / (16 kappa)) for narrow profiles.
  const double scale = std::min(1.0, std::sqrt(std::numbers::pi / (16.0 * kappa_)));
  const double abs_tol = tol_ * scale / kPanels;

  knots_.resize(kPanels + 1);
  prefix_w_.assign(kPanels + 1, 0.0);
  prefix_uw_.assign(kPanels + 1, 0.0);
  for (int k = 0; k <= kPanels; ++k) {
    knots_[k] = static_cast<double>(k) / kPanels;
  }
  for (int k = 0; k < kPanels; ++k) {
    const double lo = knots_[k];
    const double hi = knots_[k + 1];
    prefix_w_[k + 1] = prefix_w_[k] + adaptive_simpson([this](double u) { return weight(u); }, lo,
                                                       hi, abs_tol);
    prefix_uw_[k + 1] = prefix_uw_[k] + adaptive_simpson(
                                            [this](double u) { return u * weight(u); }, lo, hi,
                                            abs_tol);
  }
  normalizer_ = prefix_w_[kPanels] - prefix_uw_[kPanels];
  if (!(normalizer_ > 0.0)) {
    throw NumericalError("BumpProfile: degenerate normalization constant");
  }
}

double BumpProfile::weight(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    return 0.0;
  }
  const double d = 1.0 - 2.0 * u;
  return std::exp(-kappa_ * d * d / (u * (1.0 - u)));
}

double BumpProfile::partial_moment(double lo, double hi, double v) const {
  const double scale = std::min(1.0, std::sqrt(std::numbers::pi / (16.0 * kappa_)));
  return adaptive_simpson([this, v](double u) { return (v - u) * weight(u); }, lo, hi,
                          tol_ * scale / kPanels);
}

double BumpProfile::operator()(double t) const {
  if (t <= a_) {
    return 0.0;
  }
  const double v = (t - a_) / (1.0 - a_);
  if (t >= 1.0) {
    // Affine continuation; equals 1 exactly at t = 1.
    const double vv = t == 1.0 ? 1.0 : v;
    return (vv * prefix_w_[kPanels] - prefix_uw_[kPanels]) / normalizer_;
  }
  const int k = std::min(kPanels - 1, static_cast<int>(v * kPanels));
  const double knot = knots_[k];
  const double j = v * prefix_w_[k] - prefix_uw_[k] + partial_moment(knot, v, v);
  return std::max(0.0, j / normalizer_);
}

double phi_eval(const BumpProfile& bp, double t) {
  if (t < 0.0) {
    throw ParameterError("phi_eval: t must be non-negative");
  }
  return bp(t);
}

double ray_minkowski_root(const std::function<double(double)>& ray_level, double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw ParameterError("ray_minkowski_root: need 0 < lo <= hi");
  }
  if (ray_level(lo) <= 1.0) {
    return lo;
  }
  int expansions = 0;
  while (ray_level(hi) > 1.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 200 || !std::isfinite(hi)) {
      throw NumericalError("minkowski: unbounded or degenerate body");
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (ray_level(mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double minkowski(const ImplicitBall& ball, const SparseVector& x) {
  if (x.empty()) {
    return 0.0;
  }
  auto [lo, hi] = ball.bound_hint(x);
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw ParameterError("minkowski: bound hint must satisfy 0 < lo <= hi");
  }
  auto ray = [&](double t) { return ball.level((1.0 / t) * x); };
  int shrinks = 0;
  while (ray(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
    if (++shrinks > 200 || lo == 0.0) {
      throw NumericalError("minkowski: unbounded or degenerate body");
    }
  }
  return ray_minkowski_root(ray, lo, hi);
}

double combine_values(const BumpProfile& bp, double v1, double v2) {
  const double m = std::max(v1, v2);
  if (m == 0.0) {
    return 0.0;
  }
  // At t = m one term is phi(1) = 1, so the root lies in [m, (1+eps) m],
  // and it is exactly m when the other ratio is in the flat region.
  auto ray = [&](double t) { return bp(v1 / t) + bp(v2 / t); };
  return ray_minkowski_root(ray, m, (1.0 + bp.eps()) * m);
}

NormOracle combine_norms(const NormOracle& n1, const NormOracle& n2, double eps) {
  auto profile = std::make_shared<const BumpProfile>(eps);
  const double lower = std::max(n1.lower_const(), n2.lower_const());
  const double upper = (1.0 + eps) * std::max(n1.upper_const(), n2.upper_const());
  return NormOracle(
      [n1, n2, profile](const SparseVector& x) { return combine_values(*profile, n1(x), n2(x)); },
      lower, upper, Provenance::Combined, "combine(" + n1.label() + "," + n2.label() + ")");
}

ApproxNorm rescale_approx(const NormOracle& target, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ParameterError("rescale_approx: eta must be positive");
  }
  const double factor = 1.0 / std::sqrt(1.0 + eta);
  NormOracle n([target, factor](const SparseVector& x) { return factor * target(x); },
               factor * target.lower_const(), factor * target.upper_const(), Provenance::Approx,
               "rescale(" + target.label() + ")");
  return ApproxNorm{std::move(n), target, eta};
}

NormOracle lfc_sup_approx(double eta) {
  auto profile = std::make_shared<const BumpProfile>(eta);
  ImplicitBall ball;
  ball.level = [profile](const SparseVector& x) {
    double sum = 0.0;
    for (const auto& e : x.entries()) {
      sum += (*profile)(std::abs(e.second));
    }
    return sum;
  };
  ball.bound_hint = [eta](const SparseVector& x) {
    const double m = sup_norm(x);
    return std::pair<double, double>{m, (1.0 + eta) * m};
  };
  return NormOracle([ball](const SparseVector& x) { return minkowski(ball, x); }, 1.0, 1.0 + eta,
                    Provenance::Approx, "lfc_sup(eta=" + std::to_string(eta) + ")");
}

SuiteReport combine_property_suite(const NormOracle& n1, const NormOracle& n2, double eps,
                                   std::size_t samples, std::uint64_t seed,
                                   std::size_t section_dim) {
  const BumpProfile profile(eps);
  const NormOracle combined = combine_norms(n1, n2, eps);
  const auto coords = coordinate_range(0, section_dim);

  SuiteReport report;
  report.suite = "combine";
  report.property = "smooth-combination";
  report.seed = seed;
  CheckResult selection("selection_when_dominated", 1e-8);
  CheckResult lower("max_le_combined", 1e-8);
  CheckResult upper("combined_le_1_plus_eps_max", 1e-8);
  CheckResult homogeneity("positive_homogeneity", 1e-9);
  std::size_t dominated = 0;

  CounterRng root(seed, "combine_property_suite:" + n1.label() + "|" + n2.label());
  for (std::size_t k = 0; k < samples; ++k) {
    CounterRng rng = root.split(k);
    const SparseVector x = random_vector(rng, coords, rng.uniform(0.1, 3.0), rng.uniform(0.2, 1.0));
    const double v1 = n1(x);
    const double v2 = n2(x);
    const double value = combine_values(profile, v1, v2);
    const double m = std::max(v1, v2);
    lower.record(m - value - 1e-8 * m, [&] { return "x=" + describe(x); });
    upper.record(value - (1.0 + eps) * m - 1e-8 * m, [&] { return "x=" + describe(x); });
    if (v2 <= v1 / (1.0 + eps)) {
      ++dominated;
      selection.record(std::abs(value - v1) - 1e-8 * v1, [&] { return "x=" + describe(x); });
    } else if (v1 <= v2 / (1.0 + eps)) {
      ++dominated;
      selection.record(std::abs(value - v2) - 1e-8 * v2, [&] { return "x=" + describe(x); });
    }
    const double lambda = rng.uniform(0.01, 10.0);
    homogeneity.record(std::abs(combined(lambda * x) - lambda * value) - 1e-9 * lambda * value,
                       [&] { return "x=" + describe(x); });
  }
  report.checks = {lower, upper, homogeneity};
  if (selection.checked > 0) {
    report.checks.insert(report.checks.begin(), selection);
  }
  report.details["pair"] = n1.label() + " | " + n2.label();
  report.details["eps"] = eps;
  report.details["samples"] = samples;
  report.details["dominated_samples"] = dominated;
  report.details["profile"] = {{"eps", profile.eps()}, {"a", profile.a()},
                               {"quadrature_tol", profile.quadrature_tol()}};
  return report;
}

namespace {

std::vector<double> fd_gradient(const NormOracle& n, const SparseVector& x,
                                std::span<const Index> coords, double h) {
  std::vector<double> g;
  g.reserve(coords.size());
  for (Index c : coords) {
    const SparseVector e = SparseVector::unit(c, h);
    g.push_back((n(x + e) - n(x - e)) / (2.0 * h));
  }
  return g;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace

double kink_ratio_at(const NormOracle& n, const SparseVector& x, const SparseVector& v,
                     std::span<const Index> coords) {
  constexpr double kFdStep = 1e-6;
  constexpr double kFloor = 1e-7;
  const auto g0 = fd_gradient(n, x, coords, kFdStep);
  const double d_big = max_abs_diff(g0, fd_gradient(n, axpy(1e-3, v, x), coords, kFdStep));
  const double d_small = max_abs_diff(g0, fd_gradient(n, axpy(1e-4, v, x), coords, kFdStep));
  return d_small / std::max(d_big, kFloor);
}

SmoothnessProbe smoothness_probe(const NormOracle& n, std::size_t samples, std::uint64_t seed,
                                 std::span<const Index> coords) {
  constexpr double kFdStep = 1e-6;
  constexpr double kFloor = 1e-7;
  SmoothnessProbe out;
  CounterRng root(seed, "smoothness_probe");
  for (std::size_t k = 0; k < samples; ++k) {
    CounterRng rng = root.split(k);
    const SparseVector x = random_vector(rng, coords, 1.0);
    const SparseVector v = random_unit_vector(rng, coords, sup_norm_oracle());
    const auto g0 = fd_gradient(n, x, coords, kFdStep);
    const double d_big = max_abs_diff(g0, fd_gradient(n, axpy(1e-3, v, x), coords, kFdStep));
    const double d_small = max_abs_diff(g0, fd_gradient(n, axpy(1e-4, v, x), coords, kFdStep));
    out.kink_ratio = std::max(out.kink_ratio, d_small / std::max(d_big, kFloor));
    out.max_difference_small_step = std::max(out.max_difference_small_step, d_small);
    ++out.samples;
  }
  return out;
}

SuiteReport lfc_probe(double eta, std::size_t trials, std::uint64_t seed, std::size_t section_dim) {
  const NormOracle n = lfc_sup_approx(eta);
  const double a = 1.0 / (1.0 + eta);
  const auto coords = coordinate_range(0, section_dim);

  SuiteReport report;
  report.suite = "lfc";
  report.property = "local-finite-dependence";
  report.seed = seed;
  CheckResult invariance("flat_coordinate_invariance", 0.0);
  CheckResult sandwich("sup_le_value_le_1_plus_eta_sup", 1e-12);
  std::size_t perturbed_coordinates = 0;

  CounterRng root(seed, "lfc_probe");
  for (std::size_t k = 0; k < trials; ++k) {
    CounterRng rng = root.split(k);
    const SparseVector x = random_vector(rng, coords, rng.uniform(0.1, 3.0), rng.uniform(0.2, 1.0));
    const double value = n(x);
    const double m = sup_norm(x);
    sandwich.record(std::max(m - value, value - (1.0 + eta) * m) - 1e-12 * m,
                    [&] { return "x=" + describe(x); });

    const double cap = 0.99 * a * value;
    SparseVector y = x;
    for (const auto& [i, v] : x.entries()) {
      if (std::abs(v) < cap && rng.below(2) == 0) {
        y.set(i, rng.uniform(-cap, cap));
        ++perturbed_coordinates;
      }
    }
    const Index fresh = section_dim + rng.below(4 * section_dim);
    y.set(fresh, rng.uniform(-cap, cap));
    ++perturbed_coordinates;
    const double perturbed = n(y);
    invariance.record_bool(perturbed == value, [&] {
      return "x=" + describe(x) + " y=" + describe(y);
    });
  }
  report.checks = {invariance, sandwich};
  report.details["eta"] = eta;
  report.details["trials"] = trials;
  report.details["perturbed_coordinates"] = perturbed_coordinates;
  return report;
}

}  // namespace renormlab
