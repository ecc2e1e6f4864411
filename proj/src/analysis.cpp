#include "renormlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"
#include "renormlab/smooth.hpp"

namespace renormlab {

double diff_quotient(const QuotientQuery& q) { return diff_quotient(q.norm, q.x, q.h, q.t); }

double diff_quotient(const NormOracle& n, const SparseVector& x, const SparseVector& h, double t) {
  if (t == 0.0 || !std::isfinite(t)) throw ParameterError("diff_quotient: t must be non-zero");
  if (x.empty()) throw ParameterError("diff_quotient: x must be non-zero");
  return (n(axpy(t, h, x)) + n(axpy(-t, h, x)) - 2.0 * n(x)) / t;
}

// ---------------------------------------------------------------- witness

UgWitness ug_witness(const CascadeNorm& cn, const SparseVector& h, double tau) {
  const auto& cfg = cn.config();
  const double delta = cfg.delta;
  if (!(tau > 0.0)) throw ParameterError("ug_witness: tau must be positive");
  if (std::fabs(cfg.base(h) - 1.0) > 1e-9) throw ParameterError("ug_witness: h must be a unit vector");
  UgWitness w;
  w.tau = tau;
  w.tau_effective = std::min(tau, delta / 16.0);
  w.eps0 = delta / 16.0;
  const double pair_cap = delta / (2.0 * (4.0 - delta));
  for (std::size_t n = 1; n <= cn.stage_limit(); ++n) {
    const double eta = cfg.etas(n);
    const double t0 = eta / (1.0 + eta) * 32.0 / delta;
    if (!(t0 < w.tau_effective)) continue;
    const auto& st = cn.stage(n);
    if (!(std::fabs(pairing(st.pair.f, h)) < pair_cap)) continue;
    w.n0 = n;
    w.t0 = t0;
    break;
  }
  if (w.n0 == 0) {
    throw NumericalError("insufficient stages for tau = " + std::to_string(tau) + " within stage_budget " +
                         std::to_string(cn.stage_limit()));
  }
  const SparseVector x = (1.0 - delta / 2.0) * cn.stage(w.n0).pair.x;
  w.quotient = diff_quotient(cn.oracle(), x, h, w.t0);
  w.pass = w.quotient > w.eps0 * (1.0 - 1e-6) && w.t0 < tau;
  return w;
}

const std::vector<SparseVector>& direction_set_v1() {
  static const std::vector<SparseVector> set = [] {
    std::vector<SparseVector> d;
    for (Index i = 1; i <= 8; ++i) d.push_back(SparseVector::unit(i));
    for (Index i = 1; i <= 8; ++i) d.push_back(SparseVector{{i, 1.0}, {i + 1, 1.0}});
    for (Index i = 1; i <= 4; ++i) d.push_back(SparseVector{{2 * i - 1, 1.0}, {2 * i, -1.0}});
    for (Index i = 1; i <= 4; ++i) {
      d.push_back(SparseVector{{i, -0.5}, {i + 3, 1.0}, {i + 5, 0.25}});
    }
    CounterRng rng(20240601, "direction-set-v1");
    const auto coords = coordinate_range(1, 12);
    for (int k = 0; k < 8; ++k) d.push_back(random_unit_vector(rng, coords, sup_norm_oracle(), 0.6));
    return d;
  }();
  return set;
}

SuiteReport ug_witness_sweep(const CascadeNorm& cn, const std::vector<SparseVector>& directions,
                             const std::vector<double>& taus) {
  SuiteReport rep;
  rep.suite = "ug_witness";
  rep.property = "not-uniformly-gateaux";
  rep.seed = cn.config().seed;
  CheckResult q("quotient_gt_delta_over_16", 1e-6);
  CheckResult t("t0_lt_tau", 0.0);
  auto rows = nlohmann::json::array();
  for (std::size_t di = 0; di < directions.size(); ++di) {
    for (double tau : taus) {
      const UgWitness w = ug_witness(cn, directions[di], tau);
      auto d = [&] { return "direction " + std::to_string(di) + ", tau " + std::to_string(tau); };
      // Strict inequality: a quotient equal to the bound counts as a failure.
      const double need = w.eps0 * (1.0 - 1e-6);
      q.record(w.quotient > need ? -(w.quotient - need) : std::max(need - w.quotient, 1e-300), d);
      t.record(w.t0 < tau ? w.t0 - tau : std::max(w.t0 - tau, 1e-300), d);
      rows.push_back({{"direction", di}, {"tau", tau}, {"n0", w.n0}, {"t0", w.t0}, {"quotient", w.quotient}});
    }
  }
  rep.checks.push_back(std::move(q));
  rep.checks.push_back(std::move(t));
  rep.details["rows"] = std::move(rows);
  return rep;
}

// ---------------------------------------------------------------- slices

SliceDiameter slice_diameter_estimate(const SliceSpec& s, std::size_t samples, std::uint64_t seed) {
  if (!s.witness) throw NumericalError("slice possibly empty: no witness point");
  const SparseVector& w = *s.witness;
  const double fw = pairing(s.f, w);
  if (!(fw > s.level) || s.norm(w) > 1.0 + 1e-12) {
    throw NumericalError("slice possibly empty: witness is not a slice point");
  }
  std::vector<Index> coords = s.coords;
  for (Index i : w.support()) coords.push_back(i);
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

  CounterRng rng(seed, "slice-diameter");
  std::vector<SparseVector> pts{w};
  const std::size_t segment_samples = samples - samples / 4;
  for (std::size_t k = 0; k < segment_samples; ++k) {
    SparseVector z = random_unit_vector(rng, coords, s.norm, rng.uniform(0.2, 1.0));
    if (rng.below(2) == 0) z *= -1.0;
    const double fz = pairing(s.f, z);
    if (!(fz < fw)) {
      pts.push_back(std::move(z));  // already in the slice (and the ball)
      continue;
    }
    const double lam_star = std::min(1.0, (fw - s.level) / (fw - fz));
    const double lam = lam_star * std::sqrt(rng.uniform()) * (1.0 - 1e-9);
    pts.push_back(axpy(lam, z - w, w));
  }
  // Perturbations of the witness, kept when inside the slice.
  const double margin = fw - s.level;
  std::size_t tries = 0;
  while (pts.size() < samples + 1 && tries < 20 * samples) {
    ++tries;
    SparseVector p = axpy(1.0, random_vector(rng, coords, margin * rng.uniform(), 0.5), w);
    if (pairing(s.f, p) > s.level && s.norm(p) <= 1.0) pts.push_back(std::move(p));
  }

  SliceDiameter out;
  out.points = pts.size();
  out.p = w;
  out.q = w;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = s.metric(pts[i] - pts[j]);
      if (d > out.lower) {
        out.lower = d;
        out.p = pts[i];
        out.q = pts[j];
      }
    }
  }
  return out;
}

DentabilityTarget dentability_target(const CascadeNorm& cn, double r, std::size_t samples,
                                     std::uint64_t seed) {
  const auto& cfg = cn.config();
  const double delta = cfg.delta;
  if (!(r > 0.0)) throw ParameterError("dentability: radius must be positive");
  const double K = (8.0 - 2.0 * delta) / delta;
  DentabilityTarget t;
  t.r = r;
  t.eps0 = std::min(delta / 4.0, r / (2.0 * K));
  for (std::size_t n = 1; n <= cn.stage_limit(); ++n) {
    const double eta = cfg.etas(n);
    if (K * (t.eps0 + eta * (1.0 - delta / 2.0)) < r) {
      t.n0 = n;
      t.eta_n0 = eta;
      break;
    }
  }
  if (t.n0 == 0) {
    const double need = (r / K - t.eps0) / (1.0 - delta / 2.0);
    throw NumericalError("dentability: radius " + std::to_string(r) + " needs eta_n < " + std::to_string(need) +
                         ", not reached within stage_budget " + std::to_string(cn.stage_limit()));
  }
  t.bound = K * (t.eps0 + t.eta_n0 * (1.0 - delta / 2.0));
  const auto& st = cn.stage(t.n0);
  const SparseVector wit = (1.0 - delta / 2.0) * st.pair.x;
  const double level = 1.0 - delta / 2.0 - t.eps0;
  t.witness_norm = cn(wit);
  t.witness_margin = pairing(st.pair.f, wit) - level;

  SliceSpec spec{cn.oracle(), st.pair.f, level, st.seed.oracle(), wit, {}};
  const Index top = wit.max_index().value_or(0);
  for (Index i = 1; i <= top + 6; ++i) spec.coords.push_back(i);
  t.diameter = slice_diameter_estimate(spec, samples, CounterRng(seed, "dentability").split(t.n0).key());
  t.certified = t.witness_norm <= 1.0 && t.witness_margin > 0.0 && t.bound < r && t.diameter.lower <= t.bound;
  return t;
}

SuiteReport dentability_report(const CascadeNorm& cn, const std::vector<double>& targets, std::size_t samples,
                               std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "dentability";
  rep.property = "dentable-unit-ball";
  rep.seed = seed;
  CheckResult witness("witness_in_slice", 0.0);
  CheckResult diam("sampled_diameter_le_bound", 1e-8);
  CheckResult bound("bound_lt_r", 0.0);
  auto rows = nlohmann::json::array();
  for (double r : targets) {
    const DentabilityTarget t = dentability_target(cn, r, samples, seed);
    auto d = [&] { return "r = " + std::to_string(r); };
    witness.record_bool(t.witness_norm <= 1.0 && t.witness_margin > 0.0, d);
    diam.record(t.diameter.lower - t.bound - 1e-8, d);
    bound.record_bool(t.bound < r, d);
    rows.push_back({{"r", r},
                    {"eps0", t.eps0},
                    {"n0", t.n0},
                    {"eta_n0", t.eta_n0},
                    {"bound", t.bound},
                    {"witness_norm", t.witness_norm},
                    {"sampled_diameter", t.diameter.lower},
                    {"points", t.diameter.points},
                    {"certified", t.certified}});
  }
  rep.checks.push_back(std::move(witness));
  rep.checks.push_back(std::move(diam));
  rep.checks.push_back(std::move(bound));
  rep.details["targets"] = std::move(rows);
  return rep;
}

// ---------------------------------------------------------------- lemmas

SuiteReport derivative_lemma_sweep(const SeedNorm& s, const std::vector<SparseVector>& directions) {
  SuiteReport rep;
  rep.suite = "derivative_lemma";
  rep.property = "seed.derivative-estimate";
  CheckResult c("one_sided_quotient_ge_rhs", 1e-8);
  const SparseVector v = s.vertex();
  const double sv = s(v);
  for (std::size_t di = 0; di < directions.size(); ++di) {
    const auto& h = directions[di];
    const DerivativeBound b = lemma_derivative_bound(s, h);
    for (int j = 1; j <= 20; ++j) {
      const double t = b.t_max * j / 21.0;
      const double q = (s(axpy(t, h, v)) - sv) / t;
      c.record(b.rhs - 1e-8 - q, [&] {
        return "direction " + std::to_string(di) + ", t = " + std::to_string(t) + ", quotient " + std::to_string(q);
      });
    }
  }
  rep.checks.push_back(std::move(c));
  rep.details["directions"] = directions.size();
  return rep;
}

SuiteReport approximation_estimates_suite(const SeedNorm& s, double eta, std::size_t samples,
                                          std::uint64_t seed, std::size_t section_dim) {
  const auto& p = s.params();
  const double delta = p.delta();
  const ApproxNorm approx = rescale_approx(s.oracle(), eta);
  SuiteReport rep;
  rep.suite = "approximation_estimates";
  rep.property = "approx.estimates";
  rep.seed = seed;
  CheckResult quot("approx_quotient_lower_bound", 1e-8);
  CheckResult slice("approx_slice_diameter", 1e-8);
  CheckResult sandwich("approx_sandwich", 1e-12);

  std::set<Index> cs;
  for (Index i = 0; i < section_dim; ++i) cs.insert(i);
  for (Index i : p.x0().support()) cs.insert(i);
  for (Index i : p.f0().coefficients().support()) cs.insert(i);
  const std::vector<Index> coords(cs.begin(), cs.end());

  CounterRng root(seed, "approximation-estimates");
  const SparseVector v = s.vertex();
  for (std::size_t k = 0; k < samples; ++k) {
    CounterRng rng = root.split(k);
    const SparseVector h = random_unit_vector(rng, coords, p.base(), rng.uniform(0.2, 1.0));
    const DerivativeBound b = lemma_derivative_bound(s, h);
    const double t = b.t_max * rng.uniform(0.01, 0.99);
    const double q = diff_quotient(approx.norm, v, h, t);
    const double rhs = 2.0 / (1.0 + eta) * (b.rhs - eta / t);
    quot.record(rhs - 1e-8 - q, [&] { return "h = " + describe(h) + ", t = " + std::to_string(t); });
    const double an = approx(h);
    const double sn = s(h);
    sandwich.record(std::max(an - sn, sn - (1.0 + eta) * an) - 1e-12 * sn, [&] { return describe(h); });
  }
  for (double eps : {0.05, 0.01, 0.001}) {
    if (!(eps < delta / 2.0)) continue;
    SliceSpec spec{approx.norm, p.f0(), 1.0 - delta / 2.0 - eps, s.oracle(), v, coords};
    const SliceDiameter d = slice_diameter_estimate(spec, std::max<std::size_t>(64, samples / 10),
                                                    CounterRng(seed, "approx-slice").split(
                                                        static_cast<std::uint64_t>(eps * 1e6)).key());
    const double bound = (8.0 - 2.0 * delta) / delta * (eps + eta * (1.0 - delta / 2.0));
    slice.record(d.lower - bound - 1e-8, [&] { return "eps = " + std::to_string(eps); });
    rep.details["slices"].push_back({{"eps", eps}, {"sampled_diameter", d.lower}, {"bound", bound}});
  }
  rep.checks.push_back(std::move(quot));
  rep.checks.push_back(std::move(slice));
  rep.checks.push_back(std::move(sandwich));
  rep.details["eta"] = eta;
  return rep;
}

SuiteReport quotient_property_suite(const NormOracle& n, std::size_t samples, std::uint64_t seed,
                                    std::size_t section_dim) {
  SuiteReport rep;
  rep.suite = "diff_quotient";
  rep.property = "quotient.convexity-homogeneity";
  rep.seed = seed;
  CheckResult nonneg("quotient_nonnegative", 1e-12);
  CheckResult homog("quotient_homogeneous", 1e-9);
  const auto coords = coordinate_range(0, section_dim);
  CounterRng root(seed, "quotient-properties");
  for (std::size_t k = 0; k < samples; ++k) {
    CounterRng rng = root.split(k);
    const SparseVector x = random_vector(rng, coords, 1.0, 0.5);
    const SparseVector h = random_vector(rng, coords, 1.0, 0.5);
    const double t = rng.uniform(1e-3, 1.0);
    const double lam = rng.uniform(0.1, 10.0);
    const double q = diff_quotient(n, x, h, t);
    const double scale = n(x) + t * n(h);
    nonneg.record(-q - 1e-12 * scale / t, [&] { return describe(x); });
    const double q2 = diff_quotient(n, lam * x, h, lam * t);
    homog.record(std::fabs(q2 - q) - 1e-9 * scale / t, [&] { return describe(x); });
  }
  rep.checks.push_back(std::move(nonneg));
  rep.checks.push_back(std::move(homog));
  return rep;
}

}  // namespace renormlab
