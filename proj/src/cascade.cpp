#include "renormlab/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <locale>
#include <mutex>
#include <set>
#include <sstream>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"

namespace renormlab {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- pairs

PairSequence::PairSequence(std::string name, Generator generator, DecayCertificate certificate,
                           std::optional<std::size_t> length)
    : name_(std::move(name)),
      generator_(std::move(generator)),
      certificate_(std::move(certificate)),
      length_(length) {
  if (!generator_ || !certificate_) throw ParameterError("PairSequence: generator and certificate required");
}

PairSequence PairSequence::coordinate() {
  auto gen = [](std::size_t n) {
    return BiorthogonalPair{SparseVector::unit(n), DualFunctional::unit(n)};
  };
  auto cert = [](const SparseVector& v, double threshold) -> std::size_t {
    std::size_t last = 0;
    for (const auto& [i, val] : v.entries()) {
      if (i >= 1 && std::fabs(val) >= threshold) last = static_cast<std::size_t>(i);
    }
    return last + 1;
  };
  return PairSequence("coordinate", gen, cert, std::nullopt);
}

PairSequence PairSequence::finite(std::string name, std::vector<BiorthogonalPair> pairs) {
  if (pairs.empty()) throw ParameterError("PairSequence::finite: empty pair list");
  auto shared = std::make_shared<const std::vector<BiorthogonalPair>>(std::move(pairs));
  auto gen = [shared](std::size_t n) {
    if (n < 1 || n > shared->size()) throw ParameterError("PairSequence: index out of range");
    return (*shared)[n - 1];
  };
  auto cert = [shared](const SparseVector& v, double threshold) -> std::size_t {
    std::size_t last = 0;
    for (std::size_t m = 1; m <= shared->size(); ++m) {
      if (std::fabs(pairing((*shared)[m - 1].f, v)) >= threshold) last = m;
    }
    return last + 1;
  };
  const std::size_t len = shared->size();
  return PairSequence(std::move(name), gen, cert, len);
}

BiorthogonalPair PairSequence::operator()(std::size_t n) const {
  if (n < 1) throw ParameterError("PairSequence: indices start at 1");
  if (length_ && n > *length_) throw ParameterError("PairSequence: index beyond sequence length");
  return generator_(n);
}

std::size_t PairSequence::decay_index(const SparseVector& v, double threshold) const {
  std::size_t n = std::max<std::size_t>(1, certificate_(v, threshold));
  // The certificate may be loose; tighten it to the least index.
  while (n > 1 && std::fabs(pairing((*this)(n - 1).f, v)) < threshold) --n;
  return n;
}

// ---------------------------------------------------------------- etas

double EtaSchedule::operator()(std::size_t n) const {
  if (n < 1) throw ParameterError("EtaSchedule: indices start at 1");
  return first * std::pow(ratio, static_cast<double>(n - 1));
}

double EtaSchedule::product_bound(std::size_t exact_terms) const {
  double log_prod = 0.0;
  for (std::size_t n = 1; n <= exact_terms; ++n) log_prod += std::log1p((*this)(n));
  // log(1+x) <= x, and the tail is geometric.
  const double tail = first * std::pow(ratio, static_cast<double>(exact_terms)) / (1.0 - ratio);
  return std::exp(log_prod + tail);
}

double eta_limit(double delta) {
  return std::pow((4.0 - delta) / (4.0 - 2.0 * delta), 0.25) - 1.0;
}

const char* to_string(Backend b) {
  switch (b) {
    case Backend::RescaleExact: return "rescale_exact";
    case Backend::LfcSup: return "lfc_sup";
  }
  return "?";
}

Backend backend_from_string(const std::string& s) {
  if (s == "rescale_exact" || s == "RescaleExact") return Backend::RescaleExact;
  if (s == "lfc_sup" || s == "LfcSup") return Backend::LfcSup;
  throw ParameterError("unknown backend '" + s + "' (expected rescale_exact or lfc_sup)");
}

CascadeConfig make_cascade_config(double delta, EtaSchedule etas, Backend backend, PairSequence pairs,
                                  std::size_t stage_budget, std::uint64_t seed) {
  CascadeConfig cfg;
  cfg.delta = delta;
  cfg.pairs = std::move(pairs);
  cfg.etas = etas;
  cfg.a_level = 1.0 - delta / 4.0;
  cfg.b_level = 1.0 - delta;
  const double e1 = etas.first;
  cfg.alpha = 1.0 / ((1.0 - delta) * (1.0 + e1));
  cfg.base = sup_norm_oracle();
  if (backend == Backend::RescaleExact) {
    cfg.base0 = scaled(cfg.base, std::pow(1.0 + e1, 1.5));
  } else {
    cfg.base0 = e1 > 0.0 ? scaled(lfc_sup_approx(e1), 1.0 + e1) : cfg.base;
  }
  cfg.backend = backend;
  cfg.stage_budget = stage_budget;
  cfg.seed = seed;
  return cfg;
}

CascadeConfig c0_preset(double delta, EtaSchedule etas, Backend backend, std::size_t stage_budget,
                        std::uint64_t seed) {
  return make_cascade_config(delta, etas, backend, PairSequence::coordinate(), stage_budget, seed);
}

nlohmann::json to_json(const CascadeConfig& cfg) {
  nlohmann::json j;
  j["delta"] = cfg.delta;
  j["pairs"] = cfg.pairs.name();
  j["eta"] = {{"first", cfg.etas.first}, {"ratio", cfg.etas.ratio}};
  j["a_level"] = cfg.a_level;
  j["b_level"] = cfg.b_level;
  j["alpha"] = cfg.alpha;
  j["base0"] = cfg.base0.label();
  j["backend"] = to_string(cfg.backend);
  j["stage_budget"] = cfg.stage_budget;
  j["seed"] = cfg.seed;
  return j;
}

// ---------------------------------------------------------------- cascade

struct CascadeNorm::Impl {
  CascadeConfig cfg;
  std::size_t limit = 0;
  double global_factor = 0.0;
  mutable std::mutex lock;
  mutable std::deque<Stage> stages;  // stages[k] is stage k+1

  Stage make_stage(std::size_t n) const;
  void validate_stage(const Stage& s) const;
  const Stage& get(std::size_t n) const;
};

CascadeNorm::Stage CascadeNorm::Impl::make_stage(std::size_t n) const {
  BiorthogonalPair pair = cfg.pairs(n);
  const double eta = cfg.etas(n);
  std::optional<SeedParams> params;
  try {
    params = SeedParams::make(pair.x, pair.f, cfg.delta, cfg.base, cfg.x0_tolerance);
  } catch (const std::exception& e) {
    throw BuildError("stage " + std::to_string(n) + ": invalid pair: " + e.what());
  }
  SeedNorm seed(*params);
  ApproxNorm approx = rescale_approx(seed.oracle(), eta);
  auto profile = std::make_shared<const BumpProfile>(eta);
  return Stage{n, std::move(pair), eta, std::move(seed), std::move(approx), std::move(profile)};
}

// Directed sampling near the boundaries of C(f_n, a) (from inside) and of
// C(f_n, b) (from outside), where the sandwich hypotheses are tightest.
void CascadeNorm::Impl::validate_stage(const Stage& s) const {
  const std::size_t n = s.n;
  const double a = cfg.a_level;
  const double b = cfg.b_level;
  const double eta = s.eta;
  const auto& f = s.pair.f;
  const auto& xn = s.pair.x;

  std::set<Index> cs;
  for (Index i : xn.support()) cs.insert(i);
  for (Index i : f.coefficients().support()) cs.insert(i);
  for (Index i = 0; i < 3; ++i) cs.insert(i);
  if (n > 1) cs.insert(n - 1);
  cs.insert(n + 1);
  cs.insert(*cs.rbegin() + 5);  // fresh
  const std::vector<Index> coords(cs.begin(), cs.end());

  CounterRng rng = CounterRng(cfg.seed, "cascade-validate").split(n);
  auto level = [&](const SparseVector& x, double r) {
    return std::fabs(pairing(f, x)) - r * cfg.base(x);
  };
  // Crossing of level(w + mu x_n, r) = 0 on [lo, hi] with level(lo) < 0 <= level(hi).
  auto cross = [&](const SparseVector& w, double r, double lo, double hi, bool want_inside) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (level(axpy(mid, xn, w), r) >= 0.0) hi = mid; else lo = mid;
    }
    return axpy(want_inside ? hi : lo, xn, w);
  };
  auto fail = [&](const std::string& what, const SparseVector& x) {
    throw BuildError("stage " + std::to_string(n) + ": " + what + " violated at x = " + describe(x));
  };

  const std::size_t samples = std::max<std::size_t>(2, cfg.validation_samples);
  for (std::size_t k = 0; k < samples; ++k) {
    SparseVector w = random_vector(rng, coords, 1.0, 0.5);
    const double bw = cfg.base(w);
    const double big = 64.0 * (bw + 1.0);
    SparseVector x;
    if (k % 2 == 0) {
      // Inside C(f_n, a), close to its boundary.
      x = level(w, a) >= 0.0 ? w : cross(w, a, 0.0, big, true);
      if (level(x, a) < 0.0) continue;
      const double lhs = cfg.base0(x) * (1.0 + eta);
      const double rhs = s.approx(x);
      if (lhs > rhs * (1.0 + 1e-12)) {
        fail("base0 <= A_n/(1+eta_n) on C(f_n, a_level) (" + num(lhs) + " > " + num(rhs) + ")", x);
      }
    } else {
      // Outside C(f_n, b), close to its boundary.
      SparseVector w0 = axpy(-pairing(f, w), xn, w);
      if (w0.empty()) continue;
      x = cross(w0, b, 0.0, big, false);
      if (level(x, b) >= 0.0) continue;
      const double lhs = s.approx(x) * (1.0 + eta);
      const double rhs = cfg.base0(x);
      if (lhs > rhs * (1.0 + 1e-12)) {
        fail("A_n <= base0/(1+eta_n) off C(f_n, b_level) (" + num(lhs) + " > " + num(rhs) + ")", x);
      }
    }
    const double an = s.approx(x);
    const double cap = cfg.alpha * cfg.base0(x);
    if (an > cap * (1.0 + 1e-12)) {
      fail("A_n <= alpha * base0 (" + num(an) + " > " + num(cap) + ")", x);
    }
  }
}

const CascadeNorm::Stage& CascadeNorm::Impl::get(std::size_t n) const {
  if (n < 1) throw ParameterError("cascade: stages start at 1");
  if (n > limit) {
    throw NumericalError("stabilization beyond budget: stage " + std::to_string(n) +
                         " requested, stage_budget " + std::to_string(limit));
  }
  std::lock_guard<std::mutex> guard(lock);
  while (stages.size() < n) {
    Stage s = make_stage(stages.size() + 1);
    validate_stage(s);
    stages.push_back(std::move(s));
  }
  return stages[n - 1];
}

double check_cascade_config(const CascadeConfig& cfg) {
  const double d = cfg.delta;
  if (!(d > 0.0 && d < 0.5)) throw BuildError("delta = " + num(d) + " violates 0 < delta < 1/2");
  const auto& e = cfg.etas;
  if (!(e.first > 0.0) || !std::isfinite(e.first)) {
    throw BuildError("eta_1 = " + num(e.first) + " violates eta_n > 0 at stage 1");
  }
  if (!(e.ratio > 0.0 && e.ratio < 1.0)) {
    throw BuildError("eta ratio = " + num(e.ratio) + " violates eta_{n+1} < eta_n (need 0 < ratio < 1) at stage 2");
  }
  const double lim = eta_limit(d);
  // Decreasing, so the first term is the largest.
  if (!(e.first < lim)) {
    throw BuildError("eta_1 = " + num(e.first) + " violates eta_n < ((4-delta)/(4-2delta))^(1/4) - 1 = " +
                     num(lim) + " at stage 1");
  }
  if (cfg.stage_budget < 1) throw BuildError("stage_budget must be at least 1");
  const double prod = e.product_bound(cfg.stage_budget);
  if (!(prod <= 2.0)) {
    throw BuildError("prod (1+eta_n) <= 2 violated: bound " + num(prod));
  }
  if (!(cfg.b_level > 0.0 && cfg.a_level < 1.0)) {
    throw BuildError("cone levels must lie in (0, 1)");
  }
  if (!(cfg.b_level < cfg.a_level)) {
    throw BuildError("b_level = " + num(cfg.b_level) + " violates b_level < a_level = " + num(cfg.a_level));
  }
  if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha)) throw BuildError("alpha must be positive");
  return prod;
}

CascadeNorm build_cascade(CascadeConfig cfg) {
  const double prod = check_cascade_config(cfg);

  auto impl = std::make_shared<CascadeNorm::Impl>();
  impl->limit = cfg.pairs.length() ? std::min(cfg.stage_budget, *cfg.pairs.length()) : cfg.stage_budget;
  impl->global_factor = cfg.alpha * prod;
  impl->cfg = std::move(cfg);
  CascadeNorm cn(impl);
  const std::size_t eager = std::min(impl->limit, impl->cfg.eager_validation_stages);
  if (eager > 0) impl->get(eager);
  return cn;
}

const CascadeConfig& CascadeNorm::config() const { return impl_->cfg; }
std::size_t CascadeNorm::stage_limit() const { return impl_->limit; }

std::size_t CascadeNorm::materialized() const {
  std::lock_guard<std::mutex> guard(impl_->lock);
  return impl_->stages.size();
}

const CascadeNorm::Stage& CascadeNorm::stage(std::size_t n) const { return impl_->get(n); }

double CascadeNorm::stage_value(std::size_t n, const SparseVector& x) const {
  double v = impl_->cfg.base0(x);
  for (std::size_t k = 1; k <= n; ++k) {
    const Stage& s = impl_->get(k);
    v = combine_values(*s.profile, v, s.approx(x));
  }
  return v;
}

std::vector<double> CascadeNorm::stage_values(std::size_t n, const SparseVector& x) const {
  std::vector<double> out;
  out.reserve(n + 1);
  out.push_back(impl_->cfg.base0(x));
  for (std::size_t k = 1; k <= n; ++k) {
    const Stage& s = impl_->get(k);
    out.push_back(combine_values(*s.profile, out.back(), s.approx(x)));
  }
  return out;
}

std::size_t CascadeNorm::stabilization_index(const SparseVector& x) const {
  if (x.empty()) return 0;
  return impl_->cfg.pairs.decay_index(x, impl_->cfg.base(x) / 8.0);
}

// Stages m >= n_x leave the value unchanged (x is off their cones), so
// N_{n_x} = N_{n_x - 1} and only the stages before n_x are evaluated.
CascadeEvaluation CascadeNorm::evaluate(const SparseVector& x) const {
  if (x.empty()) return {0.0, 0};
  const std::size_t nx = stabilization_index(x);
  if (nx - 1 > impl_->limit) {
    throw NumericalError("stabilization beyond budget: n_x = " + std::to_string(nx) + ", stage_budget " +
                         std::to_string(impl_->limit));
  }
  return {stage_value(nx - 1, x), nx};
}

double CascadeNorm::upper_factor(std::size_t n) const {
  double p = impl_->cfg.alpha;
  for (std::size_t k = 1; k <= n; ++k) p *= 1.0 + impl_->cfg.etas(k);
  return p;
}

double CascadeNorm::global_upper_factor() const { return impl_->global_factor; }

NormOracle CascadeNorm::oracle() const {
  CascadeNorm self = *this;
  const auto& b0 = impl_->cfg.base0;
  return NormOracle([self](const SparseVector& x) { return self.evaluate(x).value; }, b0.lower_const(),
                    impl_->global_factor * b0.upper_const(), Provenance::Cascade, "cascade");
}

NormOracle CascadeNorm::stage_oracle(std::size_t n) const {
  CascadeNorm self = *this;
  const auto& b0 = impl_->cfg.base0;
  return NormOracle([self, n](const SparseVector& x) { return self.stage_value(n, x); }, b0.lower_const(),
                    upper_factor(n) * b0.upper_const(), Provenance::Cascade,
                    "cascade_stage(" + std::to_string(n) + ")");
}

CascadeEvaluation cascade_eval(const CascadeNorm& cn, const SparseVector& x) { return cn.evaluate(x); }

// ---------------------------------------------------------------- checks

namespace {

// x in C(f_n, a) and outside C(f_i, b) for every other materializable i.
bool in_coincidence_region(const CascadeNorm& cn, std::size_t n, const SparseVector& x) {
  const auto& cfg = cn.config();
  const double bx = cfg.base(x);
  if (bx == 0.0) return false;
  if (std::fabs(pairing(cn.stage(n).pair.f, x)) < cfg.a_level * bx) return false;
  const std::size_t decay = cfg.pairs.decay_index(x, cfg.b_level * bx);
  const Index top = x.max_index().value_or(0);
  const std::size_t horizon = std::max<std::size_t>(decay, static_cast<std::size_t>(top) + 8);
  if (decay - 1 > cn.stage_limit()) return false;
  for (std::size_t i = 1; i <= std::min(horizon, cn.stage_limit()); ++i) {
    if (i == n) continue;
    if (std::fabs(pairing(cn.stage(i).pair.f, x)) >= cfg.b_level * bx) return false;
  }
  return true;
}

}  // namespace

SuiteReport coincidence_check(const CascadeNorm& cn, std::size_t n, std::size_t samples, std::uint64_t seed) {
  if (n < 1 || n > cn.stage_limit()) throw ParameterError("coincidence_check: stage out of range");
  const auto& cfg = cn.config();
  const auto& st = cn.stage(n);
  SuiteReport rep;
  rep.suite = "cascade_coincidence";
  rep.property = "cascade.coincidence_on_cone";
  rep.seed = seed;
  CheckResult eq("coincidence", 1e-8);

  std::set<Index> cs;
  for (Index i : st.pair.x.support()) cs.insert(i);
  for (Index i : st.pair.f.coefficients().support()) cs.insert(i);
  const Index top = *cs.rbegin();
  for (Index i = 1; i <= top + 8; ++i) cs.insert(i);
  const std::vector<Index> coords(cs.begin(), cs.end());

  CounterRng rng = CounterRng(seed, "coincidence").split(n);
  const double vertex_scale = 1.0 - cfg.delta / 2.0;
  std::size_t rejected = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    SparseVector x;
    if (k % 2 == 0) {
      // The small ball around (1-delta/2) x_n.
      const double radius = rng.uniform() * cfg.delta / 16.0 * (1.0 - 1e-9);
      x = axpy(vertex_scale, st.pair.x, random_vector(rng, coords, radius, 0.5));
    } else {
      // Dominant multiple of x_n plus a small remainder.
      const double s = rng.sign() * rng.uniform(0.5, 2.0);
      const double r = rng.uniform() * cfg.b_level * 0.99 * std::fabs(s);
      x = axpy(s, st.pair.x, random_vector(rng, coords, r, 0.5));
    }
    if (!in_coincidence_region(cn, n, x)) {
      ++rejected;
      continue;
    }
    const double an = st.approx(x);
    const double v = cn.evaluate(x).value;
    eq.record(std::fabs(v - an) - 1e-8 * an, [&] {
      return "x = " + describe(x) + ": cascade " + num(v) + " vs A_n " + num(an);
    });
  }
  rep.checks.push_back(std::move(eq));
  rep.details["stage"] = n;
  rep.details["samples"] = samples;
  rep.details["rejected"] = rejected;
  return rep;
}

SuiteReport cascade_invariant_suite(const CascadeNorm& cn, std::size_t samples, std::uint64_t seed,
                                    std::size_t section_dim) {
  const auto& cfg = cn.config();
  SuiteReport rep;
  rep.suite = "cascade_invariants";
  rep.property = "cascade.theorem";
  rep.seed = seed;
  CheckResult mono("stage_monotone", 1e-9);
  CheckResult offcone("off_cone_stage_coincidence", 1e-9);
  CheckResult lower("sandwich_lower", 1e-8);
  CheckResult upper("sandwich_upper", 1e-8);
  CheckResult four("bound_4_base", 1e-8);
  CheckResult stab("stabilization", 1e-12);

  const std::size_t pair_span = std::min(section_dim, cn.stage_limit());
  std::set<Index> cs;
  for (Index i = 0; i <= section_dim; ++i) cs.insert(i);
  for (std::size_t k = 1; k <= pair_span; ++k) {
    for (Index i : cn.stage(k).pair.x.support()) cs.insert(i);
    for (Index i : cn.stage(k).pair.f.coefficients().support()) cs.insert(i);
  }
  const std::vector<Index> coords(cs.begin(), cs.end());

  CounterRng root(seed, "cascade-invariants");
  std::size_t skipped = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    CounterRng rng = root.split(t);
    SparseVector x;
    switch (t % 3) {
      case 0: x = random_vector(rng, coords, 1.0, 0.4); break;
      case 1: {
        const std::size_t k = 1 + rng.below(pair_span);
        const double s = rng.sign() * rng.uniform(0.2, 3.0);
        x = axpy(s, cn.stage(k).pair.x, random_vector(rng, coords, rng.uniform() * std::fabs(s), 0.3));
        break;
      }
      default: {
        const std::size_t k = 1 + rng.below(pair_span);
        x = axpy(1.0 - cfg.delta / 2.0, cn.stage(k).pair.x,
                 random_vector(rng, coords, rng.uniform() * cfg.delta / 4.0, 0.3));
        break;
      }
    }
    const CascadeEvaluation ev = cn.evaluate(x);
    const std::size_t m = std::min(ev.stabilized_at + 2, cn.stage_limit());
    const auto vals = cn.stage_values(m, x);
    auto d = [&] { return describe(x); };
    const double bx = cfg.base(x);
    double sup_an = 0.0;
    for (std::size_t k = 1; k <= m; ++k) {
      mono.record(vals[k - 1] - vals[k] * (1.0 + 1e-9), d);
      const auto& st = cn.stage(k);
      const double an = st.approx(x);
      sup_an = std::max(sup_an, an);
      if (cone_side(st.pair.f, cfg.b_level, cfg.base, x) == ConeSide::Outside) {
        offcone.record(std::fabs(vals[k] - vals[k - 1]) - 1e-9 * vals[k - 1], d);
      }
    }
    lower.record(sup_an - ev.value * (1.0 + 1e-8), d);
    upper.record(ev.value - cn.global_upper_factor() * cfg.base0(x) * (1.0 + 1e-8), d);
    four.record(ev.value - 4.0 * bx * (1.0 + 1e-8), d);
    if (ev.stabilized_at + 2 <= cn.stage_limit()) {
      stab.record(std::fabs(vals[ev.stabilized_at + 2] - ev.value) - 1e-12, d);
    } else {
      ++skipped;
    }
  }
  for (auto* c : {&mono, &offcone, &lower, &upper, &four, &stab}) rep.checks.push_back(std::move(*c));
  rep.details["samples"] = samples;
  rep.details["stabilization_skipped"] = skipped;
  rep.details["global_upper_factor"] = cn.global_upper_factor();
  return rep;
}

}  // namespace renormlab
