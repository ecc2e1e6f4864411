#include "renormlab/biortho.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"

namespace renormlab {

FunctionalStream::FunctionalStream(std::string name, Generator generator, DecayCertificate certificate)
    : name_(std::move(name)), generator_(std::move(generator)), certificate_(std::move(certificate)) {
  if (!generator_ || !certificate_) throw ParameterError("FunctionalStream: generator and certificate required");
}

namespace {

// Largest index i with |v_i| >= threshold, or 0.
std::size_t last_heavy(const SparseVector& v, double threshold) {
  std::size_t last = 0;
  for (const auto& [i, val] : v.entries()) {
    if (std::fabs(val) >= threshold) last = static_cast<std::size_t>(i);
  }
  return last;
}

}  // namespace

FunctionalStream FunctionalStream::coordinate() {
  return FunctionalStream(
      "coordinate", [](std::size_t n) { return DualFunctional::unit(n); },
      [](const SparseVector& v, double thr) { return last_heavy(v, thr) + 1; });
}

FunctionalStream FunctionalStream::shifted_average() {
  return FunctionalStream(
      "shifted_average",
      [](std::size_t n) { return DualFunctional(SparseVector{{n, 0.5}, {n + 1, 0.5}}); },
      // |<f_m, v>| <= max(|v_m|, |v_{m+1}|); past the support it vanishes.
      [](const SparseVector& v, double) { return v.max_index().value_or(0) + 1; });
}

FunctionalStream FunctionalStream::from_list(std::string name, std::vector<DualFunctional> head) {
  Index top = 0;
  for (const auto& f : head) top = std::max(top, f.coefficients().max_index().value_or(0));
  auto shared = std::make_shared<const std::vector<DualFunctional>>(std::move(head));
  const std::size_t len = shared->size();
  auto gen = [shared, len, top](std::size_t n) {
    return n <= len ? (*shared)[n - 1] : DualFunctional::unit(top + (n - len));
  };
  auto cert = [len, top](const SparseVector& v, double thr) -> std::size_t {
    const std::size_t heavy = last_heavy(v, thr);
    return std::max<std::size_t>(len + 1, heavy > top ? heavy - top + len + 1 : 0);
  };
  return FunctionalStream(std::move(name), gen, cert);
}

DualFunctional FunctionalStream::operator()(std::size_t n) const {
  if (n < 1) throw ParameterError("FunctionalStream: indices start at 1");
  DualFunctional f = generator_(n);
  if (std::fabs(f.dual_norm() - 1.0) > 1e-9) {
    throw InternalInvariantError("FunctionalStream '" + name_ + "': f_" + std::to_string(n) +
                                 " is not normalized");
  }
  return f;
}

std::size_t FunctionalStream::certificate(const SparseVector& v, double threshold) const {
  return std::max<std::size_t>(1, certificate_(v, threshold));
}

// ---------------------------------------------------------------- projections

void ProjectionSystem::push(DualFunctional f, SparseVector y) {
  if (pairing(f, y) == 0.0) throw ParameterError("ProjectionSystem: <f, y> must be non-zero");
  fs_.push_back(std::move(f));
  ys_.push_back(std::move(y));
}

SparseVector ProjectionSystem::apply_P(std::size_t i, const SparseVector& x) const {
  const auto& f = fs_.at(i - 1);
  const auto& y = ys_.at(i - 1);
  return (pairing(f, x) / pairing(f, y)) * y;
}

SparseVector ProjectionSystem::apply_T(std::size_t k, const SparseVector& x) const {
  if (k > fs_.size()) throw ParameterError("ProjectionSystem: k beyond the system");
  SparseVector t;
  for (std::size_t i = 1; i <= k; ++i) t += apply_P(i, x - t);
  return t;
}

// ---------------------------------------------------------------- extraction

namespace {

// Candidate generator: c_0 = sign pattern of f, then grid vectors of
// growing resolution on the given coordinates.
class CandidateFamily {
 public:
  CandidateFamily(const DualFunctional& f, std::vector<Index> coords, std::uint64_t seed)
      : f_(f), coords_(std::move(coords)), rng_(seed, "extract-candidates") {}

  SparseVector next() {
    ++count_;
    if (count_ == 1) {
      std::vector<SparseVector::Entry> e;
      for (const auto& [i, v] : f_.coefficients().entries()) e.emplace_back(i, v > 0 ? 1.0 : -1.0);
      return SparseVector::from_entries(std::move(e));
    }
    // Resolution 2^-level, level growing every 256 candidates.
    const int level = 1 + static_cast<int>(std::min<std::size_t>(count_ / 256, 6));
    const std::uint64_t steps = std::uint64_t{1} << level;
    std::vector<SparseVector::Entry> e;
    for (Index i : coords_) {
      const double g = static_cast<double>(rng_.below(2 * steps + 1)) / static_cast<double>(steps) - 1.0;
      if (g != 0.0) e.emplace_back(i, g);
    }
    return SparseVector::from_entries(std::move(e));
  }

 private:
  const DualFunctional& f_;
  std::vector<Index> coords_;
  CounterRng rng_;
  std::size_t count_ = 0;
};

}  // namespace

ExtractionResult extract_system(const FunctionalStream& stream, double eps, std::size_t k,
                                std::size_t search_budget) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("extract_system: eps must lie in (0, 1)");
  if (k < 1) throw ParameterError("extract_system: k must be at least 1");
  ExtractionResult r;
  r.eps = eps;
  r.step_threshold = eps / 2.0;
  std::set<Index> seen;
  std::size_t prev = 0;
  for (std::size_t i = 1; i <= k; ++i) {
    // Least n > n_{i-1} nearly annihilating the earlier y_j; the
    // certificates bound the scan.
    std::size_t cap = prev + 1;
    for (const auto& y : r.ys) cap = std::max(cap, stream.certificate(y, r.step_threshold));
    std::size_t n = prev + 1;
    for (; n <= cap; ++n) {
      const DualFunctional f = stream(n);
      bool ok = true;
      for (const auto& y : r.ys) ok = ok && std::fabs(pairing(f, y)) < r.step_threshold;
      if (ok) break;
    }
    const DualFunctional f = stream(n);
    for (Index c : f.coefficients().support()) seen.insert(c);
    std::vector<Index> coords(seen.begin(), seen.end());
    for (Index j = 1; j <= 4; ++j) coords.push_back(*seen.rbegin() + j);

    const double need = 1.0 - std::ldexp(eps, -static_cast<int>(i));
    CandidateFamily fam(f, coords, n);
    double best = -1.0;
    std::optional<SparseVector> found;
    while (r.evaluations < search_budget) {
      ++r.evaluations;
      const SparseVector c = fam.next();
      SparseVector y = c - r.projections.apply_T(r.projections.size(), c);
      const double ny = sup_norm(y);
      if (ny == 0.0) continue;
      y *= 1.0 / ny;
      const double v = pairing(f, y);
      best = std::max(best, v);
      if (v >= need) {
        found = std::move(y);
        break;
      }
    }
    if (!found) {
      throw NumericalError("near-norming vector not found for step " + std::to_string(i) +
                           ": best pairing " + std::to_string(best) + " < " + std::to_string(need));
    }
    for (Index c : found->support()) seen.insert(c);
    r.projections.push(f, *found);
    r.ys.push_back(*found);
    r.indices.push_back(n);
    prev = n;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const DualFunctional& f = r.projections.f(i + 1);
    SparseVector x = (1.0 / pairing(f, r.ys[i])) * r.ys[i];
    r.max_unit_pairing_error = std::max(r.max_unit_pairing_error, std::fabs(pairing(f, x) - 1.0));
    r.max_x_norm = std::max(r.max_x_norm, sup_norm(x));
    r.pairs.push_back({std::move(x), f});
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) r.max_cross_pairing = std::max(r.max_cross_pairing, std::fabs(pairing(r.pairs[i].f, r.pairs[j].x)));
    }
  }
  return r;
}

PairSequence to_pair_sequence(const ExtractionResult& r, std::string name) {
  return PairSequence::finite(std::move(name), r.pairs);
}

nlohmann::json to_json(const ExtractionResult& r) {
  nlohmann::json j;
  j["eps"] = r.eps;
  j["step_threshold"] = r.step_threshold;
  j["indices"] = r.indices;
  auto pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) pairs.push_back({{"x", to_json(p.x)}, {"f", to_json(p.f)}});
  j["pairs"] = std::move(pairs);
  j["max_cross_pairing"] = r.max_cross_pairing;
  j["max_unit_pairing_error"] = r.max_unit_pairing_error;
  j["max_x_norm"] = r.max_x_norm;
  j["evaluations"] = r.evaluations;
  return j;
}

SuiteReport extraction_suite(const FunctionalStream& stream, double eps, std::size_t k, std::size_t samples,
                             std::uint64_t seed, double cascade_delta, EtaSchedule etas) {
  SuiteReport rep;
  rep.suite = "biortho";
  rep.property = "almost-biorthogonal-extraction";
  rep.seed = seed;
  const ExtractionResult r = extract_system(stream, eps, k);
  CheckResult idem("T_idempotent", 1e-10);
  CheckResult annih("f_annihilates_I_minus_T", 1e-10);
  CheckResult unit("unit_pairing", 1e-12);
  CheckResult cross("cross_pairing_lt_eps", 0.0);
  CheckResult norm("x_norm_le_1_over_1_minus_eps", 1e-12);
  CheckResult cascade("cascade_accepts_pairs", 0.0);

  std::set<Index> cs;
  for (const auto& y : r.ys)
    for (Index i : y.support()) cs.insert(i);
  for (Index i = 1; i <= 4; ++i) cs.insert(*cs.rbegin() + 1);
  const std::vector<Index> coords(cs.begin(), cs.end());
  CounterRng root(seed, "extraction-suite");
  for (std::size_t s = 0; s < samples; ++s) {
    CounterRng rng = root.split(s);
    const SparseVector x = random_vector(rng, coords, 1.0, 0.6);
    const double scale = std::max(1.0, sup_norm(x));
    for (std::size_t kk = 1; kk <= k; ++kk) {
      const SparseVector tx = r.projections.apply_T(kk, x);
      idem.record(sup_norm(r.projections.apply_T(kk, tx) - tx) - 1e-10 * scale, [&] { return describe(x); });
      const SparseVector rest = x - tx;
      for (std::size_t i = 1; i <= kk; ++i) {
        annih.record(std::fabs(pairing(r.projections.f(i), rest)) - 1e-10 * scale, [&] { return describe(x); });
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto& p = r.pairs[i];
    unit.record(std::fabs(pairing(p.f, p.x) - 1.0) - 1e-12, [&] { return "pair " + std::to_string(i + 1); });
    norm.record(sup_norm(p.x) - 1.0 / (1.0 - eps) - 1e-12, [&] { return "pair " + std::to_string(i + 1); });
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double c = std::fabs(pairing(r.pairs[j].f, p.x));
      cross.record_bool(c < eps, [&] {
        return "<f_" + std::to_string(j + 1) + ", x_" + std::to_string(i + 1) + "> = " + std::to_string(c);
      });
    }
  }
  nlohmann::json cascade_detail;
  const double admissible = cascade_delta / (2.0 * (2.0 - cascade_delta));
  cascade_detail["delta"] = cascade_delta;
  cascade_detail["eps_bound"] = admissible;
  if (eps <= admissible) {
    std::string error;
    try {
      CascadeConfig cfg = make_cascade_config(cascade_delta, etas, Backend::RescaleExact,
                                              to_pair_sequence(r, "extracted(" + stream.name() + ")"), k, seed);
      cfg.x0_tolerance = std::max(1e-9, 1.0 / (1.0 - eps) - 1.0);
      const CascadeNorm cn = build_cascade(cfg);
      cn.stage(k);
    } catch (const std::exception& e) {
      error = e.what();
    }
    cascade.record_bool(error.empty(), [&] { return error; });
    cascade_detail["accepted"] = error.empty();
    if (!error.empty()) cascade_detail["error"] = error;
  }
  rep.checks.push_back(std::move(idem));
  rep.checks.push_back(std::move(annih));
  rep.checks.push_back(std::move(unit));
  rep.checks.push_back(std::move(cross));
  rep.checks.push_back(std::move(norm));
  if (cascade.checked > 0) rep.checks.push_back(std::move(cascade));
  rep.details["extraction"] = to_json(r);
  rep.details["stream"] = stream.name();
  rep.details["cascade"] = std::move(cascade_detail);
  return rep;
}

}  // namespace renormlab
