#include "renormlab/seed_norm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"

namespace renormlab {

SeedNorm::SeedNorm(SeedParams params) : params_(std::move(params)) {}

SeedEvaluation SeedNorm::evaluate(const SparseVector& y) const {
  const double delta = params_.delta();
  const double c = pairing(params_.f0(), y);
  const double n = params_.base()(y);
  SeedEvaluation out;
  if (n == 0.0) {
    out.branch = ConeSide::Plus;
    return out;
  }
  // Both branches agree on the cone boundary; the widened test keeps
  // boundary points from flickering between formulas under rounding.
  const double threshold = (1.0 - delta) * n - 1e-12 * n;
  if (c >= threshold) {
    out.branch = ConeSide::Plus;
    out.psi = psi_eval(params_, y);
    out.value = out.psi / (1.0 - delta) + (c - out.psi) / (1.0 - 0.5 * delta);
  } else if (c <= -threshold) {
    out.branch = ConeSide::Minus;
    out.psi = psi_eval(params_, -y);
    out.value = out.psi / (1.0 - delta) + (-c - out.psi) / (1.0 - 0.5 * delta);
  } else {
    out.branch = ConeSide::Outside;
    out.value = n;
  }
  return out;
}

SparseVector SeedNorm::vertex() const { return (1.0 - 0.5 * params_.delta()) * params_.x0(); }

NormOracle SeedNorm::oracle() const {
  const auto& base = params_.base();
  const double delta = params_.delta();
  // The ball contains the base ball scaled by (1-delta); it sits inside the
  // base ball as long as the vertex does.
  const double lower = std::min(1.0, 1.0 / ((1.0 - 0.5 * delta) * params_.x0_norm()));
  auto self = std::make_shared<const SeedNorm>(*this);
  return NormOracle([self](const SparseVector& y) { return self->evaluate(y).value; },
                    lower * base.lower_const(), base.upper_const() / (1.0 - delta), Provenance::Seed,
                    "seed(delta=" + std::to_string(delta) + ")");
}

SeedEvaluation seed_eval(const SeedNorm& s, const SparseVector& y) { return s.evaluate(y); }

DerivativeBound lemma_derivative_bound(const SeedNorm& s, const SparseVector& h) {
  const double delta = s.delta();
  if (std::abs(s.params().base()(h) - 1.0) > 1e-9) {
    throw ParameterError("lemma_derivative_bound: h must be a unit vector of the base norm");
  }
  const double fh = std::abs(pairing(s.params().f0(), h));
  DerivativeBound b;
  b.rhs = (delta - (4.0 - delta) * fh) / (2.0 * (1.0 - 0.5 * delta) * (2.0 - delta));
  b.t_max = delta * (1.0 - 0.5 * delta) / ((1.0 - delta) + fh);
  return b;
}

double lemma_slice_bound(double delta, double eps) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw ParameterError("lemma_slice_bound: delta must lie in (0, 1/2)");
  }
  if (!(eps > 0.0 && eps < 0.5 * delta)) {
    throw ParameterError("lemma_slice_bound: eps must lie in (0, delta/2)");
  }
  return (8.0 - 2.0 * delta) / delta * eps;
}

double lemma_cone_factor(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw ParameterError("lemma_cone_factor: delta must lie in (0, 1/2)");
  }
  return (4.0 - 2.0 * delta) / (4.0 - delta);
}

std::optional<BallDecomposition> decompose_unit_point(const SeedNorm& s, const SparseVector& y) {
  const SeedEvaluation e = s.evaluate(y);
  if (e.branch != ConeSide::Plus || std::abs(e.value - 1.0) > 1e-6) {
    return std::nullopt;
  }
  const auto& p = s.params();
  const double delta = p.delta();
  const double c = pairing(p.f0(), y);
  BallDecomposition d;
  d.a = e.psi / (1.0 - delta);
  d.b = (c - e.psi) / (1.0 - 0.5 * delta);
  if (e.psi > 0.0) {
    d.z1 = ((1.0 - delta) / e.psi) * axpy(e.psi - c, p.x0(), y);
  }
  const SparseVector rebuilt = d.a * d.z1 + d.b * s.vertex();
  d.reconstruction_error = p.base()(y - rebuilt);
  d.cone_defect = std::abs(pairing(p.f0(), d.z1) - (1.0 - delta) * p.base()(d.z1));
  return d;
}

namespace {

std::vector<Index> sample_coords(const SeedParams& p, std::size_t section_dim) {
  std::set<Index> c;
  for (Index i = 0; i < section_dim; ++i) {
    c.insert(i);
  }
  for (const auto& e : p.x0().entries()) {
    c.insert(e.first);
  }
  for (const auto& e : p.f0().coefficients().entries()) {
    c.insert(e.first);
  }
  return {c.begin(), c.end()};
}

bool is_coordinate_preset(const SeedParams& p) {
  const auto xe = p.x0().entries();
  const auto fe = p.f0().coefficients().entries();
  return p.base().provenance() == Provenance::Sup && xe.size() == 1 && fe.size() == 1 &&
         xe[0].first == fe[0].first && xe[0].second == 1.0 && fe[0].second == 1.0;
}

// A random point of the base ball outside C(f0, 1-delta), by rejection.
SparseVector off_cone_ball_point(CounterRng& rng, const SeedParams& p,
                                 std::span<const Index> coords) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    SparseVector z = random_unit_vector(rng, coords, p.base(), rng.uniform(0.2, 1.0));
    z *= std::pow(rng.uniform(), 0.25);
    if (z.empty()) {
      continue;
    }
    if (cone_side(p.f0(), 1.0 - p.delta(), p.base(), z) == ConeSide::Outside) {
      return z;
    }
  }
  throw NumericalError("could not sample a point outside the cone");
}

}  // namespace

SuiteReport seed_norm_invariant_suite(const SeedNorm& s, std::size_t samples, std::uint64_t seed,
                                      std::size_t section_dim) {
  const auto& p = s.params();
  const double delta = p.delta();
  const auto& base = p.base();
  const auto coords = sample_coords(p, section_dim);
  const bool lattice = is_coordinate_preset(p);

  SuiteReport report;
  report.suite = "seed_norm";
  report.property = "seed-norm-description";
  report.seed = seed;
  CheckResult lower("base_le_seed", 1e-9);
  CheckResult upper("seed_le_base_over_1_minus_delta", 1e-9);
  CheckResult symmetric("seed_even", 1e-12);
  CheckResult decomposition("unit_ball_decomposition", 1e-6);
  CheckResult lattice_check("lattice_monotonicity", 1e-9);

  CounterRng root(seed, "seed_norm_invariant_suite");
  for (std::size_t k = 0; k < samples; ++k) {
    CounterRng rng = root.split(k);
    SparseVector y = random_vector(rng, coords, rng.uniform(0.1, 3.0), rng.uniform(0.2, 1.0));
    if (rng.below(2) == 0) {
      y = axpy(rng.sign() * rng.uniform(0.5, 4.0) * base(y), p.x0(), y);
    }
    const double n = base(y);
    const SeedEvaluation e = s.evaluate(y);
    lower.record(n - e.value - 1e-9 * n, [&] { return "y=" + describe(y); });
    upper.record(e.value - n / (1.0 - delta) - 1e-9 * n, [&] { return "y=" + describe(y); });
    symmetric.record(std::abs(s(-y) - e.value) - 1e-12 * n, [&] { return "y=" + describe(y); });

    if (e.branch != ConeSide::Outside) {
      const SparseVector u = (e.branch == ConeSide::Plus ? 1.0 : -1.0) / e.value * y;
      if (auto d = decompose_unit_point(s, u)) {
        decomposition.record(std::max({d->reconstruction_error, d->cone_defect,
                                       base(d->z1) - 1.0, std::abs(d->a + d->b - 1.0)}) -
                                 1e-6,
                             [&] { return "y=" + describe(u); });
      }
    }

    if (lattice) {
      std::vector<SparseVector::Entry> dominated;
      for (const auto& [i, v] : y.entries()) {
        dominated.emplace_back(i, v * rng.uniform(-1.0, 1.0));
      }
      // Keep the distinguished coordinate large half of the time so both
      // vectors often sit in the cone.
      const Index g = p.x0().entries()[0].first;
      if (rng.below(2) == 0) {
        std::erase_if(dominated, [g](const auto& e) { return e.first == g; });
        dominated.emplace_back(g, y[g] * rng.uniform(0.8, 1.0));
      }
      const SparseVector x = SparseVector::from_entries(std::move(dominated));
      const double sy = e.value;
      lattice_check.record(s(x) - sy - 1e-9 * std::max(1.0, sy),
                           [&] { return "x=" + describe(x) + " y=" + describe(y); });
    }
  }
  report.checks = {lower, upper, symmetric, decomposition};
  if (lattice) {
    report.checks.push_back(lattice_check);
  }
  report.details["delta"] = delta;
  report.details["samples"] = samples;
  report.details["lattice_checked"] = lattice;
  return report;
}

SuiteReport seed_lemma_suite(const SeedNorm& s, std::size_t samples, std::uint64_t seed,
                             std::size_t section_dim) {
  const auto& p = s.params();
  const double delta = p.delta();
  const auto& base = p.base();
  const auto coords = sample_coords(p, section_dim);
  const SparseVector vertex = s.vertex();
  const double vertex_value = s(vertex);

  SuiteReport report;
  report.suite = "seed_lemmas";
  report.property = "derivative-slice-cone-estimates";
  report.seed = seed;
  CounterRng root(seed, "seed_lemma_suite");

  // One-sided quotient at the vertex against the closed-form lower bound.
  CheckResult derivative("derivative_estimate", 1e-8);
  const std::size_t directions = std::max<std::size_t>(1, samples / 20);
  for (std::size_t k = 0; k < directions; ++k) {
    CounterRng rng = root.split("derivative").split(k);
    const SparseVector h = random_unit_vector(rng, coords, base, rng.uniform(0.2, 1.0));
    const DerivativeBound b = lemma_derivative_bound(s, h);
    for (int j = 1; j <= 20; ++j) {
      const double t = b.t_max * j / 21.0;
      const double q = (s(axpy(t, h, vertex)) - vertex_value) / t;
      derivative.record(b.rhs - q - 1e-8,
                        [&] { return "h=" + describe(h) + " t=" + std::to_string(t); });
    }
  }

  // Slice points in the form lambda z + (1-lambda) vertex with z off the
  // cone; every pairwise distance must respect the diameter bound.
  CheckResult slice("slice_diameter_estimate", 1e-8);
  nlohmann::json slice_details = nlohmann::json::array();
  for (double eps : {0.05, 0.01, 0.001}) {
    if (!(eps < 0.5 * delta)) {
      continue;
    }
    const double bound = lemma_slice_bound(delta, eps);
    const double level = 1.0 - 0.5 * delta - eps;
    CounterRng rng = root.split("slice").split(static_cast<std::uint64_t>(eps * 1e6));
    std::vector<SparseVector> points;
    const std::size_t want = std::clamp<std::size_t>(samples / 20, 8, 200);
    for (std::size_t tries = 0; points.size() < want && tries < 50 * want; ++tries) {
      const SparseVector z = off_cone_ball_point(rng, p, coords);
      const double lambda = rng.uniform() * 2.0 * eps / delta;
      SparseVector x = lambda * z + (1.0 - lambda) * vertex;
      if (pairing(p.f0(), x) > level && s(x) <= 1.0 + 1e-12) {
        points.push_back(std::move(x));
      }
    }
    double diam = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const double d = s(points[i] - points[j]);
        diam = std::max(diam, d);
        slice.record(d - bound - 1e-8, [&] {
          return "eps=" + std::to_string(eps) + " pair " + describe(points[i]) + " " +
                 describe(points[j]);
        });
      }
    }
    slice_details.push_back({{"eps", eps}, {"bound", bound}, {"sampled_diameter", diam},
                             {"points", points.size()}});
  }

  // base(x) <= factor * seed(x) on C(f0, 1 - delta/4).
  CheckResult cone("cone_comparison", 1e-12);
  const double factor = lemma_cone_factor(delta);
  for (std::size_t k = 0; cone.checked < samples && k < 4 * samples; ++k) {
    CounterRng rng = root.split("cone").split(k);
    SparseVector y = random_vector(rng, coords, 1.0, rng.uniform(0.2, 1.0));
    const double mu = rng.sign() * rng.uniform(1.0, 40.0) * base(y);
    SparseVector x = axpy(mu, p.x0(), y);
    if (cone_side(p.f0(), 1.0 - 0.25 * delta, base, x) == ConeSide::Outside) {
      continue;
    }
    const double n = base(x);
    cone.record(n - factor * s(x) - 1e-12 * n, [&] { return "x=" + describe(x); });
  }

  report.checks = {derivative, slice, cone};
  report.details["delta"] = delta;
  report.details["cone_factor"] = factor;
  report.details["slices"] = slice_details;
  return report;
}

}  // namespace renormlab
