#include "renormlab/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "renormlab/errors.hpp"
#include "renormlab/rng.hpp"

namespace renormlab {

namespace {

using Entry = SparseVector::Entry;

// Merges two sorted entry lists as a*x + b*y, dropping exact zeros.
std::vector<Entry> merge_scaled(double a, std::span<const Entry> x, double b,
                                std::span<const Entry> y) {
  std::vector<Entry> out;
  out.reserve(x.size() + y.size());
  auto ix = x.begin();
  auto iy = y.begin();
  auto push = [&out](Index i, double v) {
    if (v != 0.0) {
      out.emplace_back(i, v);
    }
  };
  while (ix != x.end() && iy != y.end()) {
    if (ix->first < iy->first) {
      push(ix->first, a * ix->second);
      ++ix;
    } else if (iy->first < ix->first) {
      push(iy->first, b * iy->second);
      ++iy;
    } else {
      push(ix->first, a * ix->second + b * iy->second);
      ++ix;
      ++iy;
    }
  }
  for (; ix != x.end(); ++ix) {
    push(ix->first, a * ix->second);
  }
  for (; iy != y.end(); ++iy) {
    push(iy->first, b * iy->second);
  }
  return out;
}

}  // namespace

SparseVector::SparseVector(std::initializer_list<Entry> entries)
    : SparseVector(from_entries(std::vector<Entry>(entries))) {}

SparseVector SparseVector::from_entries(std::vector<Entry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& l, const Entry& r) { return l.first < r.first; });
  SparseVector v;
  v.entries_.reserve(entries.size());
  for (const auto& [i, value] : entries) {
    if (!v.entries_.empty() && v.entries_.back().first == i) {
      v.entries_.back().second += value;
    } else {
      v.entries_.emplace_back(i, value);
    }
  }
  std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });
  return v;
}

SparseVector SparseVector::unit(Index i, double value) {
  SparseVector v;
  v.set(i, value);
  return v;
}

double SparseVector::operator[](Index i) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                             [](const Entry& e, Index key) { return e.first < key; });
  return (it != entries_.end() && it->first == i) ? it->second : 0.0;
}

std::optional<Index> SparseVector::max_index() const {
  if (entries_.empty()) {
    return std::nullopt;
  }
  return entries_.back().first;
}

std::vector<Index> SparseVector::support() const {
  std::vector<Index> s;
  s.reserve(entries_.size());
  for (const auto& e : entries_) {
    s.push_back(e.first);
  }
  return s;
}

void SparseVector::set(Index i, double value) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                             [](const Entry& e, Index key) { return e.first < key; });
  const bool present = it != entries_.end() && it->first == i;
  if (value == 0.0) {
    if (present) {
      entries_.erase(it);
    }
  } else if (present) {
    it->second = value;
  } else {
    entries_.insert(it, Entry{i, value});
  }
}

SparseVector& SparseVector::operator+=(const SparseVector& other) {
  entries_ = merge_scaled(1.0, entries_, 1.0, other.entries_);
  return *this;
}

SparseVector& SparseVector::operator-=(const SparseVector& other) {
  entries_ = merge_scaled(1.0, entries_, -1.0, other.entries_);
  return *this;
}

SparseVector& SparseVector::operator*=(double s) {
  if (s == 0.0) {
    entries_.clear();
    return *this;
  }
  for (auto& e : entries_) {
    e.second *= s;
  }
  // Underflow can produce zeros.
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
  return *this;
}

SparseVector axpy(double a, const SparseVector& x, const SparseVector& y) {
  SparseVector out = y;
  if (a == 0.0) {
    return out;
  }
  out += a * x;
  return out;
}

DualFunctional::DualFunctional(SparseVector coefficients)
    : coefficients_(std::move(coefficients)) {}

DualFunctional::DualFunctional(SparseVector coefficients, double dual_norm)
    : coefficients_(std::move(coefficients)),
      kind_(DualNormKind::UserSupplied),
      user_norm_(dual_norm) {
  if (!(dual_norm >= 0.0) || !std::isfinite(dual_norm)) {
    throw ParameterError("DualFunctional: dual norm must be finite and non-negative");
  }
}

double DualFunctional::dual_norm() const {
  return kind_ == DualNormKind::SupDual ? l1_norm(coefficients_) : user_norm_;
}

bool DualFunctional::is_normalized(double tol) const { return std::abs(dual_norm() - 1.0) <= tol; }

double pairing(const DualFunctional& f, const SparseVector& x) {
  const auto fe = f.coefficients().entries();
  const auto xe = x.entries();
  double sum = 0.0;
  auto i = fe.begin();
  auto j = xe.begin();
  while (i != fe.end() && j != xe.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      sum += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return sum;
}

double sup_norm(const SparseVector& x) {
  double m = 0.0;
  for (const auto& e : x.entries()) {
    m = std::max(m, std::abs(e.second));
  }
  return m;
}

double l1_norm(const SparseVector& x) {
  double s = 0.0;
  for (const auto& e : x.entries()) {
    s += std::abs(e.second);
  }
  return s;
}

double lp_norm(const SparseVector& x, double p) {
  const double m = sup_norm(x);
  if (m == 0.0) {
    return 0.0;
  }
  double s = 0.0;
  for (const auto& e : x.entries()) {
    s += std::pow(std::abs(e.second) / m, p);
  }
  return m * std::pow(s, 1.0 / p);
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Sup: return "sup";
    case Provenance::Lp: return "lp";
    case Provenance::Scaled: return "scaled";
    case Provenance::Seed: return "seed";
    case Provenance::Approx: return "approx";
    case Provenance::Combined: return "combined";
    case Provenance::Cascade: return "cascade";
    case Provenance::User: return "user";
  }
  return "unknown";
}

NormOracle::NormOracle(Evaluator evaluator, double lower_const, double upper_const,
                       Provenance provenance, std::string label)
    : evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))),
      lower_(lower_const),
      upper_(upper_const),
      provenance_(provenance),
      label_(std::move(label)) {
  if (!(lower_const > 0.0) || !(lower_const <= upper_const)) {
    throw ParameterError("NormOracle: need 0 < lower_const <= upper_const");
  }
}

NormOracle sup_norm_oracle() {
  return NormOracle([](const SparseVector& x) { return sup_norm(x); }, 1.0, 1.0, Provenance::Sup,
                    "sup");
}

NormOracle lp_norm_oracle(double p, std::size_t section_dim) {
  if (!(p >= 1.0) || section_dim == 0) {
    throw ParameterError("lp_norm_oracle: need p >= 1 and a positive section dimension");
  }
  const double upper = std::pow(static_cast<double>(section_dim), 1.0 / p);
  return NormOracle([p](const SparseVector& x) { return lp_norm(x, p); }, 1.0, upper,
                    Provenance::Lp, "l" + std::to_string(p));
}

NormOracle scaled(const NormOracle& n, double factor) {
  if (!(factor > 0.0)) {
    throw ParameterError("scaled: factor must be positive");
  }
  return NormOracle([n, factor](const SparseVector& x) { return factor * n(x); },
                    factor * n.lower_const(), factor * n.upper_const(), Provenance::Scaled,
                    std::to_string(factor) + "*" + n.label());
}

const char* to_string(ConeSide s) {
  switch (s) {
    case ConeSide::Plus: return "plus";
    case ConeSide::Minus: return "minus";
    case ConeSide::Outside: return "outside";
  }
  return "unknown";
}

ConeSide cone_side_from(double f_of_x, double norm_of_x, double r) {
  if (norm_of_x == 0.0) {
    return ConeSide::Plus;
  }
  if (f_of_x >= r * norm_of_x) {
    return ConeSide::Plus;
  }
  if (f_of_x <= -r * norm_of_x) {
    return ConeSide::Minus;
  }
  return ConeSide::Outside;
}

ConeSide cone_side(const DualFunctional& f, double r, const NormOracle& n, const SparseVector& x) {
  if (!(r > 0.0 && r < 1.0)) {
    throw ParameterError("cone_side: r must lie in (0, 1)");
  }
  return cone_side_from(pairing(f, x), n(x), r);
}

FactProbeReport fact1_probe(const DualFunctional& f0, double delta, const SparseVector& x,
                            std::size_t samples, std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw HypothesisNotMet("delta must lie in (0, 1/2)");
  }
  const double norm_x = sup_norm(x);
  if (!(std::abs(pairing(f0, x)) < norm_x / 8.0)) {
    throw HypothesisNotMet("|<f0,x>| < |x|/8 is required");
  }

  std::set<Index> coords;
  for (const auto& e : x.entries()) {
    coords.insert(e.first);
  }
  for (const auto& e : f0.coefficients().entries()) {
    coords.insert(e.first);
  }
  coords.insert(*coords.rbegin() + 1);  // fresh coordinate

  const double radius = norm_x / 8.0;
  const auto sup = sup_norm_oracle();
  FactProbeReport report;
  report.samples = samples;
  report.seed = seed;
  CounterRng rng(seed, "fact1_probe");
  for (std::size_t s = 0; s < samples; ++s) {
    CounterRng sample_rng = rng.split(s);
    std::vector<SparseVector::Entry> entries;
    entries.reserve(coords.size());
    for (Index c : coords) {
      entries.emplace_back(c, x[c] + sample_rng.uniform(-radius, radius));
    }
    SparseVector y = SparseVector::from_entries(std::move(entries));
    if (cone_side(f0, 1.0 - delta, sup, y) != ConeSide::Outside) {
      report.pass = false;
      report.first_counterexample = std::move(y);
      break;
    }
  }
  return report;
}

}  // namespace renormlab
