#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace renormlab {

using Index = std::uint64_t;

/// Finitely supported real sequence indexed by non-negative integers.
///
/// Entries are kept sorted by index and never store an exact zero, so the
/// support size is the number of stored entries and two vectors compare
/// equal iff they agree coordinatewise.
class SparseVector {
 public:
  using Entry = std::pair<Index, double>;

  SparseVector() = default;
  /// Duplicate indices are summed; zeros are dropped.
  SparseVector(std::initializer_list<Entry> entries);
  static SparseVector from_entries(std::vector<Entry> entries);
  static SparseVector unit(Index i, double value = 1.0);

  [[nodiscard]] double operator[](Index i) const;
  [[nodiscard]] std::span<const Entry> entries() const { return entries_; }
  [[nodiscard]] std::size_t support_size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  /// Largest index in the support; nullopt for the zero vector.
  [[nodiscard]] std::optional<Index> max_index() const;
  [[nodiscard]] std::vector<Index> support() const;

  /// Sets coordinate i (setting 0 erases it).
  void set(Index i, double value);

  SparseVector& operator+=(const SparseVector& other);
  SparseVector& operator-=(const SparseVector& other);
  SparseVector& operator*=(double s);

  friend SparseVector operator+(SparseVector a, const SparseVector& b) { return a += b; }
  friend SparseVector operator-(SparseVector a, const SparseVector& b) { return a -= b; }
  friend SparseVector operator*(double s, SparseVector a) { return a *= s; }
  friend SparseVector operator*(SparseVector a, double s) { return a *= s; }
  friend SparseVector operator-(SparseVector a) { return a *= -1.0; }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<Entry> entries_;
};

/// a*x + y without intermediate allocations beyond the result.
SparseVector axpy(double a, const SparseVector& x, const SparseVector& y);

enum class DualNormKind { SupDual, UserSupplied };

/// Bounded functional with finitely many non-zero coefficients. Against the
/// sup norm its dual norm is the l1 norm of the coefficients; functionals
/// acting on a user norm carry their dual norm explicitly.
class DualFunctional {
 public:
  DualFunctional() = default;
  explicit DualFunctional(SparseVector coefficients);
  DualFunctional(SparseVector coefficients, double dual_norm);

  static DualFunctional unit(Index i) { return DualFunctional(SparseVector::unit(i)); }

  [[nodiscard]] const SparseVector& coefficients() const { return coefficients_; }
  [[nodiscard]] DualNormKind kind() const { return kind_; }
  [[nodiscard]] double dual_norm() const;
  [[nodiscard]] bool is_normalized(double tol = 1e-12) const;

  friend bool operator==(const DualFunctional&, const DualFunctional&) = default;

 private:
  SparseVector coefficients_;
  DualNormKind kind_ = DualNormKind::SupDual;
  double user_norm_ = 0.0;
};

double pairing(const DualFunctional& f, const SparseVector& x);
double sup_norm(const SparseVector& x);
double l1_norm(const SparseVector& x);
double lp_norm(const SparseVector& x, double p);

enum class Provenance { Sup, Lp, Scaled, Seed, Approx, Combined, Cascade, User };

const char* to_string(Provenance p);

/// An evaluable equivalent norm together with its declared equivalence
/// constants relative to the sup norm: lower*|x|_inf <= N(x) <= upper*|x|_inf.
///
/// Copies share the evaluator.
class NormOracle {
 public:
  using Evaluator = std::function<double(const SparseVector&)>;

  NormOracle(Evaluator evaluator, double lower_const, double upper_const, Provenance provenance,
             std::string label);

  double operator()(const SparseVector& x) const { return (*evaluator_)(x); }

  [[nodiscard]] double lower_const() const { return lower_; }
  [[nodiscard]] double upper_const() const { return upper_; }
  [[nodiscard]] Provenance provenance() const { return provenance_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  /// Address of the shared evaluator; identifies the oracle instance.
  [[nodiscard]] const void* identity() const { return evaluator_.get(); }

 private:
  std::shared_ptr<const Evaluator> evaluator_;
  double lower_;
  double upper_;
  Provenance provenance_;
  std::string label_;
};

NormOracle sup_norm_oracle();
/// l_p norm restricted to sections of dimension at most section_dim; the
/// upper constant is section_dim^(1/p).
NormOracle lp_norm_oracle(double p, std::size_t section_dim);
NormOracle scaled(const NormOracle& n, double factor);

enum class ConeSide { Plus, Minus, Outside };

const char* to_string(ConeSide s);

/// Membership in C+(f,r,N) = {<f,x> >= r N(x)} and C-(f,r,N). The zero
/// vector belongs to both closed cones and is reported as Plus.
ConeSide cone_side(const DualFunctional& f, double r, const NormOracle& n, const SparseVector& x);
/// Same test from precomputed <f,x> and N(x).
ConeSide cone_side_from(double f_of_x, double norm_of_x, double r);

struct FactProbeReport {
  bool pass = true;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::optional<SparseVector> first_counterexample;
};

/// Samples y in the sup ball B(x, |x|/8) over support(x), support(f0) and
/// one fresh coordinate, and checks that no sample lies in C(f0, 1-delta).
/// Throws HypothesisNotMet unless |<f0,x>| < |x|/8 and 0 < delta < 1/2.
FactProbeReport fact1_probe(const DualFunctional& f0, double delta, const SparseVector& x,
                            std::size_t samples, std::uint64_t seed);

}  // namespace renormlab
