#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "renormlab/cascade.hpp"
#include "renormlab/report.hpp"
#include "renormlab/vectors.hpp"

namespace renormlab {

/// A normalized functional sequence n -> f_n (n >= 1) over the sup norm,
/// together with an exact decay certificate: some N with |<f_m, v>| <
/// threshold for all m >= N.
class FunctionalStream {
 public:
  using Generator = std::function<DualFunctional(std::size_t)>;
  using DecayCertificate = std::function<std::size_t(const SparseVector&, double)>;

  FunctionalStream(std::string name, Generator generator, DecayCertificate certificate);

  /// f_n = e_n.
  static FunctionalStream coordinate();
  /// f_n = (e_n + e_{n+1})/2.
  static FunctionalStream shifted_average();
  /// A finite list followed by e_{offset+n}, offset beyond every listed support.
  static FunctionalStream from_list(std::string name, std::vector<DualFunctional> head);

  /// f_n; throws InternalInvariantError if its dual norm is not 1 within 1e-9.
  [[nodiscard]] DualFunctional operator()(std::size_t n) const;
  [[nodiscard]] std::size_t certificate(const SparseVector& v, double threshold) const;
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  std::string name_;
  Generator generator_;
  DecayCertificate certificate_;
};

/// The projections P_i x = (<f_i, x>/<f_i, y_i>) y_i and
/// T_i = T_{i-1} + P_i (I - T_{i-1}), T_0 = 0.
class ProjectionSystem {
 public:
  void push(DualFunctional f, SparseVector y);
  [[nodiscard]] std::size_t size() const { return fs_.size(); }
  [[nodiscard]] SparseVector apply_P(std::size_t i, const SparseVector& x) const;
  /// T_k x for 0 <= k <= size().
  [[nodiscard]] SparseVector apply_T(std::size_t k, const SparseVector& x) const;
  [[nodiscard]] const DualFunctional& f(std::size_t i) const { return fs_.at(i - 1); }
  [[nodiscard]] const SparseVector& y(std::size_t i) const { return ys_.at(i - 1); }

 private:
  std::vector<DualFunctional> fs_;
  std::vector<SparseVector> ys_;
};

struct ExtractionResult {
  std::vector<BiorthogonalPair> pairs;  // (x_i, f_{n_i})
  std::vector<std::size_t> indices;     // n_i
  std::vector<SparseVector> ys;         // unit y_i before rescaling
  ProjectionSystem projections;
  double eps = 0.0;
  double step_threshold = 0.0;  // eps/2, used when choosing n_i
  double max_cross_pairing = 0.0;
  double max_unit_pairing_error = 0.0;  // max |<f_{n_i}, x_i> - 1|
  double max_x_norm = 0.0;
  std::size_t evaluations = 0;
};

/// The extraction recursion: for i = 1..k choose the least n_i > n_{i-1}
/// with |<f_{n_i}, y_j>| < eps/2 for j < i, then search candidates c for
/// y_i = (I - T_{i-1})c / |(I - T_{i-1})c| with <f_{n_i}, y_i> >= 1 - 2^-i eps.
/// Candidates: the sign pattern of f_{n_i}, then grid vectors over earlier
/// supports, supp f_{n_i} and 4 fresh coordinates. Finally x_i = y_i/<f_{n_i}, y_i>.
/// Throws ParameterError for eps outside (0,1) or k = 0, and NumericalError
/// ("near-norming vector not found") when the budget runs out.
ExtractionResult extract_system(const FunctionalStream& stream, double eps, std::size_t k,
                                std::size_t search_budget = 100000);

/// Projection identities (T_k T_k = T_k, <f_{n_i}, (I - T_k)x> = 0), the
/// output certificate, and optionally cascade acceptance of the pairs
/// (a cascade over them with the given delta and schedule).
SuiteReport extraction_suite(const FunctionalStream& stream, double eps, std::size_t k,
                             std::size_t samples, std::uint64_t seed, double cascade_delta = 0.4,
                             EtaSchedule etas = {});

/// The pairs as a finite PairSequence, usable in a cascade configuration.
PairSequence to_pair_sequence(const ExtractionResult& r, std::string name);

nlohmann::json to_json(const ExtractionResult& r);

}  // namespace renormlab
