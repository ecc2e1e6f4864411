#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "renormlab/report.hpp"
#include "renormlab/seed_norm.hpp"
#include "renormlab/smooth.hpp"
#include "renormlab/vectors.hpp"

namespace renormlab {

struct BiorthogonalPair {
  SparseVector x;
  DualFunctional f;
};

/// The sequence n -> (x_n, f_n), n = 1, 2, ..., possibly finite.
///
/// The decay certificate returns some N with |<f_m, v>| < threshold for
/// every m >= N; it stands in for weak* nullity and must be exact.
class PairSequence {
 public:
  using Generator = std::function<BiorthogonalPair(std::size_t)>;
  using DecayCertificate = std::function<std::size_t(const SparseVector&, double)>;

  PairSequence(std::string name, Generator generator, DecayCertificate certificate,
               std::optional<std::size_t> length);

  /// (e_n, e_n) in c0 with the l1 dual.
  static PairSequence coordinate();
  static PairSequence finite(std::string name, std::vector<BiorthogonalPair> pairs);

  [[nodiscard]] BiorthogonalPair operator()(std::size_t n) const;
  [[nodiscard]] std::optional<std::size_t> length() const { return length_; }
  [[nodiscard]] const std::string& name() const { return name_; }
  /// Least n >= 1 such that |<f_m, v>| < threshold for all m >= n.
  [[nodiscard]] std::size_t decay_index(const SparseVector& v, double threshold) const;

 private:
  std::string name_;
  Generator generator_;
  DecayCertificate certificate_;
  std::optional<std::size_t> length_;
};

/// eta_n = first * ratio^(n-1).
struct EtaSchedule {
  double first = 0.02;
  double ratio = 0.5;

  double operator()(std::size_t n) const;
  /// Upper bound on prod_{n >= 1} (1 + eta_n): exact product up to
  /// `exact_terms` times exp of the geometric tail sum.
  [[nodiscard]] double product_bound(std::size_t exact_terms) const;
};

/// ((4-delta)/(4-2delta))^(1/4) - 1, the admissible bound for every eta_n.
double eta_limit(double delta);

enum class Backend { RescaleExact, LfcSup };

const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct CascadeConfig {
  double delta = 0.4;
  PairSequence pairs = PairSequence::coordinate();
  EtaSchedule etas;
  double a_level = 0.9;  // cone where stage n takes over: C(f_n, a_level)
  double b_level = 0.6;  // outside C(f_n, b_level) stage n changes nothing
  double alpha = 1.0;
  NormOracle base = sup_norm_oracle();
  NormOracle base0 = sup_norm_oracle();
  Backend backend = Backend::RescaleExact;
  std::size_t stage_budget = 128;
  std::uint64_t seed = 42;
  /// Stages whose sandwich hypotheses are sampled when the cascade is
  /// built; later stages are checked when first materialized.
  std::size_t eager_validation_stages = 16;
  std::size_t validation_samples = 64;
  /// Relative slack allowed on base(x_n) = 1 (rescaled extracted pairs).
  double x0_tolerance = 1e-9;
};

/// Default derived quantities for a delta and schedule: levels 1-delta/4 and
/// 1-delta, alpha = 1/((1-delta)(1+eta_1)), and base0 = (1+eta_1)^(3/2) sup
/// (RescaleExact) or (1+eta_1) * lfc_sup_approx(eta_1) (LfcSup); both base0
/// satisfy (1+eta_1)|.| <= base0 <= (1+eta_1)^2 |.|.
CascadeConfig make_cascade_config(double delta, EtaSchedule etas, Backend backend,
                                  PairSequence pairs, std::size_t stage_budget,
                                  std::uint64_t seed);
CascadeConfig c0_preset(double delta = 0.4, EtaSchedule etas = {}, Backend backend = Backend::RescaleExact,
                        std::size_t stage_budget = 128, std::uint64_t seed = 42);

struct CascadeEvaluation {
  double value = 0.0;
  std::size_t stabilized_at = 0;
};

/// The stagewise combination N_0 = base0, N_n = combine(N_{n-1}, A_n, eta_n)
/// with A_n the approximation of the seed norm of (x_n, f_n, delta).
///
/// Copies share state. Stages are materialized on demand under a lock;
/// evaluation of materialized stages is safe from several threads.
class CascadeNorm {
 public:
  struct Stage {
    std::size_t n = 0;
    BiorthogonalPair pair;
    double eta = 0.0;
    SeedNorm seed;
    ApproxNorm approx;
    std::shared_ptr<const BumpProfile> profile;
  };

  [[nodiscard]] const CascadeConfig& config() const;
  /// Number of stages that exist: stage_budget, or fewer for finite pairs.
  [[nodiscard]] std::size_t stage_limit() const;
  [[nodiscard]] std::size_t materialized() const;
  /// Stage n >= 1, materialized (and validated) on first use.
  const Stage& stage(std::size_t n) const;

  /// N_n(x); N_0 = base0.
  [[nodiscard]] double stage_value(std::size_t n, const SparseVector& x) const;
  /// N_0(x), ..., N_n(x).
  [[nodiscard]] std::vector<double> stage_values(std::size_t n, const SparseVector& x) const;
  /// Least n with |<f_m, x>| < base(x)/8 for all m >= n.
  [[nodiscard]] std::size_t stabilization_index(const SparseVector& x) const;
  [[nodiscard]] CascadeEvaluation evaluate(const SparseVector& x) const;
  double operator()(const SparseVector& x) const { return evaluate(x).value; }

  /// alpha * prod_{k <= n} (1 + eta_k).
  [[nodiscard]] double upper_factor(std::size_t n) const;
  /// alpha * prod_{n >= 1} (1 + eta_n) (bound from the schedule).
  [[nodiscard]] double global_upper_factor() const;

  [[nodiscard]] NormOracle oracle() const;
  [[nodiscard]] NormOracle stage_oracle(std::size_t n) const;

 private:
  friend CascadeNorm build_cascade(CascadeConfig cfg);
  struct Impl;
  explicit CascadeNorm(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

/// The sampling-free part of the validation: delta range, the eta bounds,
/// the product bound and the level ordering. Returns the product bound.
double check_cascade_config(const CascadeConfig& cfg);

/// Validates the configuration (eta bounds, level ordering, the per-stage
/// sandwich hypotheses by directed sampling) and returns the cascade.
/// Throws BuildError naming the violated inequality and stage.
CascadeNorm build_cascade(CascadeConfig cfg);

CascadeEvaluation cascade_eval(const CascadeNorm& cn, const SparseVector& x);

/// Config echo for reports (the pair sequence is recorded by name).
nlohmann::json to_json(const CascadeConfig& cfg);

/// Samples points of C(f_n, a) outside C(f_i, b) for i != n and checks that
/// the cascade equals A_n there.
SuiteReport coincidence_check(const CascadeNorm& cn, std::size_t n, std::size_t samples,
                              std::uint64_t seed);

/// Stage monotonicity, off-cone stage coincidence, the global sandwich,
/// the bound cascade <= 4 |.| and stabilization over random vectors.
SuiteReport cascade_invariant_suite(const CascadeNorm& cn, std::size_t samples, std::uint64_t seed,
                                    std::size_t section_dim = 24);

}  // namespace renormlab
