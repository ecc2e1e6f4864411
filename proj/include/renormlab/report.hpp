#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "renormlab/vectors.hpp"

namespace renormlab {

/// Outcome of one quantified property over many samples.
///
/// Each sample contributes an `excess` = observed - allowed, where the
/// allowed value already includes the tolerance. The check fails as soon
/// as any excess is positive; `worst` is the largest excess seen.
struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::optional<std::string> first_failure;

  CheckResult() = default;
  CheckResult(std::string name_, double tolerance_) : name(std::move(name_)), tolerance(tolerance_) {}

  /// Records one sample; `describe` is only called for the first failure.
  void record(double excess, const std::function<std::string()>& describe);
  void record_bool(bool ok, const std::function<std::string()>& describe);
  [[nodiscard]] bool pass() const { return checked > 0 && failures == 0; }
};

struct SuiteReport {
  std::string suite;
  std::string property;  // identifier of the statement under test
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  nlohmann::json details = nlohmann::json::object();

  [[nodiscard]] bool pass() const;
  /// Name of the first failing check, if any.
  [[nodiscard]] std::optional<std::string> first_failure() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

nlohmann::json to_json(const CheckResult& c);

// {"entries": {"<index>": value, ...}}
nlohmann::json to_json(const SparseVector& v);
nlohmann::json to_json(const DualFunctional& f);
SparseVector sparse_vector_from_json(const nlohmann::json& j);
DualFunctional dual_functional_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FactProbeReport& r);

/// Compact, locale-independent rendering for diagnostics.
std::string describe(const SparseVector& v);

}  // namespace renormlab
