#include "renormlab/report.hpp"

#include <cmath>
#include <sstream>

#include "renormlab/errors.hpp"

namespace renormlab {

void CheckResult::record(double excess, const std::function<std::string()>& describe_failure) {
  ++checked;
  // NaN counts as a failure.
  const bool ok = excess <= 0.0;
  if (std::isnan(excess)) {
    worst = std::numeric_limits<double>::infinity();
  } else if (excess > worst) {
    worst = excess;
  }
  if (!ok) {
    if (failures == 0 && describe_failure) {
      first_failure = describe_failure();
    }
    ++failures;
  }
}

void CheckResult::record_bool(bool ok, const std::function<std::string()>& describe_failure) {
  ++checked;
  if (!ok) {
    if (failures == 0 && describe_failure) {
      first_failure = describe_failure();
    }
    ++failures;
  }
}

bool SuiteReport::pass() const {
  if (checks.empty()) {
    return false;
  }
  for (const auto& c : checks) {
    if (!c.pass()) {
      return false;
    }
  }
  return true;
}

std::optional<std::string> SuiteReport::first_failure() const {
  for (const auto& c : checks) {
    if (!c.pass()) {
      return suite + "/" + c.name;
    }
  }
  return std::nullopt;
}

nlohmann::json to_json(const CheckResult& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["pass"] = c.pass();
  j["tolerance"] = c.tolerance;
  j["checked"] = c.checked;
  j["failures"] = c.failures;
  // -inf (checks recorded via record_bool only) is not representable in JSON.
  j["worst_excess"] = std::isfinite(c.worst) ? nlohmann::json(c.worst) : nlohmann::json(nullptr);
  j["first_failure"] = c.first_failure ? nlohmann::json(*c.first_failure) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["property"] = property;
  j["seed"] = seed;
  j["pass"] = pass();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back(renormlab::to_json(c));
  }
  j["details"] = details;
  return j;
}

nlohmann::json to_json(const SparseVector& v) {
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [i, value] : v.entries()) {
    entries[std::to_string(i)] = value;
  }
  return nlohmann::json{{"entries", entries}};
}

nlohmann::json to_json(const DualFunctional& f) {
  nlohmann::json j = to_json(f.coefficients());
  if (f.kind() == DualNormKind::UserSupplied) {
    j["dual_norm"] = f.dual_norm();
  }
  return j;
}

SparseVector sparse_vector_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_object()) {
    throw ParameterError("expected an object of the form {\"entries\": {...}}");
  }
  std::vector<SparseVector::Entry> entries;
  for (const auto& [key, value] : j["entries"].items()) {
    if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos) {
      throw ParameterError("coordinate index must be a non-negative integer, got '" + key + "'");
    }
    if (!value.is_number()) {
      throw ParameterError("coordinate value must be a number");
    }
    entries.emplace_back(std::stoull(key), value.get<double>());
  }
  return SparseVector::from_entries(std::move(entries));
}

DualFunctional dual_functional_from_json(const nlohmann::json& j) {
  SparseVector c = sparse_vector_from_json(j);
  if (j.contains("dual_norm")) {
    return DualFunctional(std::move(c), j["dual_norm"].get<double>());
  }
  return DualFunctional(std::move(c));
}

nlohmann::json to_json(const FactProbeReport& r) {
  nlohmann::json j;
  j["pass"] = r.pass;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["first_counterexample"] =
      r.first_counterexample ? to_json(*r.first_counterexample) : nlohmann::json(nullptr);
  return j;
}

std::string describe(const SparseVector& v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << '{';
  bool first = true;
  for (const auto& [i, value] : v.entries()) {
    if (!first) {
      os << ", ";
    }
    first = false;
    os << i << ": " << value;
  }
  os << '}';
  return os.str();
}

}  // namespace renormlab
