// Runs `renormlab verify-all` twice with the default configuration and
// grades the thirteen acceptance criteria, one PASS/FAIL line each.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "renormlab/analysis.hpp"
#include "renormlab/biortho.hpp"
#include "renormlab/seed_norm.hpp"
#include "renormlab/smooth.hpp"

using nlohmann::json;
using namespace renormlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Accumulates the reasons a criterion fails.
struct Verdict {
  std::vector<std::string> problems;
  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": got " << got << ", want " << want << " within " << tol;
      problems.push_back(os.str());
    }
  }
};

std::vector<json> reports(const json& bundle, const std::string& section, const std::string& suite) {
  std::vector<json> out;
  for (const auto& r : bundle["sections"][section]["reports"])
    if (r["suite"] == suite) out.push_back(r);
  return out;
}

// A named check must pass with a tolerance no looser than `tol` over at
// least `min_samples` samples.
void check(Verdict& v, const json& report, const std::string& name, double tol, std::size_t min_samples) {
  for (const auto& c : report["checks"]) {
    if (c["name"] != name) continue;
    const std::string where = report["suite"].get<std::string>() + "." + name;
    v.require(c["pass"].get<bool>(), where + " failed: " + c["first_failure"].dump());
    v.require(c["tolerance"].get<double>() <= tol, where + " tolerance " + c["tolerance"].dump());
    v.require(c["checked"].get<std::size_t>() >= min_samples,
              where + " checked only " + c["checked"].dump() + " samples");
    return;
  }
  v.problems.push_back(report["suite"].get<std::string>() + " has no check " + name);
}

void check_all(Verdict& v, const std::vector<json>& rs, const std::string& name, double tol, std::size_t n) {
  if (rs.empty()) v.problems.push_back("no report for " + name);
  for (const auto& r : rs) check(v, r, name, tol, n);
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "renormlab-acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  int run_codes[2] = {-1, -1};
  for (int i = 0; i < 2; ++i) {
    const fs::path out = root / ("run" + std::to_string(i));
    const std::string cmd = std::string(RENORMLAB_CLI) + " verify-all --out " + out.string() + " > " +
                            (root / ("log" + std::to_string(i) + ".txt")).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    run_codes[i] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  const fs::path b0 = root / "run0" / "bundle.json";
  if (!fs::exists(b0)) {
    std::cout << "FAIL verify-all produced no bundle (exit " << run_codes[0] << ")\n";
    return 1;
  }
  const json bundle = json::parse(slurp(b0));

  std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria;

  criteria.emplace_back("psi contract", [&](Verdict& v) {
    const auto rs = reports(bundle, "psi", "psi");
    std::set<double> deltas;
    for (const auto& r : rs) deltas.insert(r["details"]["delta"].get<double>());
    v.require(deltas == std::set<double>{0.1, 0.25, 0.4}, "psi suites do not cover delta 0.1, 0.25, 0.4");
    check_all(v, rs, "fixed_point_residual", 1e-10, 10000);
    check_all(v, rs, "subadditivity", 1e-8, 10000);
    check_all(v, rs, "positive_homogeneity", 1e-8, 10000);
    check_all(v, rs, "x0_translation_invariance", 1e-8, 10000);
    check_all(v, rs, "zero_set_characterization", 1e-8, 10000);
  });

  criteria.emplace_back("seed-norm equivalence and worked values", [&](Verdict& v) {
    const auto rs = reports(bundle, "seed_norm", "seed_norm");
    check_all(v, rs, "base_le_seed", 1e-9, 10000);
    check_all(v, rs, "seed_le_base_over_1_minus_delta", 1e-9, 10000);
    const SeedNorm s(coordinate_seed_params(1, 0.4));
    v.near(s(SparseVector::unit(2)), 1.0, 1e-9, "seed(e2)");
    v.near(s(SparseVector::unit(1)), 1.25, 1e-9, "seed(e1)");
    v.near(s(SparseVector{{1, 1.0}, {2, 0.5}}), 1.375, 1e-9, "seed(e1 + e2/2)");
    for (const auto& r : reports(bundle, "seed_norm", "seed_worked_values"))
      for (const auto& c : r["checks"]) v.require(c["pass"].get<bool>(), "bundle worked value " + c["name"].dump());
  });

  criteria.emplace_back("derivative estimate", [&](Verdict& v) {
    const auto rs = reports(bundle, "lemmas", "derivative_lemma");
    check_all(v, rs, "one_sided_quotient_ge_rhs", 1e-8, 32 * 20);
    const SeedNorm s(coordinate_seed_params(1, 0.4));
    const SparseVector e2 = SparseVector::unit(2);
    v.near(lemma_derivative_bound(s, e2).rhs, 0.15625, 1e-12, "bound at e2");
    v.near((s(axpy(0.25, e2, s.vertex())) - 1.0) / 0.25, 0.25, 1e-9, "quotient at e2");
  });

  criteria.emplace_back("slice estimate", [&](Verdict& v) {
    const auto rs = reports(bundle, "lemmas", "seed_lemmas");
    check_all(v, rs, "slice_diameter_estimate", 1e-8, 1);
    std::set<double> eps;
    for (const auto& r : rs)
      for (const auto& s : r["details"]["slices"]) eps.insert(s["eps"].get<double>());
    v.require(eps == std::set<double>{0.05, 0.01, 0.001}, "slices do not cover eps 0.05, 0.01, 0.001");
    v.near(lemma_slice_bound(0.4, 0.05), 0.9, 1e-12, "slice bound at eps 0.05");
  });

  criteria.emplace_back("cone comparison", [&](Verdict& v) {
    check_all(v, reports(bundle, "lemmas", "seed_lemmas"), "cone_comparison", 1e-12, 10000);
    v.near(lemma_cone_factor(0.4), 0.888889, 5e-7, "cone factor");
  });

  criteria.emplace_back("lattice property", [&](Verdict& v) {
    check_all(v, reports(bundle, "seed_norm", "seed_norm"), "lattice_monotonicity", 1e-9, 10000);
  });

  criteria.emplace_back("combination properties", [&](Verdict& v) {
    const auto rs = reports(bundle, "combine", "combine");
    v.require(rs.size() == 5, "expected 5 norm pairs, found " + std::to_string(rs.size()));
    check_all(v, rs, "max_le_combined", 1e-8, 1000);
    check_all(v, rs, "combined_le_1_plus_eps_max", 1e-8, 1000);
    check_all(v, rs, "selection_when_dominated", 1e-8, 1);
    const auto deg = reports(bundle, "combine", "combine_degenerate");
    v.require(deg.size() == 1, "degenerate pair report missing");
    for (const auto& r : deg)
      for (const auto& c : r["checks"]) {
        v.require(c["pass"].get<bool>(), "combine(N, 2N) failed");
        v.require(c["tolerance"].get<double>() <= 1e-9, "combine(N, 2N) tolerance");
      }
    const NormOracle sup = sup_norm_oracle();
    const SparseVector x{{1, 0.3}, {4, -1.7}};
    v.near(combine_norms(sup, scaled(sup, 2.0), 0.1)(x), 3.4, 3.4e-9, "combine(sup, 2 sup)");
  });

  criteria.emplace_back("cascade theorem", [&](Verdict& v) {
    const auto inv = reports(bundle, "cascade", "cascade_invariants");
    check_all(v, inv, "stage_monotone", 1e-8, 10000);
    check_all(v, inv, "off_cone_stage_coincidence", 1e-8, 10000);
    check_all(v, inv, "sandwich_lower", 1e-8, 10000);
    check_all(v, inv, "sandwich_upper", 1e-8, 10000);
    check_all(v, inv, "bound_4_base", 1e-8, 10000);
    const auto co = reports(bundle, "cascade", "cascade_coincidence");
    v.require(co.size() >= 3, "too few coincidence reports");
    check_all(v, co, "coincidence", 1e-8, 1);
    for (const auto& r : inv) v.require(r["details"]["global_upper_factor"].get<double>() <= 4.0, "alpha product > 4");
  });

  criteria.emplace_back("non-uniform Gateaux witnesses", [&](Verdict& v) {
    const auto rs = reports(bundle, "witness", "ug_witness");
    check_all(v, rs, "quotient_gt_delta_over_16", 1e-6, 32 * 5);
    check_all(v, rs, "t0_lt_tau", 0.0, 32 * 5);
    std::set<double> taus;
    for (const auto& r : rs)
      for (const auto& row : r["details"]["rows"]) taus.insert(row["tau"].get<double>());
    v.require(taus == std::set<double>{1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, "tau set incomplete");
    v.require(direction_set_v1().size() == 32, "direction set size");
  });

  criteria.emplace_back("dentability", [&](Verdict& v) {
    const auto rs = reports(bundle, "dentability", "dentability");
    check_all(v, rs, "witness_in_slice", 0.0, 3);
    check_all(v, rs, "sampled_diameter_le_bound", 1e-8, 3);
    check_all(v, rs, "bound_lt_r", 0.0, 3);
    std::set<double> radii;
    for (const auto& r : rs)
      for (const auto& t : r["details"]["targets"]) {
        radii.insert(t["r"].get<double>());
        v.require(t["bound"].get<double>() < t["r"].get<double>(), "bound not below r");
        v.require(t["certified"].get<bool>(), "target not certified");
      }
    v.require(radii == std::set<double>{0.5, 0.1, 0.01}, "radii incomplete");
  });

  criteria.emplace_back("local finite dependence", [&](Verdict& v) {
    check_all(v, reports(bundle, "combine", "lfc"), "flat_coordinate_invariance", 0.0, 1000);
  });

  criteria.emplace_back("biorthogonal extraction", [&](Verdict& v) {
    const auto rs = reports(bundle, "biortho", "biortho");
    v.require(!rs.empty(), "no extraction report");
    if (rs.empty()) return;
    const json& r = rs.front();
    v.require(r["details"]["extraction"]["indices"] == json({1, 3, 5, 7, 9}), "shifted-average indices");
    check(v, r, "T_idempotent", 1e-10, 1);
    check(v, r, "f_annihilates_I_minus_T", 1e-10, 1);
    check(v, r, "cross_pairing_lt_eps", 0.0, 20);
    check(v, r, "unit_pairing", 1e-12, 5);
    check(v, r, "cascade_accepts_pairs", 0.0, 1);
    const ExtractionResult x = extract_system(FunctionalStream::shifted_average(), 0.1, 5);
    for (const auto& p : x.pairs) v.require(pairing(p.f, p.x) == 1.0, "unit pairing is not exact");
  });

  criteria.emplace_back("determinism", [&](Verdict& v) {
    v.require(run_codes[0] == run_codes[1], "exit codes differ");
    for (const char* f : {"bundle.json", "witness.csv", "dentability.csv"}) {
      const auto a = root / "run0" / f, b = root / "run1" / f;
      v.require(fs::exists(a) && fs::exists(b), std::string(f) + " missing");
      v.require(slurp(a) == slurp(b), std::string(f) + " differs between runs");
    }
  });

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.problems.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = v.problems.empty();
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first;
    if (!ok) {
      std::cout << " [";
      for (std::size_t k = 0; k < v.problems.size(); ++k) std::cout << (k ? "; " : "") << v.problems[k];
      std::cout << "]";
    }
    std::cout << "\n";
  }
  std::cout << "verify-all exit code " << run_codes[0] << "\n";
  return failed == 0 && run_codes[0] == 0 ? 0 : 1;
}
