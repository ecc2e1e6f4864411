#include "renormlab/verify.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <locale>
#include <set>
#include <sstream>

#include "renormlab/analysis.hpp"
#include "renormlab/biortho.hpp"
#include "renormlab/errors.hpp"
#include "renormlab/psi.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/sampling.hpp"
#include "renormlab/seed_norm.hpp"
#include "renormlab/smooth.hpp"

namespace renormlab {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown field '" + k + "'");
  }
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::size_t get_count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(where + ": expected a non-negative integer");
  return j.get<std::size_t>();
}

double get_real(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": expected a finite number");
  return v;
}

std::vector<double> get_reals(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_real(v, where));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  check_keys(j, {"format_version", "delta", "eta", "backend", "stage_budget", "seed", "psi_deltas", "taus",
                 "dentability_targets", "biortho", "samples", "figure", "output_dir"},
             "config");
  RunConfig c;
  if (j.contains("format_version")) {
    c.format_version = get_as<int>(j["format_version"], "format_version");
    if (c.format_version != 1) throw ConfigError("format_version: only version 1 is supported");
  }
  if (j.contains("delta")) c.delta = get_real(j["delta"], "delta");
  if (j.contains("eta")) {
    const auto& e = j["eta"];
    check_keys(e, {"first", "ratio"}, "eta");
    if (e.contains("first")) c.eta.first = get_real(e["first"], "eta.first");
    if (e.contains("ratio")) c.eta.ratio = get_real(e["ratio"], "eta.ratio");
  }
  if (j.contains("backend")) {
    try {
      c.backend = backend_from_string(get_as<std::string>(j["backend"], "backend"));
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("backend: ") + e.what());
    }
  }
  if (j.contains("stage_budget")) c.stage_budget = get_count(j["stage_budget"], "stage_budget");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("psi_deltas")) c.psi_deltas = get_reals(j["psi_deltas"], "psi_deltas");
  if (j.contains("taus")) c.taus = get_reals(j["taus"], "taus");
  if (j.contains("dentability_targets")) c.dentability_targets = get_reals(j["dentability_targets"], "dentability_targets");
  if (j.contains("biortho")) {
    const auto& b = j["biortho"];
    check_keys(b, {"eps", "k"}, "biortho");
    if (b.contains("eps")) c.biortho_eps = get_real(b["eps"], "biortho.eps");
    if (b.contains("k")) c.biortho_k = get_count(b["k"], "biortho.k");
  }
  if (j.contains("samples")) {
    const auto& s = j["samples"];
    check_keys(s, {"psi", "seed_norm", "lemmas", "approximation", "combine", "lfc", "cascade", "coincidence", "slice",
                   "biortho"},
               "samples");
    auto set = [&](const char* key, std::size_t& dst) {
      if (s.contains(key)) dst = get_count(s[key], std::string("samples.") + key);
      if (dst == 0) throw ConfigError(std::string("samples.") + key + ": must be positive");
    };
    set("psi", c.samples.psi);
    set("seed_norm", c.samples.seed_norm);
    set("lemmas", c.samples.lemmas);
    set("approximation", c.samples.approximation);
    set("combine", c.samples.combine);
    set("lfc", c.samples.lfc);
    set("cascade", c.samples.cascade);
    set("coincidence", c.samples.coincidence);
    set("slice", c.samples.slice);
    set("biortho", c.samples.biortho);
  }
  if (j.contains("figure")) {
    const auto& f = j["figure"];
    check_keys(f, {"box", "grid", "section_dim"}, "figure");
    if (f.contains("box")) {
      const auto b = get_reals(f["box"], "figure.box");
      if (b.size() != 4 || !(b[0] < b[1]) || !(b[2] < b[3])) {
        throw ConfigError("figure.box: expected [y1_min, y1_max, y2_min, y2_max] with min < max");
      }
      c.figure.box = {b[0], b[1], b[2], b[3]};
    }
    if (f.contains("grid")) c.figure.grid = get_count(f["grid"], "figure.grid");
    if (c.figure.grid < 2) throw ConfigError("figure.grid: at least 2 points per axis");
    if (f.contains("section_dim")) c.figure.section_dim = get_count(f["section_dim"], "figure.section_dim");
  }
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j["output_dir"], "output_dir");

  for (double d : c.psi_deltas) {
    if (!(d > 0.0 && d < 0.5)) throw ConfigError("psi_deltas: every delta must lie in (0, 1/2)");
  }
  for (double t : c.taus) {
    if (!(t > 0.0)) throw ConfigError("taus: every tau must be positive");
  }
  for (double r : c.dentability_targets) {
    if (!(r > 0.0)) throw ConfigError("dentability_targets: every radius must be positive");
  }
  if (!(c.biortho_eps > 0.0 && c.biortho_eps < 1.0)) throw ConfigError("biortho.eps must lie in (0, 1)");
  if (c.biortho_k < 1) throw ConfigError("biortho.k must be at least 1");
  try {
    check_cascade_config(cascade_config_for(c));
  } catch (const BuildError& e) {
    throw ConfigError(std::string("cascade validation: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["format_version"] = c.format_version;
  j["delta"] = c.delta;
  j["eta"] = {{"first", c.eta.first}, {"ratio", c.eta.ratio}};
  j["backend"] = to_string(c.backend);
  j["stage_budget"] = c.stage_budget;
  j["seed"] = c.seed;
  j["psi_deltas"] = c.psi_deltas;
  j["taus"] = c.taus;
  j["dentability_targets"] = c.dentability_targets;
  j["biortho"] = {{"eps", c.biortho_eps}, {"k", c.biortho_k}};
  const auto& s = c.samples;
  j["samples"] = {{"psi", s.psi},         {"seed_norm", s.seed_norm},     {"lemmas", s.lemmas},
                  {"approximation", s.approximation}, {"combine", s.combine}, {"lfc", s.lfc},
                  {"cascade", s.cascade}, {"coincidence", s.coincidence}, {"slice", s.slice},
                  {"biortho", s.biortho}};
  j["figure"] = {{"box", c.figure.box}, {"grid", c.figure.grid}, {"section_dim", c.figure.section_dim}};
  j["output_dir"] = c.output_dir;
  return j;
}

void apply_seed_override(RunConfig& cfg) {
  const char* env = std::getenv("RENORMLAB_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || env[0] == '-') {
    throw ConfigError(std::string("RENORMLAB_SEED: not a non-negative integer: ") + env);
  }
  cfg.seed = v;
}

CascadeConfig cascade_config_for(const RunConfig& cfg) {
  return c0_preset(cfg.delta, cfg.eta, cfg.backend, cfg.stage_budget, cfg.seed);
}

// ---------------------------------------------------------------- sections

namespace {

CheckResult worked(const std::string& name, double observed, double expected, double tol) {
  CheckResult c(name, tol);
  c.record(std::fabs(observed - expected) - tol,
           [&] { return "observed " + fmt(observed) + ", expected " + fmt(expected); });
  return c;
}

SuiteReport worked_report(const std::string& suite, const std::string& property, std::vector<CheckResult> checks) {
  SuiteReport r;
  r.suite = suite;
  r.property = property;
  r.checks = std::move(checks);
  return r;
}

class Section {
 public:
  Section(std::string name, const json& echo) : name_(std::move(name)), echo_(echo) {}

  void add(SuiteReport r) { reports_.push_back(std::move(r)); }

  // Runs one body; an exception becomes a failed report carrying its message.
  void run(const std::string& suite, const std::function<void(Section&)>& body) {
    try {
      body(*this);
    } catch (const std::exception& e) {
      SuiteReport r;
      r.suite = suite;
      r.property = "exception";
      CheckResult c("completed", 0.0);
      c.record_bool(false, [&] { return std::string(e.what()); });
      r.checks.push_back(std::move(c));
      reports_.push_back(std::move(r));
    }
  }

  [[nodiscard]] bool pass() const {
    for (const auto& r : reports_)
      if (!r.pass()) return false;
    return !reports_.empty();
  }

  [[nodiscard]] std::optional<std::string> first_failure() const {
    for (std::size_t i = 0; i < reports_.size(); ++i) {
      if (auto f = reports_[i].first_failure()) {
        return "sections." + name_ + ".reports[" + std::to_string(i) + "](" + reports_[i].suite + ")." + *f;
      }
    }
    return std::nullopt;
  }

  [[nodiscard]] json to_json() const {
    json j;
    j["name"] = name_;
    j["pass"] = pass();
    auto arr = json::array();
    for (const auto& r : reports_) {
      json rj = r.to_json();
      rj["config"] = echo_;
      arr.push_back(std::move(rj));
    }
    j["reports"] = std::move(arr);
    return j;
  }

  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  std::string name_;
  json echo_;
  std::vector<SuiteReport> reports_;
};

std::uint64_t sub_seed(std::uint64_t seed, const std::string& label) { return CounterRng(seed, label).key(); }

}  // namespace

VerifyOutcome run_verify_all(const RunConfig& cfg) {
  json echo = to_json(cfg);
  echo.erase("output_dir");  // bundles do not depend on where they are written
  const double delta = cfg.delta;
  const std::uint64_t seed = cfg.seed;
  const auto& n = cfg.samples;
  VerifyOutcome out;
  std::vector<Section> sections;
  std::string witness_csv = "direction,tau,n0,t0,quotient\n";
  std::string dent_csv = "r,eps0,n0,eta_n0,bound,sampled_diameter,witness_norm,certified\n";

  const SeedNorm seed_norm(coordinate_seed_params(1, delta));

  {
    Section s("psi", echo);
    for (std::size_t i = 0; i < cfg.psi_deltas.size(); ++i) {
      const double d = cfg.psi_deltas[i];
      s.run("psi_property_suite", [&](Section& sec) {
        sec.add(psi_property_suite(coordinate_seed_params(1, d), n.psi, sub_seed(seed, "psi") + i));
      });
    }
    s.run("psi_worked_values", [&](Section& sec) {
      const auto p = coordinate_seed_params(1, 0.4);
      sec.add(worked_report("psi_worked_values", "psi.definition",
                            {worked("psi(e1)", psi_eval(p, SparseVector::unit(1)), 0.0, 1e-12),
                             worked("psi(e2)", psi_eval(p, SparseVector::unit(2)), 0.6, 1e-10),
                             worked("psi(0.8e1+0.5e2)", psi_eval(p, SparseVector{{1, 0.8}, {2, 0.5}}), 0.3, 1e-10),
                             worked("psi(2e2)", psi_eval(p, SparseVector::unit(2, 2.0)), 1.2, 1e-10)}));
    });
    sections.push_back(std::move(s));
  }
  {
    Section s("seed_norm", echo);
    s.run("seed_norm_invariants", [&](Section& sec) {
      sec.add(seed_norm_invariant_suite(seed_norm, n.seed_norm, sub_seed(seed, "seed_norm")));
    });
    s.run("seed_worked_values", [&](Section& sec) {
      const SeedNorm s4(coordinate_seed_params(1, 0.4));
      sec.add(worked_report("seed_worked_values", "seed.description",
                            {worked("seed(e2)", s4(SparseVector::unit(2)), 1.0, 1e-9),
                             worked("seed(0.8e1)", s4(SparseVector::unit(1, 0.8)), 1.0, 1e-9),
                             worked("seed(e1)", s4(SparseVector::unit(1)), 1.25, 1e-9),
                             worked("seed(e1+0.5e2)", s4(SparseVector{{1, 1.0}, {2, 0.5}}), 1.375, 1e-9)}));
    });
    sections.push_back(std::move(s));
  }
  {
    Section s("lemmas", echo);
    s.run("seed_lemmas", [&](Section& sec) {
      sec.add(seed_lemma_suite(seed_norm, n.lemmas, sub_seed(seed, "lemmas")));
    });
    s.run("derivative_lemma", [&](Section& sec) {
      sec.add(derivative_lemma_sweep(seed_norm, direction_set_v1()));
    });
    s.run("lemma_worked_values", [&](Section& sec) {
      const SeedNorm s4(coordinate_seed_params(1, 0.4));
      const SparseVector e2 = SparseVector::unit(2);
      const auto b = lemma_derivative_bound(s4, e2);
      const double q = (s4(axpy(0.25, e2, s4.vertex())) - 1.0) / 0.25;
      const double x_over = sup_norm(SparseVector::unit(1)) / s4(SparseVector::unit(1));
      sec.add(worked_report(
          "lemma_worked_values", "seed.lemmas",
          {worked("derivative_rhs(e2)", b.rhs, 0.15625, 1e-12),
           worked("derivative_t_max(e2)", b.t_max, 0.32 / 0.6, 1e-12),
           worked("derivative_rhs(e1)", lemma_derivative_bound(s4, SparseVector::unit(1)).rhs, -1.25, 1e-12),
           worked("one_sided_quotient(e2, 0.25)", q, 0.25, 1e-9),
           worked("diff_quotient(0.8e1, e2, 0.25)", diff_quotient(s4.oracle(), s4.vertex(), e2, 0.25), 0.5, 1e-9),
           worked("slice_bound(0.05)", lemma_slice_bound(0.4, 0.05), 0.9, 1e-12),
           worked("slice_bound(0.1)", lemma_slice_bound(0.4, 0.1), 1.8, 1e-12),
           worked("cone_factor", lemma_cone_factor(0.4), 3.2 / 3.6, 1e-12),
           worked("cone_ratio(e1)", x_over, 0.8, 1e-9)}));
    });
    sections.push_back(std::move(s));
  }
  {
    Section s("approximation", echo);
    s.run("approximation_estimates", [&](Section& sec) {
      sec.add(approximation_estimates_suite(seed_norm, cfg.eta.first, n.approximation, sub_seed(seed, "approx")));
    });
    s.run("quotient_properties", [&](Section& sec) {
      sec.add(quotient_property_suite(seed_norm.oracle(), n.approximation, sub_seed(seed, "quotient")));
    });
    sections.push_back(std::move(s));
  }
  {
    Section s("combine", echo);
    const NormOracle sup = sup_norm_oracle();
    const NormOracle seed2 = SeedNorm(coordinate_seed_params(2, delta)).oracle();
    const std::vector<std::tuple<NormOracle, NormOracle, double>> pairs{
        {sup, scaled(sup, 2.0), 0.1},
        {sup, seed_norm.oracle(), 0.01},
        {seed_norm.oracle(), seed2, 0.05},
        {lp_norm_oracle(2.0, 16), sup, 0.1},
        {seed_norm.oracle(), lp_norm_oracle(3.0, 16), 0.02},
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      s.run("combine_property_suite", [&](Section& sec) {
        const auto& [a, b, eps] = pairs[i];
        sec.add(combine_property_suite(a, b, eps, n.combine, sub_seed(seed, "combine") + i));
      });
    }
    s.run("combine_degenerate", [&](Section& sec) {
      const NormOracle c = combine_norms(sup, scaled(sup, 2.0), 0.1);
      CheckResult r("combine(N, 2N) = 2N", 1e-9);
      CounterRng rng(sub_seed(seed, "combine-degenerate"));
      const auto coords = coordinate_range(0, 16);
      for (std::size_t k = 0; k < n.combine; ++k) {
        const SparseVector x = random_vector(rng, coords, rng.uniform(0.1, 3.0), 0.5);
        const double want = 2.0 * sup_norm(x);
        r.record(std::fabs(c(x) - want) - 1e-9 * want, [&] { return describe(x); });
      }
      sec.add(worked_report("combine_degenerate", "combine.selection", {r}));
    });
    s.run("lfc_probe", [&](Section& sec) { sec.add(lfc_probe(0.1, n.lfc, sub_seed(seed, "lfc"))); });
    sections.push_back(std::move(s));
  }

  std::optional<CascadeNorm> cn;
  {
    Section s("cascade", echo);
    s.run("cascade_build", [&](Section& sec) {
      cn = build_cascade(cascade_config_for(cfg));
      CheckResult rej("eta_first_0.05_rejected", 0.0);
      bool rejected = false;
      try {
        build_cascade(c0_preset(0.4, EtaSchedule{0.05, 0.5}));
      } catch (const BuildError&) {
        rejected = true;
      }
      rej.record_bool(rejected, [] { return "eta_1 = 0.05 was accepted"; });
      const double eta5 = cn->config().etas(5);
      const auto ev = cn->evaluate(SparseVector::unit(5));
      auto rep = worked_report("cascade_build", "cascade.hypotheses",
                               {rej, worked("cascade(e5)", ev.value, 1.0 / ((1.0 - 0.5 * delta) * std::sqrt(1.0 + eta5)), 1e-9),
                                worked("stabilized_at(e5)", static_cast<double>(ev.stabilized_at), 6.0, 0.0)});
      rep.details["cascade"] = to_json(cn->config());
      rep.details["global_upper_factor"] = cn->global_upper_factor();
      sec.add(std::move(rep));
    });
    if (cn) {
      s.run("cascade_invariants", [&](Section& sec) {
        sec.add(cascade_invariant_suite(*cn, n.cascade, sub_seed(seed, "cascade")));
      });
      for (std::size_t stage : {1, 2, 3, 5, 8}) {
        s.run("coincidence", [&](Section& sec) {
          sec.add(coincidence_check(*cn, stage, n.coincidence, sub_seed(seed, "coincidence")));
        });
      }
    }
    sections.push_back(std::move(s));
  }
  {
    Section s("witness", echo);
    s.run("ug_witness_sweep", [&](Section& sec) {
      if (!cn) throw NumericalError("cascade was not built");
      SuiteReport r = ug_witness_sweep(*cn, direction_set_v1(), cfg.taus);
      for (const auto& row : r.details["rows"]) {
        witness_csv += std::to_string(row["direction"].get<std::size_t>()) + "," + fmt(row["tau"].get<double>()) + "," +
                       std::to_string(row["n0"].get<std::size_t>()) + "," + fmt(row["t0"].get<double>()) + "," +
                       fmt(row["quotient"].get<double>()) + "\n";
      }
      sec.add(std::move(r));
    });
    sections.push_back(std::move(s));
  }
  {
    Section s("dentability", echo);
    s.run("dentability_report", [&](Section& sec) {
      if (!cn) throw NumericalError("cascade was not built");
      SuiteReport r = dentability_report(*cn, cfg.dentability_targets, n.slice, sub_seed(seed, "dentability"));
      for (const auto& row : r.details["targets"]) {
        dent_csv += fmt(row["r"].get<double>()) + "," + fmt(row["eps0"].get<double>()) + "," +
                    std::to_string(row["n0"].get<std::size_t>()) + "," + fmt(row["eta_n0"].get<double>()) + "," +
                    fmt(row["bound"].get<double>()) + "," + fmt(row["sampled_diameter"].get<double>()) + "," +
                    fmt(row["witness_norm"].get<double>()) + "," + (row["certified"].get<bool>() ? "true" : "false") +
                    "\n";
      }
      sec.add(std::move(r));
    });
    sections.push_back(std::move(s));
  }
  {
    Section s("biortho", echo);
    s.run("extraction_shifted_average", [&](Section& sec) {
      sec.add(extraction_suite(FunctionalStream::shifted_average(), cfg.biortho_eps, cfg.biortho_k, n.biortho,
                               sub_seed(seed, "biortho"), delta, cfg.eta));
    });
    s.run("extraction_coordinate", [&](Section& sec) {
      sec.add(extraction_suite(FunctionalStream::coordinate(), cfg.biortho_eps, cfg.biortho_k, n.biortho,
                               sub_seed(seed, "biortho-coordinate"), delta, cfg.eta));
    });
    sections.push_back(std::move(s));
  }

  out.pass = true;
  json secs = json::object();
  auto order = json::array();
  for (const auto& s : sections) {
    if (!s.pass()) {
      out.pass = false;
      if (!out.first_failure) out.first_failure = s.first_failure().value_or("sections." + s.name());
    }
    secs[s.name()] = s.to_json();
    order.push_back(s.name());
  }
  out.bundle["format_version"] = 1;
  out.bundle["config"] = echo;
  out.bundle["section_order"] = std::move(order);
  out.bundle["sections"] = std::move(secs);
  out.bundle["pass"] = out.pass;
  if (out.first_failure) out.bundle["first_failure"] = *out.first_failure;
  out.tables.emplace_back("witness.csv", std::move(witness_csv));
  out.tables.emplace_back("dentability.csv", std::move(dent_csv));
  return out;
}

void write_outcome(const VerifyOutcome& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(std::filesystem::path(dir) / "bundle.json", std::ios::binary);
    f << out.bundle.dump(2) << "\n";
    if (!f) throw NumericalError("cannot write bundle.json in '" + dir + "'");
  }
  for (const auto& [name, text] : out.tables) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    f << text;
    if (!f) throw NumericalError("cannot write " + name + " in '" + dir + "'");
  }
}

std::string emit_figure_data(const RunConfig& cfg) {
  if (cfg.figure.section_dim != 2) {
    throw ParameterError("figure-data: the section must have dimension 2, got " +
                         std::to_string(cfg.figure.section_dim));
  }
  const SeedParams p = coordinate_seed_params(1, cfg.delta);
  const SeedNorm s(p);
  const auto& b = cfg.figure.box;
  const std::size_t g = cfg.figure.grid;
  std::string out = "y1,y2,psi,seed_norm,cone_side\n";
  for (std::size_t i = 0; i < g; ++i) {
    const double y1 = b[0] + (b[1] - b[0]) * static_cast<double>(i) / static_cast<double>(g - 1);
    for (std::size_t j = 0; j < g; ++j) {
      const double y2 = b[2] + (b[3] - b[2]) * static_cast<double>(j) / static_cast<double>(g - 1);
      const SparseVector y{{1, y1}, {2, y2}};
      const SeedEvaluation e = s.evaluate(y);
      out += fmt(y1) + "," + fmt(y2) + "," + fmt(psi_eval(p, y)) + "," + fmt(e.value) + "," + to_string(e.branch) +
             "\n";
    }
  }
  return out;
}

}  // namespace renormlab
