// renormlab command-line driver.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "renormlab/analysis.hpp"
#include "renormlab/biortho.hpp"
#include "renormlab/cascade.hpp"
#include "renormlab/errors.hpp"
#include "renormlab/psi.hpp"
#include "renormlab/seed_norm.hpp"
#include "renormlab/smooth.hpp"
#include "renormlab/verify.hpp"

using namespace renormlab;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

// JSON {"entries": {...}}, a bare {"i": v} object, or "i:v,i:v".
SparseVector parse_vector(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '{') {
    json j = json::parse(text);
    if (!j.contains("entries")) j = json{{"entries", j}};
    return sparse_vector_from_json(j);
  }
  std::vector<SparseVector::Entry> e;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("vector entry '" + item + "' is not of the form index:value");
    std::size_t used = 0;
    const unsigned long long idx = std::stoull(item.substr(0, colon), &used);
    const double v = std::stod(item.substr(colon + 1));
    if (!std::isfinite(v)) throw ConfigError("vector entry '" + item + "' is not finite");
    e.emplace_back(static_cast<Index>(idx), v);
  }
  return SparseVector::from_entries(std::move(e));
}

DualFunctional parse_functional(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '{') {
    json j = json::parse(text);
    if (!j.contains("entries")) j = json{{"entries", j}};
    return dual_functional_from_json(j);
  }
  return DualFunctional(parse_vector(text));
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

// sup | lp:P[:DIM] | seed:I | lfc:ETA | scaled:F:SPEC
NormOracle parse_norm(const std::string& spec, double delta) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "sup") return sup_norm_oracle();
  if (head == "lp") {
    const auto c2 = rest.find(':');
    const double p = std::stod(rest.substr(0, c2));
    const std::size_t dim = c2 == std::string::npos ? 64 : std::stoul(rest.substr(c2 + 1));
    return lp_norm_oracle(p, dim);
  }
  if (head == "seed") return SeedNorm(coordinate_seed_params(std::stoull(rest), delta)).oracle();
  if (head == "lfc") return lfc_sup_approx(std::stod(rest));
  if (head == "scaled") {
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) throw ConfigError("scaled norm needs scaled:FACTOR:SPEC");
    return scaled(parse_norm(rest.substr(c2 + 1), delta), std::stod(rest.substr(0, c2)));
  }
  throw ConfigError("unknown norm '" + spec + "' (sup, lp:P, seed:I, lfc:ETA, scaled:F:SPEC)");
}

RunConfig config_from(const std::string& path) {
  RunConfig cfg = path.empty() ? parse_run_config(json::object()) : load_run_config(path);
  apply_seed_override(cfg);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw ConfigError("cannot write '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"renormlab: seed norms, smooth combinations and cascade renormings"};
  app.require_subcommand(1);
  int status = kPass;

  std::string config_path;
  std::string out_dir;
  auto* verify = app.add_subcommand("verify-all", "Run every suite and write the report bundle");
  verify->add_option("--config", config_path, "JSON run configuration");
  verify->add_option("--out", out_dir, "Output directory (overrides output_dir)");

  double delta = 0.4;
  std::string x0_text = "1:1", f0_text = "1:1", point_text;
  auto* seed_cmd = app.add_subcommand("seed-eval", "Evaluate the seed norm at a point");
  seed_cmd->add_option("--delta", delta, "delta in (0, 1/2)");
  seed_cmd->add_option("--x0", x0_text, "x0 (index:value list or JSON)");
  seed_cmd->add_option("--f0", f0_text, "f0 (index:value list or JSON)");
  seed_cmd->add_option("--point", point_text, "point y")->required();

  double eps = 0.1;
  std::string n1_spec = "sup", n2_spec = "sup";
  auto* combine_cmd = app.add_subcommand("combine", "Evaluate the smooth combination of two norms");
  combine_cmd->add_option("--eps", eps, "profile parameter");
  combine_cmd->add_option("--n1", n1_spec, "first norm: sup, lp:P, seed:I, lfc:ETA, scaled:F:SPEC");
  combine_cmd->add_option("--n2", n2_spec, "second norm");
  combine_cmd->add_option("--delta", delta, "delta for seed norms");
  combine_cmd->add_option("--point", point_text, "point x")->required();

  auto* cascade_cmd = app.add_subcommand("cascade", "Build, evaluate or check the cascade norm");
  cascade_cmd->require_subcommand(1);
  auto* c_build = cascade_cmd->add_subcommand("build", "Validate the configuration and build the cascade");
  auto* c_eval = cascade_cmd->add_subcommand("eval", "Evaluate the cascade norm at a point");
  auto* c_check = cascade_cmd->add_subcommand("check", "Run the cascade invariants and coincidence checks");
  std::size_t stages = 0, samples = 0, stage_n = 3;
  for (auto* sc : {c_build, c_eval, c_check}) sc->add_option("--config", config_path, "JSON run configuration");
  c_build->add_option("--stages", stages, "stages to materialize and validate");
  c_eval->add_option("--point", point_text, "point x")->required();
  c_check->add_option("--stage", stage_n, "stage for the coincidence check");
  c_check->add_option("--samples", samples, "samples (default from config)");

  std::string direction_text = "2:1", tau_text = "1e-3", csv_path;
  auto* witness_cmd = app.add_subcommand("witness", "Non-uniform Gateaux witnesses along a direction");
  witness_cmd->add_option("--config", config_path, "JSON run configuration");
  witness_cmd->add_option("--direction", direction_text, "unit direction h");
  witness_cmd->add_option("--tau", tau_text, "scale or comma-separated scales");
  witness_cmd->add_option("--csv", csv_path, "write (tau, n0, t0, quotient) rows here");

  std::string targets_text = "0.5,0.1,0.01";
  auto* dent_cmd = app.add_subcommand("dentability", "Small slices of the cascade ball");
  dent_cmd->add_option("--config", config_path, "JSON run configuration");
  dent_cmd->add_option("--targets", targets_text, "comma-separated radii");
  dent_cmd->add_option("--samples", samples, "slice samples (default from config)");

  std::string stream_spec = "shifted_average";
  std::size_t k = 5, budget = 100000;
  auto* extract_cmd = app.add_subcommand("extract", "Extract an almost biorthogonal system");
  extract_cmd->add_option("--stream", stream_spec, "coordinate, shifted_average or a JSON file");
  extract_cmd->add_option("--eps", eps, "eps in (0, 1)");
  extract_cmd->add_option("--k", k, "number of pairs");
  extract_cmd->add_option("--budget", budget, "candidate search budget");

  std::string figure_out;
  auto* figure_cmd = app.add_subcommand("figure-data", "Grid of psi and seed norm values on a 2D section");
  figure_cmd->add_option("--config", config_path, "JSON run configuration");
  figure_cmd->add_option("--out", figure_out, "CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    if (*verify) {
      RunConfig cfg = config_from(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      const VerifyOutcome out = run_verify_all(cfg);
      write_outcome(out, cfg.output_dir);
      for (const auto& name : out.bundle["section_order"]) {
        const auto& s = out.bundle["sections"][name.get<std::string>()];
        std::cout << (s["pass"].get<bool>() ? "PASS " : "FAIL ") << name.get<std::string>() << "\n";
      }
      if (!out.pass) {
        std::cerr << "first failure: " << out.first_failure.value_or("?") << "\n";
        status = kFail;
      }
    } else if (*seed_cmd) {
      const SeedNorm s(SeedParams::make(parse_vector(x0_text), parse_functional(f0_text), delta, sup_norm_oracle()));
      const SeedEvaluation e = s.evaluate(parse_vector(point_text));
      std::cout << json{{"value", e.value}, {"branch", to_string(e.branch)}, {"psi", e.psi}}.dump() << "\n";
    } else if (*combine_cmd) {
      const NormOracle a = parse_norm(n1_spec, delta);
      const NormOracle b = parse_norm(n2_spec, delta);
      const SparseVector x = parse_vector(point_text);
      const BumpProfile bp(eps);
      json j{{"value", combine_norms(a, b, eps)(x)},
             {"n1", {{"spec", n1_spec}, {"value", a(x)}}},
             {"n2", {{"spec", n2_spec}, {"value", b(x)}}},
             {"profile", {{"eps", bp.eps()}, {"a", bp.a()}, {"quadrature_tol", bp.quadrature_tol()}}}};
      std::cout << j.dump() << "\n";
    } else if (*cascade_cmd) {
      const RunConfig cfg = config_from(config_path);
      const CascadeNorm cn = build_cascade(cascade_config_for(cfg));
      if (*c_build) {
        if (stages > 0) cn.stage(std::min(stages, cn.stage_limit()));
        std::cout << json{{"config", to_json(cn.config())},
                          {"stages_validated", cn.materialized()},
                          {"global_upper_factor", cn.global_upper_factor()},
                          {"eta_limit", eta_limit(cfg.delta)}}
                         .dump(2)
                  << "\n";
      } else if (*c_eval) {
        const CascadeEvaluation e = cn.evaluate(parse_vector(point_text));
        std::cout << json{{"value", e.value}, {"stabilized_at", e.stabilized_at}, {"config", to_json(cn.config())}}
                         .dump()
                  << "\n";
      } else {
        const std::size_t n_inv = samples ? samples : cfg.samples.cascade;
        const std::size_t n_co = samples ? samples : cfg.samples.coincidence;
        const SuiteReport inv = cascade_invariant_suite(cn, n_inv, cfg.seed);
        const SuiteReport co = coincidence_check(cn, stage_n, n_co, cfg.seed);
        std::cout << json{{"config", to_json(cn.config())}, {"reports", {inv.to_json(), co.to_json()}}}.dump(2)
                  << "\n";
        if (!inv.pass() || !co.pass()) status = kFail;
      }
    } else if (*witness_cmd) {
      const RunConfig cfg = config_from(config_path);
      const CascadeNorm cn = build_cascade(cascade_config_for(cfg));
      const SparseVector h = parse_vector(direction_text);
      std::string csv = "tau,n0,t0,quotient\n";
      auto rows = json::array();
      bool all = true;
      for (double tau : parse_list(tau_text)) {
        const UgWitness w = ug_witness(cn, h, tau);
        std::ostringstream line;
        line.imbue(std::locale::classic());
        line.precision(17);
        line << tau << "," << w.n0 << "," << w.t0 << "," << w.quotient << "\n";
        csv += line.str();
        rows.push_back({{"tau", tau}, {"n0", w.n0}, {"t0", w.t0}, {"quotient", w.quotient}, {"pass", w.pass}});
        all = all && w.pass;
      }
      if (!csv_path.empty()) write_text(csv_path, csv);
      std::cout << json{{"direction", to_json(h)}, {"eps0", cfg.delta / 16.0}, {"rows", rows}, {"pass", all}}.dump(2)
                << "\n";
      if (!all) status = kFail;
    } else if (*dent_cmd) {
      const RunConfig cfg = config_from(config_path);
      const CascadeNorm cn = build_cascade(cascade_config_for(cfg));
      const SuiteReport r =
          dentability_report(cn, parse_list(targets_text), samples ? samples : cfg.samples.slice, cfg.seed);
      std::cout << r.to_json().dump(2) << "\n";
      if (!r.pass()) status = kFail;
    } else if (*extract_cmd) {
      FunctionalStream stream = FunctionalStream::shifted_average();
      if (stream_spec == "coordinate") {
        stream = FunctionalStream::coordinate();
      } else if (stream_spec != "shifted_average") {
        std::ifstream in(stream_spec);
        if (!in) throw ConfigError("cannot open stream file '" + stream_spec + "'");
        const json j = json::parse(in);
        std::vector<DualFunctional> head;
        for (const auto& f : j.at("functionals")) head.push_back(dual_functional_from_json(f));
        stream = FunctionalStream::from_list(stream_spec, std::move(head));
      }
      const ExtractionResult r = extract_system(stream, eps, k, budget);
      std::cout << to_json(r).dump(2) << "\n";
    } else if (*figure_cmd) {
      const RunConfig cfg = config_from(config_path);
      const std::string csv = emit_figure_data(cfg);
      if (figure_out.empty()) std::cout << csv; else write_text(figure_out, csv);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const BuildError& e) {
    std::cerr << "cascade validation failed: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kUsage;
  } catch (const HypothesisNotMet& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "malformed JSON: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return status;
}
