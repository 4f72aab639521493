// Command-line front end.  Subcommands: entropy, kl, map, c-sweep, audit,
// pgfl-check, sample.  Exit codes: 0 success (audit verdict failures are
// data, not errors), 2 configuration/usage error, 3 numerical failure.
// Output is a single JSON document written once (stdout or --out file).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppinfo/config.hpp"
#include "ppinfo/json_out.hpp"
#include "ppinfo/ppinfo.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_path;  // empty -> stdout
  std::optional<std::uint64_t> seed_override;
};

ppinfo::RunConfig load_config(const CliOptions& opts) {
  std::ifstream in(opts.config_path);
  if (!in) throw ppinfo::ConfigError("--config", "cannot open file: " + opts.config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ppinfo::ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  ppinfo::RunConfig cfg;
  try {
    cfg = ppinfo::parse_run_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ppinfo::ConfigError("--config", std::string("bad field type: ") + e.what());
  }
  if (opts.seed_override) cfg.seed = *opts.seed_override;
  return cfg;
}

const ppinfo::PointProcessModel& require_model(const ppinfo::RunConfig& cfg) {
  if (!cfg.model) throw ppinfo::ConfigError("model", "missing required field");
  return *cfg.model;
}

void write_output(const CliOptions& opts, const nlohmann::json& doc) {
  std::string text = doc.dump(2);
  text.push_back('\n');
  if (opts.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw ppinfo::ConfigError("--out", "cannot open file: " + opts.out_path);
  out << text;
}

nlohmann::json cmd_entropy(const ppinfo::RunConfig& cfg) {
  const auto& model = require_model(cfg);
  double de = ppinfo::differential_entropy(model, cfg.ref, cfg.grid);
  auto [mc_de, mc_stderr] = ppinfo::mc_entropy(model, cfg.ref, cfg.mc_samples, cfg.seed);
  return {{"de", de},
          {"mc_de", mc_de},
          {"mc_stderr", mc_stderr},
          {"mc_samples", cfg.mc_samples},
          {"c", ppinfo::quantity_json(cfg.ref.c)},
          {"n_max", cfg.grid.n_max}};
}

nlohmann::json cmd_kl(const ppinfo::RunConfig& cfg) {
  const auto& model = require_model(cfg);
  if (!cfg.model_0)
    throw ppinfo::ConfigError("model_0", "the kl command needs a second model");
  double kl = ppinfo::kl_divergence(model, *cfg.model_0, cfg.grid);
  return {{"kl", kl}, {"n_max", cfg.grid.n_max}};
}

nlohmann::json cmd_map(const ppinfo::RunConfig& cfg) {
  const auto& model = require_model(cfg);
  ppinfo::MapEstimate est = ppinfo::map_estimate(model, cfg.ref, cfg.grid);
  ppinfo::MapEstimate set_est = ppinfo::set_map_estimate(model, cfg.ref, cfg.grid);
  nlohmann::json out = ppinfo::map_estimate_json(est, model.space());
  out["set_form_agrees"] = est.pattern.points == set_est.pattern.points;
  return out;
}

nlohmann::json cmd_c_sweep(const ppinfo::RunConfig& cfg) {
  const auto& model = require_model(cfg);
  if (cfg.c_sweep.empty())
    throw ppinfo::ConfigError("c_sweep", "the c-sweep command needs a list of c values");
  ppinfo::CSweepResult sweep = ppinfo::c_sensitivity(model, cfg.grid, cfg.c_sweep);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : sweep.rows) {
    nlohmann::json r = ppinfo::map_estimate_json(row.estimate, model.space());
    rows.push_back(std::move(r));
  }
  nlohmann::json out = {{"rows", rows}};
  out["crossing"] = sweep.crossing
                        ? ppinfo::quantity_json(ppinfo::Quantity(*sweep.crossing,
                                                                 ppinfo::UnitExp(1, 1)))
                        : nlohmann::json(nullptr);
  return out;
}

nlohmann::json cmd_audit(const ppinfo::RunConfig& cfg) {
  const auto& model = require_model(cfg);
  ppinfo::TestFunction ones = ppinfo::TestFunction::constant(model.space(), cfg.grid, 1.0);
  ppinfo::NonnegFunction f = ppinfo::NonnegFunction::constant(model.space(), cfg.grid,
                                                              cfg.f_constant);
  nlohmann::json out = {{"alpha", cfg.alpha.str()},
                        {"mode", cfg.mode.kind == ppinfo::AuditMode::Kind::Checked
                                     ? "checked"
                                     : "nondimensionalized"}};
  if (cfg.mode.kind == ppinfo::AuditMode::Kind::Nondimensionalized) out["k"] = cfg.mode.k;
  out["functionals"] = {
      {"generating", ppinfo::audit_report_json(ppinfo::generating_functional_audit(
                         model, ones, cfg.alpha, cfg.grid, cfg.mode))},
      {"generating_f_substituted",
       ppinfo::audit_report_json(ppinfo::generating_functional_audit_f_substituted(
           model, cfg.ref, ones, cfg.alpha, cfg.grid, cfg.mode))},
      {"laplace", ppinfo::audit_report_json(ppinfo::laplace_functional_audit(
                      model, f, cfg.alpha, cfg.grid, cfg.mode))},
      {"cumulant", ppinfo::audit_report_json(ppinfo::cumulant_functional_audit(
                       model, f, cfg.alpha, cfg.grid, cfg.mode))},
      {"shannon", ppinfo::audit_report_json(ppinfo::shannon_entropy_audit(model, cfg.grid,
                                                                          cfg.mode))},
      {"entropy_moments", ppinfo::audit_report_json(ppinfo::entropy_moments_audit(
                              model, cfg.moment_m, cfg.grid, cfg.mode))}};
  return out;
}

nlohmann::json cmd_pgfl_check(const ppinfo::RunConfig& cfg) {
  const auto& model = require_model(cfg);
  ppinfo::PgflCheckReport report = ppinfo::run_pgfl_checks(model, cfg.grid, 20, cfg.seed);
  return ppinfo::pgfl_report_json(report);
}

nlohmann::json cmd_sample(const ppinfo::RunConfig& cfg) {
  const auto& model = require_model(cfg);
  nlohmann::json patterns = nlohmann::json::array();
  for (int i = 0; i < cfg.sample_count; ++i) {
    ppinfo::PointPattern pattern = model.sample(cfg.seed + static_cast<std::uint64_t>(i));
    patterns.push_back(ppinfo::pattern_json(pattern, model.space()));
  }
  return {{"seed", cfg.seed}, {"patterns", patterns}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unit-checked point-process information toolkit"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string command;
  for (const char* name : {"entropy", "kl", "map", "c-sweep", "audit", "pgfl-check", "sample"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opts.out_path, "output file (default: stdout)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&opts](std::uint64_t s) { opts.seed_override = s; },
        "override the configured RNG seed");
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ppinfo::RunConfig cfg;
  try {
    cfg = load_config(opts);
  } catch (const ppinfo::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    nlohmann::json doc;
    if (command == "entropy") doc = cmd_entropy(cfg);
    else if (command == "kl") doc = cmd_kl(cfg);
    else if (command == "map") doc = cmd_map(cfg);
    else if (command == "c-sweep") doc = cmd_c_sweep(cfg);
    else if (command == "audit") doc = cmd_audit(cfg);
    else if (command == "pgfl-check") doc = cmd_pgfl_check(cfg);
    else if (command == "sample") doc = cmd_sample(cfg);
    write_output(opts, doc);
    return 0;
  } catch (const ppinfo::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
