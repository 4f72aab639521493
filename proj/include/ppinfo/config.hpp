#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppinfo/grid.hpp"
#include "ppinfo/info.hpp"
#include "ppinfo/measure.hpp"
#include "ppinfo/model.hpp"
#include "ppinfo/rational.hpp"

namespace ppinfo {

// Configuration failure carrying the offending field path; the CLI maps this
// (and nothing else) to exit code 2.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_path, const std::string& message)
      : std::runtime_error("config error at " + field_path + ": " + message),
        field(std::move(field_path)) {}
};

struct RunConfig {
  BaseSpace space;
  QuadratureGrid grid;
  ReferenceMeasure ref{1.0};
  std::optional<PointProcessModel> model;
  std::optional<PointProcessModel> model_0;  // second model, used by the kl command
  int mc_samples = 100000;
  std::uint64_t seed = 1;
  Rational alpha;  // audit exponent, exact
  AuditMode mode = AuditMode::checked();
  int moment_m = 1;
  double f_constant = 0.0;  // constant f for the Laplace/cumulant audits
  std::vector<double> c_sweep;
  int sample_count = 1;
};

namespace detail {

inline const nlohmann::json& member(const nlohmann::json& j, const char* key,
                                    const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing required field");
  return *it;
}

inline double number_field(const nlohmann::json& j, const char* key, const std::string& path) {
  const auto& v = member(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "." + key, "must be a number");
  return v.get<double>();
}

inline GridFunction density_from_json(const nlohmann::json& jv, const BaseSpace& space,
                                      const QuadratureGrid& grid, const std::string& path) {
  if (jv.is_string()) {
    if (jv.get<std::string>() == "uniform") return GridFunction::uniform_pdf(space, grid);
    throw ConfigError(path, "unknown density keyword (only \"uniform\")");
  }
  if (jv.is_number())
    return GridFunction::constant(space, grid, jv.get<double>(), UnitExp(-1, 1));
  if (jv.is_array()) {
    std::vector<double> values = jv.get<std::vector<double>>();
    if (values.size() != static_cast<std::size_t>(grid.cell_count(space)))
      throw ConfigError(path, "cell array must have one value per grid cell");
    return GridFunction{std::move(values), UnitExp(-1, 1)};
  }
  throw ConfigError(path, "must be a number, a per-cell array, or \"uniform\"");
}

inline PointProcessModel model_from_json(const nlohmann::json& jm, const BaseSpace& space,
                                         const QuadratureGrid& grid, const std::string& path) {
  const auto& jv = member(jm, "variant", path);
  if (!jv.is_string()) throw ConfigError(path + ".variant", "must be a string");
  std::string variant = jv.get<std::string>();
  try {
    if (variant == "poisson") {
      return PointProcessModel::poisson(
          space, grid, density_from_json(member(jm, "intensity", path), space, grid,
                                         path + ".intensity"));
    }
    if (variant == "iid_cluster") {
      const auto& jp = member(jm, "cardinality_pmf", path);
      if (!jp.is_array()) throw ConfigError(path + ".cardinality_pmf", "must be an array");
      return PointProcessModel::iid_cluster(
          space, grid, jp.get<std::vector<double>>(),
          density_from_json(member(jm, "spatial", path), space, grid, path + ".spatial"));
    }
    if (variant == "multi_bernoulli") {
      const auto& jc = member(jm, "components", path);
      if (!jc.is_array()) throw ConfigError(path + ".components", "must be an array");
      std::vector<PointProcessModel::BernoulliComponent> comps;
      for (std::size_t i = 0; i < jc.size(); ++i) {
        std::string cpath = path + ".components[" + std::to_string(i) + "]";
        comps.push_back({number_field(jc[i], "q", cpath),
                         density_from_json(member(jc[i], "pdf", cpath), space, grid,
                                           cpath + ".pdf")});
      }
      return PointProcessModel::multi_bernoulli(space, grid, std::move(comps));
    }
    if (variant == "empty_only") return PointProcessModel::empty_only(space, grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".variant", "unknown model variant \"" + variant + "\"");
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;

  if (auto it = j.find("base_space"); it != j.end()) {
    const auto& js = *it;
    if (auto d = js.find("dimension"); d != js.end()) cfg.space.dimension = d->get<int>();
    if (auto b = js.find("bounds"); b != js.end()) {
      cfg.space.bounds.clear();
      for (const auto& pair : *b) {
        if (!pair.is_array() || pair.size() != 2)
          throw ConfigError("base_space.bounds", "each bound must be [lo, hi]");
        cfg.space.bounds.push_back({pair[0].get<double>(), pair[1].get<double>()});
      }
    }
    if (auto u = js.find("unit_name"); u != js.end()) cfg.space.unit_name = u->get<std::string>();
  }
  if (cfg.space.bounds.empty())
    cfg.space.bounds.assign(cfg.space.dimension, {0.0, 1.0});
  try {
    cfg.space.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("base_space", e.what());
  }

  if (auto it = j.find("grid"); it != j.end()) {
    const auto& jg = *it;
    if (auto c = jg.find("cells"); c != jg.end()) cfg.grid.cells_per_axis = c->get<int>();
    if (auto n = jg.find("n_max"); n != jg.end()) cfg.grid.n_max = n->get<int>();
    if (auto t = jg.find("tail_tolerance"); t != jg.end())
      cfg.grid.tail_tolerance = t->get<double>();
  }
  try {
    cfg.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid", e.what());
  }

  if (auto it = j.find("reference"); it != j.end()) {
    double c = detail::number_field(*it, "c_value", "reference");
    try {
      cfg.ref = ReferenceMeasure(c);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("reference.c_value", e.what());
    }
  }

  if (auto it = j.find("model"); it != j.end())
    cfg.model = detail::model_from_json(*it, cfg.space, cfg.grid, "model");
  if (auto it = j.find("model_0"); it != j.end())
    cfg.model_0 = detail::model_from_json(*it, cfg.space, cfg.grid, "model_0");

  if (auto it = j.find("mc"); it != j.end()) {
    if (auto s = it->find("samples"); s != it->end()) cfg.mc_samples = s->get<int>();
    if (auto s = it->find("seed"); s != it->end()) cfg.seed = s->get<std::uint64_t>();
    if (cfg.mc_samples < 2) throw ConfigError("mc.samples", "must be at least 2");
  }

  if (auto it = j.find("audit"); it != j.end()) {
    const auto& ja = *it;
    if (auto a = ja.find("alpha"); a != ja.end()) {
      if (!a->is_string())
        throw ConfigError("audit.alpha", "must be a rational string like \"1/2\"");
      std::optional<Rational> r = Rational::parse(a->get<std::string>());
      if (!r) throw ConfigError("audit.alpha", "not a valid rational \"p/q\"");
      cfg.alpha = *r;
    }
    if (auto m = ja.find("mode"); m != ja.end()) {
      std::string mode = m->get<std::string>();
      if (mode == "checked") {
        cfg.mode = AuditMode::checked();
      } else if (mode == "nondimensionalized") {
        double k = 1.0;
        if (auto kk = ja.find("k"); kk != ja.end()) k = kk->get<double>();
        try {
          cfg.mode = AuditMode::nondimensionalized(k);
        } catch (const std::invalid_argument& e) {
          throw ConfigError("audit.k", e.what());
        }
      } else {
        throw ConfigError("audit.mode", "must be \"checked\" or \"nondimensionalized\"");
      }
    }
    if (auto m = ja.find("m"); m != ja.end()) cfg.moment_m = m->get<int>();
    if (cfg.moment_m < 0 || cfg.moment_m > 4)
      throw ConfigError("audit.m", "moment order must lie in [0, 4]");
    if (auto f = ja.find("f_constant"); f != ja.end()) {
      cfg.f_constant = f->get<double>();
      if (!(cfg.f_constant >= 0.0)) throw ConfigError("audit.f_constant", "must be >= 0");
    }
  }

  if (auto it = j.find("c_sweep"); it != j.end()) {
    cfg.c_sweep = it->get<std::vector<double>>();
    for (double c : cfg.c_sweep)
      if (!(c > 0)) throw ConfigError("c_sweep", "all c values must be positive");
  }

  if (auto it = j.find("sample_count"); it != j.end()) {
    cfg.sample_count = it->get<int>();
    if (cfg.sample_count < 1) throw ConfigError("sample_count", "must be at least 1");
  }

  return cfg;
}

}  // namespace ppinfo
