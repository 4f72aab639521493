// Acceptance gate: one pass/fail line per criterion, nonzero exit if any
// criterion fails.  Everything here goes through public headers only; the
// frozen oracle constants were precomputed with 50-digit arithmetic.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ppinfo/ppinfo.hpp"

using namespace ppinfo;
namespace fs = std::filesystem;

namespace {

using Result = std::optional<std::string>;  // nullopt = pass, string = why it failed

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

BaseSpace desk_space() { return BaseSpace::interval(0.0, 10.0); }

QuadratureGrid desk_grid() { return QuadratureGrid{}; }  // 100 cells, n_max 40

GridFunction step_pdf(const BaseSpace& space, const QuadratureGrid& grid) {
  std::vector<double> v(static_cast<std::size_t>(grid.cell_count(space)));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i < v.size() / 2) ? 0.15 : 0.05;
  return GridFunction{v, UnitExp(-1)};
}

// The registered desk models: one representative per variant.
std::vector<PointProcessModel> registered_models(const QuadratureGrid& grid) {
  BaseSpace space = desk_space();
  GridFunction uni = GridFunction::uniform_pdf(space, grid);
  return {PointProcessModel::poisson_constant(space, grid, 0.5),
          PointProcessModel::iid_cluster(space, grid, {0.2, 0.5, 0.3}, uni),
          PointProcessModel::multi_bernoulli(space, grid,
                                             {{0.3, uni}, {0.8, step_pdf(space, grid)}}),
          PointProcessModel::empty_only(space, grid)};
}

const char* model_name(std::size_t i) {
  static const char* names[] = {"poisson", "iid_cluster", "multi_bernoulli", "empty_only"};
  return names[i];
}

// ---- criterion 1 -----------------------------------------------------------

Result criterion_normalization() {
  QuadratureGrid grid = desk_grid();
  auto models = registered_models(grid);
  for (std::size_t i = 0; i < models.size(); ++i) {
    std::vector<double> masses;
    for (double c : {0.5, 1.0, 2.0, 10.0}) {
      ReferenceMeasure ref(c);
      Checked<Quantity> mass =
          integrate(pdf_integrand(models[i], ref), PatternSet::everything(), ref,
                    models[i].space(), grid);
      if (!mass.ok())
        return std::string(model_name(i)) + ": integral failed: " + describe(mass.error());
      if (!mass.value().is_unitless())
        return std::string(model_name(i)) + ": total mass carries a unit";
      double v = mass.value().value();
      if (std::abs(v - 1.0) > 1e-6)
        return std::string(model_name(i)) + " at c=" + fmt(c) + ": mass " + fmt(v);
      masses.push_back(v);
    }
    for (double v : masses)
      if (std::abs(v - masses.front()) > 1e-8)
        return std::string(model_name(i)) + ": mass varies with c by " +
               fmt(std::abs(v - masses.front()));
  }
  return std::nullopt;
}

// ---- criteria 2 and 3 ------------------------------------------------------

Result criterion_moyal_janossy() {
  QuadratureGrid grid = desk_grid();
  auto models = registered_models(grid);
  // Poisson and multi-Bernoulli desk models carry mass on the checked slices.
  for (std::size_t i : {std::size_t{0}, std::size_t{2}}) {
    PgflCheckReport r = run_pgfl_checks(models[i], grid, 20, 1234);
    if (r.max_moyal_rel_err > 1e-4)
      return std::string(model_name(i)) + ": moyal error " + fmt(r.max_moyal_rel_err);
    if (r.max_janossy_rel_err > 1e-4)
      return std::string(model_name(i)) + ": janossy error " + fmt(r.max_janossy_rel_err);
  }
  return std::nullopt;
}

Result criterion_pgfl_series() {
  QuadratureGrid grid = desk_grid();
  auto models = registered_models(grid);
  for (std::size_t i = 0; i < models.size(); ++i) {
    TestFunction ones = TestFunction::constant(models[i].space(), grid, 1.0);
    double g1 = pgfl_eval(models[i], ones, grid);
    if (std::abs(g1 - 1.0) > 1e-6)
      return std::string(model_name(i)) + ": G(1) = " + fmt(g1);
    PgflCheckReport r = run_pgfl_checks(models[i], grid, 20, 1234);
    if (r.max_series_vs_closed > 1e-6)
      return std::string(model_name(i)) + ": series vs closed " + fmt(r.max_series_vs_closed);
  }
  return std::nullopt;
}

// ---- criterion 4 -----------------------------------------------------------

Result criterion_audit_verdicts() {
  QuadratureGrid grid = desk_grid();
  auto models = registered_models(grid);
  ReferenceMeasure ref(2.0);
  std::vector<Rational> alphas = {Rational(0), Rational(1, 2), Rational(1), Rational(3, 2)};
  for (std::size_t i = 0; i < 3; ++i) {  // the occupied models
    TestFunction ones = TestFunction::constant(models[i].space(), grid, 1.0);
    for (const Rational& a : alphas) {
      AuditReport g = generating_functional_audit(models[i], ones, a, grid);
      bool want_defined = a == Rational(0);
      if ((g.verdict == AuditVerdict::WellDefined) != want_defined)
        return std::string(model_name(i)) + " power family at alpha=" + a.str() + ": " +
               verdict_name(g.verdict);
      AuditReport s =
          generating_functional_audit_f_substituted(models[i], ref, ones, a, grid);
      if (s.verdict != AuditVerdict::IncommensurableSum)
        return std::string(model_name(i)) + " f-substituted at alpha=" + a.str() + ": " +
               verdict_name(s.verdict);
    }
    if (shannon_entropy_audit(models[i], grid).verdict != AuditVerdict::DimensionalLog)
      return std::string(model_name(i)) + ": shannon audit not DimensionalLog";
    for (int m : {1, 2})
      if (entropy_moments_audit(models[i], m, grid).verdict != AuditVerdict::DimensionalLog)
        return std::string(model_name(i)) + ": moment audit m=" + std::to_string(m) +
               " not DimensionalLog";
  }
  // A process with mass only on the empty slice is immune.
  const PointProcessModel& empty = models[3];
  TestFunction ones = TestFunction::constant(empty.space(), grid, 1.0);
  for (const Rational& a : alphas)
    if (generating_functional_audit(empty, ones, a, grid).verdict != AuditVerdict::WellDefined)
      return "empty_only power family flagged at alpha=" + a.str();
  if (shannon_entropy_audit(empty, grid).verdict != AuditVerdict::WellDefined)
    return std::string("empty_only shannon flagged");
  return std::nullopt;
}

// ---- criterion 5 -----------------------------------------------------------

Result criterion_relabeling() {
  QuadratureGrid grid = desk_grid();
  auto models = registered_models(grid);
  ReferenceMeasure ref(2.0);
  std::vector<double> ks = {0.1, 3.28084, 1000.0};

  for (std::size_t i : {std::size_t{0}, std::size_t{2}}) {
    double base = differential_entropy(models[i], ref, grid);
    for (double k : ks) {
      double rel = differential_entropy(models[i].relabeled(k), ref.relabeled(k), grid);
      if (std::abs(rel - base) > 1e-8)
        return std::string(model_name(i)) + " DE shifts by " + fmt(rel - base) +
               " at k=" + fmt(k);
    }
  }

  PointProcessModel m1 = PointProcessModel::poisson_constant(desk_space(), grid, 0.5);
  PointProcessModel m0 = PointProcessModel::poisson_constant(desk_space(), grid, 0.4);
  double kl_base = kl_divergence(m1, m0, grid);
  for (double k : ks) {
    double kl_rel = kl_divergence(m1.relabeled(k), m0.relabeled(k), grid);
    if (std::abs(kl_rel - kl_base) > 1e-8)
      return "KL shifts by " + fmt(kl_rel - kl_base) + " at k=" + fmt(k);
  }

  for (std::size_t i : {std::size_t{0}, std::size_t{2}}) {
    AuditReport base = shannon_entropy_audit(models[i], grid, AuditMode::nondimensionalized(1.0));
    if (!base.value) return "nondimensionalized shannon produced no number";
    double mean = models[i].mean_cardinality();
    for (double k : ks) {
      AuditReport rel = shannon_entropy_audit(models[i].relabeled(k), grid,
                                              AuditMode::nondimensionalized(1.0));
      double got = *rel.value - *base.value;
      if (std::abs(got - mean * std::log(k)) > 1e-6)
        return std::string(model_name(i)) + " naive shannon shifted by " + fmt(got) +
               ", expected " + fmt(mean * std::log(k));
      AuditReport scaled =
          shannon_entropy_audit(models[i], grid, AuditMode::nondimensionalized(k));
      if (std::abs((*scaled.value - *base.value) - mean * std::log(k)) > 1e-6)
        return std::string(model_name(i)) + " scale-k shannon shift wrong at k=" + fmt(k);
    }
  }
  return std::nullopt;
}

// ---- criterion 6 -----------------------------------------------------------

Result criterion_poisson_entropy() {
  QuadratureGrid grid = desk_grid();
  PointProcessModel model = PointProcessModel::poisson_constant(desk_space(), grid, 0.5);
  ReferenceMeasure ref(2.0);

  double de = differential_entropy(model, ref, grid);
  // Independent series value Lambda + E[log N!] - E[N] log(c lambda) at
  // Lambda = 5, c lambda = 1.
  if (std::abs(de - 10.25158480559887) > 1e-6)
    return "DE " + fmt(de) + " vs series oracle 10.25158480559887";

  auto [mc, se] = mc_entropy(model, ref, 100000, 42);
  if (!(se > 0.0) || std::abs(mc - de) > 3.0 * se)
    return "MC " + fmt(mc) + " +/- " + fmt(se) + " vs DE " + fmt(de);

  double mean = model.mean_cardinality();
  for (double cp : {0.5, 1.0, 4.0, 10.0}) {
    double want = de - mean * std::log(cp / 2.0);
    double got = differential_entropy(model, ReferenceMeasure(cp), grid);
    if (std::abs(got - want) > 1e-8)
      return "c-shift law off by " + fmt(got - want) + " at c=" + fmt(cp);
  }
  return std::nullopt;
}

// ---- criterion 7 -----------------------------------------------------------

Result criterion_kl() {
  QuadratureGrid grid = desk_grid();
  BaseSpace space = desk_space();
  PointProcessModel m1 = PointProcessModel::poisson_constant(space, grid, 0.5);
  PointProcessModel m0 = PointProcessModel::poisson_constant(space, grid, 0.4);

  double kl = kl_divergence(m1, m0, grid);
  if (std::abs(kl - 0.11571775657104878) > 1e-6)
    return "poisson KL " + fmt(kl) + " vs closed form 0.11571775657104878";

  auto models = registered_models(grid);
  for (std::size_t i = 0; i < models.size(); ++i) {
    double self = kl_divergence(models[i], models[i], grid);
    if (std::abs(self) > 1e-10)
      return std::string(model_name(i)) + ": KL(f, f) = " + fmt(self);
  }

  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> ui(0.05, 0.6);
  std::uniform_real_distribution<double> up(0.1, 1.0);
  std::uniform_real_distribution<double> ud(0.2, 1.8);
  long long cells = grid.cell_count(space);
  double vol = cell_volume(space, grid).value();
  auto random_intensity = [&] {
    std::vector<double> v(static_cast<std::size_t>(cells));
    for (double& x : v) x = ui(rng);
    return GridFunction{std::move(v), UnitExp(-1)};
  };
  auto random_pdf = [&] {
    std::vector<double> v(static_cast<std::size_t>(cells));
    double total = 0.0;
    for (double& x : v) total += (x = ud(rng));
    for (double& x : v) x /= total * vol;
    return GridFunction{std::move(v), UnitExp(-1)};
  };
  auto random_pmf = [&] {
    std::vector<double> v(4);
    double total = 0.0;
    for (double& x : v) total += (x = up(rng));
    for (double& x : v) x /= total;
    return v;
  };
  for (int pair = 0; pair < 20; ++pair) {
    PointProcessModel a = (pair % 2 == 0)
        ? PointProcessModel::poisson(space, grid, random_intensity())
        : PointProcessModel::iid_cluster(space, grid, random_pmf(), random_pdf());
    PointProcessModel b = (pair % 2 == 0)
        ? PointProcessModel::poisson(space, grid, random_intensity())
        : PointProcessModel::iid_cluster(space, grid, random_pmf(), random_pdf());
    double d = kl_divergence(a, b, grid);
    if (d < -1e-9) return "random pair " + std::to_string(pair) + ": KL = " + fmt(d);
  }
  return std::nullopt;
}

// ---- criterion 8 -----------------------------------------------------------

Result criterion_map() {
  QuadratureGrid grid = desk_grid();
  BaseSpace space = desk_space();
  GridFunction uni = GridFunction::uniform_pdf(space, grid);
  PointProcessModel target = PointProcessModel::multi_bernoulli(space, grid, {{0.5, uni}});

  if (!map_estimate(target, ReferenceMeasure(2.0), grid).pattern.empty())
    return std::string("below the crossing the estimate is not empty");
  if (map_estimate(target, ReferenceMeasure(20.0), grid).pattern.size() != 1)
    return std::string("above the crossing the estimate is not one point");

  CSweepResult sweep = c_sensitivity(target, grid, {1.0, 5.0, 20.0});
  if (!sweep.crossing) return std::string("sweep found no crossing");
  if (std::abs(*sweep.crossing - 10.0) > 1e-3 * 10.0)
    return "crossing " + fmt(*sweep.crossing) + " vs (1-q)L/q = 10";

  auto models = registered_models(grid);
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (double c : {0.5, 2.0, 10.0, 30.0}) {
      MapEstimate vec = map_estimate(models[i], ReferenceMeasure(c), grid);
      MapEstimate set = set_map_estimate(models[i], ReferenceMeasure(c), grid);
      if (vec.pattern.points != set.pattern.points)
        return std::string(model_name(i)) + " at c=" + fmt(c) + ": set form disagrees";
    }
  }
  return std::nullopt;
}

// ---- criterion 9 -----------------------------------------------------------

Result criterion_cli_reproducible() {
  const std::string cli = PPINFO_CLI_PATH;
  const fs::path configs = PPINFO_CONFIG_DIR;
  fs::path dir = fs::temp_directory_path() / "ppinfo_acceptance";
  fs::create_directories(dir);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::pair<const char*, const char*> runs[] = {
      {"entropy", "poisson_desk.json"},  {"kl", "kl_poisson.json"},
      {"map", "multibernoulli_desk.json"}, {"c-sweep", "multibernoulli_desk.json"},
      {"audit", "poisson_desk.json"},    {"pgfl-check", "poisson_desk.json"},
      {"sample", "poisson_desk.json"}};
  for (const auto& [command, config] : runs) {
    fs::path out1 = dir / (std::string(command) + "_1.json");
    fs::path out2 = dir / (std::string(command) + "_2.json");
    for (const fs::path& out : {out1, out2}) {
      std::string cmd = "\"" + cli + "\" " + command + " --config \"" +
                        (configs / config).string() + "\" --out \"" + out.string() +
                        "\" 2> /dev/null";
      int rc = std::system(cmd.c_str());
      int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
      if (code != 0)
        return std::string(command) + " exited with code " + std::to_string(code);
    }
    std::string b1 = slurp(out1);
    if (b1.empty()) return std::string(command) + " produced no output";
    if (b1 != slurp(out2)) return std::string(command) + " output differs between runs";
  }
  return std::nullopt;
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<Result()> body;
  };
  const Criterion criteria[] = {
      {"normalization: total mass 1 for every model and c, invariant across c",
       criterion_normalization},
      {"moyal and janossy recovery from numeric p.g.fl. differentials",
       criterion_moyal_janossy},
      {"p.g.fl. series: G(1) = 1 and agreement with closed forms on random h",
       criterion_pgfl_series},
      {"audit verdicts: power family defined iff alpha = 0; f-substituted and "
       "log families flagged",
       criterion_audit_verdicts},
      {"unit relabeling: DE and KL invariant; naive shannon shifts by E[N] log k",
       criterion_relabeling},
      {"poisson differential entropy: series oracle, monte carlo, c-shift law",
       criterion_poisson_entropy},
      {"kl divergence: closed form, zero at identity, nonnegative on random pairs",
       criterion_kl},
      {"map estimate: crossing at (1-q)L/q, set form agrees everywhere", criterion_map},
      {"cli: byte-identical output across repeated runs", criterion_cli_reproducible},
  };

  int failures = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    Result r;
    try {
      r = criteria[i].body();
    } catch (const std::exception& e) {
      r = std::string("exception: ") + e.what();
    }
    if (r) {
      ++failures;
      std::printf("FAIL criterion %zu: %s -- %s\n", i + 1, criteria[i].label, r->c_str());
    } else {
      std::printf("PASS criterion %zu: %s\n", i + 1, criteria[i].label);
    }
  }
  if (failures == 0)
    std::printf("all %zu acceptance criteria hold\n", std::size(criteria));
  else
    std::printf("%d of %zu acceptance criteria failed\n", failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
