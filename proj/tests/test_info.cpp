#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "ppinfo/ppinfo.hpp"

using namespace ppinfo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

BaseSpace desk_space() { return BaseSpace::interval(0.0, 10.0); }

PointProcessModel desk_poisson(const QuadratureGrid& grid) {
  return PointProcessModel::poisson_constant(desk_space(), grid, 0.5);
}

BaseSpace small_space() { return BaseSpace::interval(0.0, 3.0); }

QuadratureGrid small_grid() {
  QuadratureGrid g;
  g.cells_per_axis = 12;
  return g;
}

// Step density integrating to 1 on [0,3] with 12 cells.
GridFunction step_pdf(const BaseSpace& space, const QuadratureGrid& grid) {
  std::vector<double> v(12);
  for (int i = 0; i < 12; ++i) v[i] = (i < 6) ? 2.0 / 4.5 : 1.0 / 4.5;
  return GridFunction{v, UnitExp(-1)};
}

}  // namespace

TEST_CASE("differential entropy of the desk poisson matches the closed form") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);

  // DE = Lambda + E[log N!] - E[N] log(c lambda); at c = 2, c lambda = 1, and
  // E[log N!] for Poisson(5) = 5.251584805598870 (50-digit arithmetic).
  REQUIRE_THAT(differential_entropy(model, ReferenceMeasure(2.0), grid),
               WithinAbs(10.25158480559887, 1e-9));
  REQUIRE_THAT(differential_entropy(model, ReferenceMeasure(4.0), grid),
               WithinAbs(6.785848902799143, 1e-9));
}

TEST_CASE("the c-shift law holds exactly") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);
  double de2 = differential_entropy(model, ReferenceMeasure(2.0), grid);
  for (double cp : {0.5, 1.0, 3.0, 20.0}) {
    double dep = differential_entropy(model, ReferenceMeasure(cp), grid);
    REQUIRE_THAT(dep, WithinAbs(de2 - model.mean_cardinality() * std::log(cp / 2.0), 1e-8));
  }
}

TEST_CASE("corrected log moments agree with brute-force integration") {
  BaseSpace space = small_space();
  QuadratureGrid grid = small_grid();
  GridFunction uni = GridFunction::uniform_pdf(space, grid);
  GridFunction step = step_pdf(space, grid);
  std::vector<PointProcessModel> models = {
      PointProcessModel::iid_cluster(space, grid, {0.3, 0.45, 0.25}, step),
      PointProcessModel::multi_bernoulli(space, grid, {{0.4, uni}, {0.7, step}}),
      PointProcessModel::empty_only(space, grid)};

  for (const auto& model : models) {
    int cap = model.support_limit();
    for (double c : {0.5, 2.0}) {
      ReferenceMeasure ref(c);
      for (int m = 0; m <= 4; ++m) {
        double got = corrected_entropy_moments(model, ref, m, grid);
        double want = oracle::log_moment(model, c, m, cap);
        REQUIRE_THAT(got, WithinAbs(want, 1e-11));
      }
    }
  }
}

TEST_CASE("corrected moment edge cases") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);
  ReferenceMeasure ref(2.0);

  // m = 0 integrates the density itself: total mass one.
  REQUIRE_THAT(corrected_entropy_moments(model, ref, 0, grid), WithinAbs(1.0, 1e-9));

  // The empty-only process has f identically 1, so every moment vanishes
  // (and the zeroth is the total mass).
  PointProcessModel empty = PointProcessModel::empty_only(desk_space(), grid);
  REQUIRE_THAT(corrected_entropy_moments(empty, ref, 0, grid), WithinAbs(1.0, 1e-14));
  for (int m = 1; m <= 4; ++m)
    REQUIRE_THAT(corrected_entropy_moments(empty, ref, m, grid), WithinAbs(0.0, 1e-14));

  // m = 1 is minus the differential entropy by definition.
  REQUIRE_THAT(corrected_entropy_moments(model, ref, 1, grid),
               WithinAbs(-differential_entropy(model, ref, grid), 1e-12));

  REQUIRE_THROWS_AS(corrected_entropy_moments(model, ref, 5, grid), std::invalid_argument);
  REQUIRE_THROWS_AS(corrected_entropy_moments(model, ref, -1, grid), std::invalid_argument);

  // Mis-declared units are refused before any number is produced.
  GridFunction wrong = GridFunction::constant(desk_space(), grid, 0.5, UnitExp(0));
  PointProcessModel bad = PointProcessModel::poisson(desk_space(), grid, wrong);
  REQUIRE_THROWS_AS(corrected_entropy_moments(bad, ref, 1, grid), UnitMismatchError);
}

TEST_CASE("monte carlo entropy estimates are deterministic and consistent") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);
  ReferenceMeasure ref(2.0);

  auto [mean1, se1] = mc_entropy(model, ref, 20000, 42);
  auto [mean2, se2] = mc_entropy(model, ref, 20000, 42);
  REQUIRE(mean1 == mean2);
  REQUIRE(se1 == se2);

  double de = differential_entropy(model, ref, grid);
  REQUIRE(se1 > 0.0);
  REQUIRE(std::abs(mean1 - de) <= 4.0 * se1);

  auto [mean3, se3] = mc_entropy(model, ref, 20000, 43);
  REQUIRE(mean1 != mean3);

  REQUIRE_THROWS_AS(mc_entropy(model, ref, 1, 42), std::invalid_argument);
}

TEST_CASE("kl divergence between poisson models matches the closed form") {
  QuadratureGrid grid;
  BaseSpace space = desk_space();
  PointProcessModel m1 = PointProcessModel::poisson_constant(space, grid, 0.5);
  PointProcessModel m0 = PointProcessModel::poisson_constant(space, grid, 0.4);

  // Lambda_0 - Lambda_1 + Lambda_1 log(Lambda_1/Lambda_0) for uniform
  // intensities; 50-digit value.
  REQUIRE_THAT(kl_divergence(m1, m0, grid), WithinAbs(0.11571775657104878, 1e-9));
  REQUIRE_THAT(kl_divergence(m1, m1, grid), WithinAbs(0.0, 1e-10));
  REQUIRE(kl_divergence(m0, m1, grid) >= -1e-9);
}

TEST_CASE("kl divergence agrees with brute force and factorizes for iid models") {
  BaseSpace space = small_space();
  QuadratureGrid grid = small_grid();
  GridFunction uni = GridFunction::uniform_pdf(space, grid);
  GridFunction step = step_pdf(space, grid);

  std::vector<double> rho1 = {0.3, 0.45, 0.25};
  std::vector<double> rho0 = {0.5, 0.25, 0.25};
  PointProcessModel m1 = PointProcessModel::iid_cluster(space, grid, rho1, step);
  PointProcessModel m0 = PointProcessModel::iid_cluster(space, grid, rho0, uni);

  double got = kl_divergence(m1, m0, grid);
  REQUIRE_THAT(got, WithinAbs(oracle::kl(m1, m0, 2), 1e-12));

  // KL(rho1 || rho0) + E_1[N] * KL(s1 || s0), assembled independently.
  double card = 0.0;
  for (std::size_t n = 0; n < rho1.size(); ++n)
    if (rho1[n] > 0) card += rho1[n] * std::log(rho1[n] / rho0[n]);
  double vol = cell_volume(space, grid).value();
  double spatial = 0.0;
  for (std::size_t c = 0; c < step.values.size(); ++c)
    spatial += step.values[c] * std::log(step.values[c] / uni.values[c]) * vol;
  double mean1 = m1.mean_cardinality();
  REQUIRE_THAT(got, WithinRel(card + mean1 * spatial, 1e-12));

  // Multi-Bernoulli route against brute force.
  PointProcessModel b1 = PointProcessModel::multi_bernoulli(space, grid, {{0.4, step}, {0.7, uni}});
  PointProcessModel b0 = PointProcessModel::multi_bernoulli(space, grid, {{0.6, uni}, {0.5, uni}});
  REQUIRE_THAT(kl_divergence(b1, b0, grid), WithinAbs(oracle::kl(b1, b0, 2), 1e-12));
  REQUIRE_THAT(kl_divergence(b1, b1, grid), WithinAbs(0.0, 1e-12));
}

TEST_CASE("kl divergence handles the empty-only process") {
  QuadratureGrid grid;
  PointProcessModel empty = PointProcessModel::empty_only(desk_space(), grid);
  PointProcessModel poisson = PointProcessModel::poisson_constant(desk_space(), grid, 0.5);

  REQUIRE(kl_divergence(empty, empty, grid) == 0.0);
  // KL(delta_emptyset || Poisson) = -log p^(0) = Lambda.
  REQUIRE_THAT(kl_divergence(empty, poisson, grid), WithinRel(5.0, 1e-12));
  REQUIRE_THROWS_AS(kl_divergence(poisson, empty, grid), AbsoluteContinuityError);
}

TEST_CASE("kl divergence is invariant under unit relabeling") {
  QuadratureGrid grid;
  BaseSpace space = desk_space();
  PointProcessModel m1 = PointProcessModel::poisson_constant(space, grid, 0.5);
  PointProcessModel m0 = PointProcessModel::poisson_constant(space, grid, 0.4);
  double base = kl_divergence(m1, m0, grid);
  for (double k : {0.1, 3.28084, 1000.0})
    REQUIRE_THAT(kl_divergence(m1.relabeled(k), m0.relabeled(k), grid),
                 WithinAbs(base, 1e-8));
}

TEST_CASE("kl divergence enforces absolute continuity and shared frames") {
  BaseSpace space = small_space();
  QuadratureGrid grid = small_grid();
  GridFunction uni = GridFunction::uniform_pdf(space, grid);

  SECTION("cardinality support") {
    PointProcessModel wide =
        PointProcessModel::iid_cluster(space, grid, {0.5, 0.3, 0.2}, uni);
    PointProcessModel narrow = PointProcessModel::iid_cluster(space, grid, {0.7, 0.3}, uni);
    REQUIRE_THROWS_AS(kl_divergence(wide, narrow, grid), AbsoluteContinuityError);
    REQUIRE(kl_divergence(narrow, wide, grid) >= -1e-9);

    PointProcessModel poisson = PointProcessModel::poisson_constant(space, grid, 0.2);
    REQUIRE_THROWS_AS(kl_divergence(poisson, narrow, grid), AbsoluteContinuityError);
  }
  SECTION("spatial support") {
    std::vector<double> halfv(12, 0.0);
    for (int i = 0; i < 6; ++i) halfv[i] = 1.0 / 1.5;  // mass only on [0, 1.5]
    GridFunction half{halfv, UnitExp(-1)};
    PointProcessModel confined =
        PointProcessModel::iid_cluster(space, grid, {0.5, 0.5}, half);
    PointProcessModel spread = PointProcessModel::iid_cluster(space, grid, {0.5, 0.5}, uni);
    REQUIRE_THROWS_AS(kl_divergence(spread, confined, grid), AbsoluteContinuityError);
    REQUIRE(kl_divergence(confined, spread, grid) >= -1e-9);
  }
  SECTION("frames must match") {
    PointProcessModel a = PointProcessModel::poisson_constant(space, grid, 0.5);
    PointProcessModel b =
        PointProcessModel::poisson_constant(BaseSpace::interval(0.0, 4.0), grid, 0.5);
    REQUIRE_THROWS_AS(kl_divergence(a, b, grid), std::invalid_argument);
  }
  SECTION("unit exponents of the ratio must cancel") {
    GridFunction wrong = GridFunction::constant(space, grid, 0.5, UnitExp(0));
    PointProcessModel bad = PointProcessModel::poisson(space, grid, wrong);
    PointProcessModel good = PointProcessModel::poisson_constant(space, grid, 0.5);
    REQUIRE_THROWS_AS(kl_divergence(bad, good, grid), UnitMismatchError);
  }
}

TEST_CASE("generating-functional audit derives exponents n*alpha") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);
  TestFunction ones = TestFunction::constant(desk_space(), grid, 1.0);

  SECTION("alpha = 0 is the well-defined p.g.fl. itself") {
    AuditReport r = generating_functional_audit(model, ones, Rational(0), grid);
    REQUIRE(r.verdict == AuditVerdict::WellDefined);
    REQUIRE(r.value.has_value());
    REQUIRE_THAT(*r.value, WithinAbs(1.0, 1e-9));  // G(1) = 1
    for (const auto& t : r.terms) REQUIRE(t.exponent == Rational(0));
    TestFunction h = TestFunction::constant(desk_space(), grid, 0.8);
    AuditReport rh = generating_functional_audit(model, h, Rational(0), grid);
    REQUIRE_THAT(*rh.value, WithinRel(0.36787944117144233, 1e-9));
  }
  SECTION("fractional and integral alpha produce incommensurable ladders") {
    for (auto alpha : {Rational(1, 2), Rational(1), Rational(3, 2)}) {
      AuditReport r = generating_functional_audit(model, ones, alpha, grid);
      REQUIRE(r.verdict == AuditVerdict::IncommensurableSum);
      REQUIRE_FALSE(r.value.has_value());
      REQUIRE(r.offending_exponents.has_value());
      for (const auto& t : r.terms) REQUIRE(t.exponent == alpha * t.n);
      // First differing pair is (exponent of n=0, exponent of n=1).
      REQUIRE(r.offending_exponents->first == Rational(0));
      REQUIRE(r.offending_exponents->second == alpha);
    }
  }
  SECTION("single-atom models are immune at every alpha") {
    PointProcessModel empty = PointProcessModel::empty_only(desk_space(), grid);
    AuditReport r = generating_functional_audit(empty, ones, Rational(1, 2), grid);
    REQUIRE(r.verdict == AuditVerdict::WellDefined);
    REQUIRE(r.terms.size() == 1);
    REQUIRE_THAT(*r.value, WithinAbs(1.0, 1e-14));
  }
}

TEST_CASE("f-substituted audit is incommensurable for every alpha") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);
  TestFunction ones = TestFunction::constant(desk_space(), grid, 1.0);
  ReferenceMeasure ref(2.0);

  for (auto alpha : {Rational(0), Rational(1, 2), Rational(1), Rational(3, 2)}) {
    AuditReport r =
        generating_functional_audit_f_substituted(model, ref, ones, alpha, grid);
    REQUIRE(r.verdict == AuditVerdict::IncommensurableSum);
    for (const auto& t : r.terms) REQUIRE(t.exponent == Rational(t.n));
  }
}

TEST_CASE("laplace and cumulant audits ride on the generating functional") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);
  // f = -log(0.8): the Laplace functional at alpha = 0 equals G(0.8) = e^{-1}.
  NonnegFunction f = NonnegFunction::constant(desk_space(), grid, 0.22314355131420976);

  AuditReport lap = laplace_functional_audit(model, f, Rational(0), grid);
  REQUIRE(lap.verdict == AuditVerdict::WellDefined);
  REQUIRE_THAT(*lap.value, WithinRel(0.36787944117144233, 1e-9));

  AuditReport cum = cumulant_functional_audit(model, f, Rational(0), grid);
  REQUIRE(cum.verdict == AuditVerdict::WellDefined);
  REQUIRE_THAT(*cum.value, WithinAbs(-1.0, 1e-9));

  AuditReport bad = cumulant_functional_audit(model, f, Rational(1, 2), grid);
  REQUIRE(bad.verdict == AuditVerdict::IncommensurableSum);
  REQUIRE_FALSE(bad.value.has_value());
}

TEST_CASE("naive shannon entropy is a dimensional log for any occupied model") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);

  AuditReport r = shannon_entropy_audit(model, grid);
  REQUIRE(r.verdict == AuditVerdict::DimensionalLog);
  REQUIRE_FALSE(r.value.has_value());
  REQUIRE(r.offending_log_unit.has_value());
  REQUIRE(*r.offending_log_unit == Rational(-1));
  for (const auto& t : r.terms) REQUIRE(t.exponent == Rational(-t.n));

  for (int m : {1, 2, 3, 4}) {
    AuditReport mr = entropy_moments_audit(model, m, grid);
    REQUIRE(mr.verdict == AuditVerdict::DimensionalLog);
  }

  PointProcessModel empty = PointProcessModel::empty_only(desk_space(), grid);
  AuditReport er = shannon_entropy_audit(empty, grid);
  REQUIRE(er.verdict == AuditVerdict::WellDefined);
  REQUIRE_THAT(*er.value, WithinAbs(0.0, 1e-14));
}

TEST_CASE("nondimensionalized audits produce k-dependent numbers") {
  QuadratureGrid grid;
  PointProcessModel model = desk_poisson(grid);

  SECTION("shannon value shifts by E[N] log k") {
    AuditReport base = shannon_entropy_audit(model, grid, AuditMode::nondimensionalized(1.0));
    REQUIRE(base.verdict == AuditVerdict::DimensionalLog);  // the defect is still real
    REQUIRE(base.value.has_value());
    for (double k : {0.1, 3.28084, 1000.0}) {
      AuditReport r = shannon_entropy_audit(model, grid, AuditMode::nondimensionalized(k));
      REQUIRE(r.value.has_value());
      REQUIRE_THAT(*r.value - *base.value,
                   WithinAbs(model.mean_cardinality() * std::log(k), 1e-6));
    }
  }
  SECTION("power-family values scale by k^exponent per term") {
    TestFunction ones = TestFunction::constant(desk_space(), grid, 1.0);
    AuditReport checked = generating_functional_audit(model, ones, Rational(1, 2), grid);
    AuditReport scaled = generating_functional_audit(model, ones, Rational(1, 2), grid,
                                                     AuditMode::nondimensionalized(2.0));
    REQUIRE(scaled.value.has_value());
    double expect = 0.0;
    for (const auto& t : checked.terms)
      expect += t.value * std::pow(2.0, t.exponent.to_double());
    REQUIRE_THAT(*scaled.value, WithinRel(expect, 1e-12));
    // A different k gives a genuinely different number: not a defined quantity.
    AuditReport other = generating_functional_audit(model, ones, Rational(1, 2), grid,
                                                    AuditMode::nondimensionalized(8.0));
    REQUIRE(std::abs(*other.value - *scaled.value) > 1e-6);
  }
  SECTION("nondimensionalized shannon equals the relabeled naive value") {
    // Computing the naive Shannon sum in a k-relabeled system and
    // nondimensionalizing with that k are the same operation.
    double k = 3.28084;
    AuditReport nd = shannon_entropy_audit(model, grid, AuditMode::nondimensionalized(k));
    PointProcessModel prim = model.relabeled(k);
    AuditReport nd_prim =
        shannon_entropy_audit(prim, grid, AuditMode::nondimensionalized(1.0));
    REQUIRE_THAT(*nd.value, WithinRel(*nd_prim.value, 1e-9));
  }
}

TEST_CASE("audit term tables skip structurally massless slices") {
  BaseSpace space = small_space();
  QuadratureGrid grid = small_grid();
  GridFunction uni = GridFunction::uniform_pdf(space, grid);
  // Mass at n = 0 and n = 2 only.
  PointProcessModel gap = PointProcessModel::iid_cluster(space, grid, {0.4, 0.0, 0.6}, uni);
  TestFunction ones = TestFunction::constant(space, grid, 1.0);
  AuditReport r = generating_functional_audit(gap, ones, Rational(1, 2), grid);
  REQUIRE(r.terms.size() == 2);
  REQUIRE(r.terms[0].n == 0);
  REQUIRE(r.terms[1].n == 2);
  REQUIRE(r.verdict == AuditVerdict::IncommensurableSum);
  REQUIRE(r.offending_exponents->second == Rational(1));  // exponent of n = 2 at alpha = 1/2
}
