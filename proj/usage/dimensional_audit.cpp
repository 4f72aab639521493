// Dimensional-analysis audit: fractional-power functionals of a point
// process on a dimensional base space sum terms with different unit
// exponents, so they are not defined quantities.  The audit derives each
// term's exponent mechanically and reports a verdict instead of a number.

#include <cstdio>

#include "ppinfo/ppinfo.hpp"

using namespace ppinfo;

static void show(const char* name, const AuditReport& r) {
  std::printf("%-28s -> %s", name, verdict_name(r.verdict));
  if (r.value)
    std::printf(" (value %.6f)", *r.value);
  if (r.offending_exponents)
    std::printf(" [exponents %s vs %s]", r.offending_exponents->first.str().c_str(),
                r.offending_exponents->second.str().c_str());
  if (r.offending_log_unit)
    std::printf(" [log of unit exponent %s]", r.offending_log_unit->str().c_str());
  std::printf("\n");
}

int main() {
  BaseSpace space;
  space.bounds = {{0.0, 10.0}};
  QuadratureGrid grid;
  PointProcessModel model = PointProcessModel::poisson_constant(space, grid, 0.5);
  ReferenceMeasure ref(2.0);
  TestFunction ones = TestFunction::constant(space, grid, 1.0);
  NonnegFunction f = NonnegFunction::constant(space, grid, 0.22314355131420976);

  Rational half(1, 2);
  show("G^(1/2), raw", generating_functional_audit(model, ones, half, grid));
  show("G^(1/2), f-substituted",
       generating_functional_audit_f_substituted(model, ref, ones, half, grid));
  show("Laplace^(1/2)", laplace_functional_audit(model, f, half, grid));
  show("cumulant^(1/2)", cumulant_functional_audit(model, f, half, grid));
  show("Shannon entropy", shannon_entropy_audit(model, grid));

  // alpha = 0 collapses every term to a unitless constant: defined.
  show("G^0", generating_functional_audit(model, ones, Rational(0), grid));

  // Nondimensionalizing first always yields a number, but one that depends
  // on the arbitrary scale k; the verdict still records the defect.
  AuditMode scaled = AuditMode::nondimensionalized(1000.0);
  show("Shannon, k=1000", shannon_entropy_audit(model, grid, scaled));
  return 0;
}
