#pragma once

#include <string>

#include "json.hpp"
#include "ppinfo/estimator.hpp"
#include "ppinfo/grid.hpp"
#include "ppinfo/info.hpp"
#include "ppinfo/pgfl.hpp"
#include "ppinfo/units.hpp"

// JSON rendering for CLI results.  Convention: every number that carries a
// dimension appears as {"value": ..., "unit_exponent": "p/q"}; bare numbers
// are unitless.

namespace ppinfo {

inline nlohmann::json quantity_json(const Quantity& q) {
  return {{"value", q.value()}, {"unit_exponent", q.unit().str()}};
}

inline nlohmann::json pattern_json(const PointPattern& pattern, const BaseSpace& space) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : pattern.points) points.push_back(p);
  return {{"n", pattern.size()},
          {"points", points},
          {"point_unit_exponent", space.axis_unit().str()}};
}

inline nlohmann::json audit_report_json(const AuditReport& report) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : report.terms)
    terms.push_back({{"n", t.n}, {"value", t.value}, {"unit_exponent", t.exponent.str()}});
  nlohmann::json out = {{"verdict", verdict_name(report.verdict)},
                        {"defined", report.verdict == AuditVerdict::WellDefined},
                        {"terms", terms}};
  if (report.offending_exponents) {
    out["offending_exponents"] = {report.offending_exponents->first.str(),
                                  report.offending_exponents->second.str()};
  } else {
    out["offending_exponents"] = nullptr;
  }
  out["offending_log_unit"] =
      report.offending_log_unit ? nlohmann::json(report.offending_log_unit->str())
                                : nlohmann::json(nullptr);
  out["value"] = report.value ? nlohmann::json(*report.value) : nlohmann::json(nullptr);
  out["nondimensionalized"] = report.nondimensionalized;
  if (report.nondimensionalized) {
    out["k"] = report.k;
    if (report.verdict != AuditVerdict::WellDefined)
      out["note"] = "numeric value under scale k only; not a defined quantity";
  }
  return out;
}

inline nlohmann::json map_estimate_json(const MapEstimate& est, const BaseSpace& space) {
  nlohmann::json out = pattern_json(est.pattern, space);
  out["score"] = est.score;
  out["c"] = quantity_json(est.c_used);
  return out;
}

inline nlohmann::json pgfl_report_json(const PgflCheckReport& report) {
  return {{"max_series_vs_closed", report.max_series_vs_closed},
          {"max_moyal_rel_err", report.max_moyal_rel_err},
          {"max_janossy_rel_err", report.max_janossy_rel_err}};
}

}  // namespace ppinfo
