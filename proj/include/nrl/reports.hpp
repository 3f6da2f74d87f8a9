#pragma once

// JSON renderings of audit results for run_store documents.

#include <string>
#include <vector>

#include "asymptotic_audit.hpp"
#include "run_store.hpp"

namespace nrl {

inline json to_json(const CoefficientReport& c) {
  json j{{"order", "1/(m log^" + std::to_string(c.order) + " m)"},
         {"claimed", c.claimed.str()},
         {"claim_text", c.claim_text},
         {"recomputed", c.recomputed.str()},
         {"match", to_string(c.match)},
         {"notes", c.notes}};
  if (c.sign) j["sign_analysis"] = c.sign->str();
  return j;
}

inline json to_json(const RecurrenceReport& r) {
  json orders = json::array();
  for (const auto& c : r.orders) orders.push_back(to_json(c));
  json j{{"track", to_string(r.track)}, {"rhs", r.rhs}, {"coefficients", orders}, {"notes", r.notes}};
  j["C"] = r.c ? json(r.c->str()) : json(nullptr);
  j["D"] = r.d ? json(r.d->str()) : json(nullptr);
  j["residual"] = recurrence_residual(r).str();
  return j;
}

inline json to_json(const ShiftVariantAudit& a) {
  json pts = json::array();
  for (const auto& p : a.points)
    pts.push_back({{"m", p.m},
                   {"observed", p.observed},
                   {"displayed", p.displayed},
                   {"proof_product", p.proof_product},
                   {"consistent", p.consistent}});
  return json{{"coefficient", "1/(m log^3 m) in log log p_{m+1} - log log p_m"},
              {"displayed", a.displayed.str()},
              {"proof_product", a.proof_product.str()},
              {"consistent", a.consistent.str()},
              {"smooth_model_points", pts},
              {"closest", a.closest}};
}

inline json to_json(const IdentityCheck& c) {
  json pts = json::array();
  for (const auto& p : c.points)
    pts.push_back({{"m", p.m}, {"exact", p.exact}, {"series", p.series}, {"residual", p.residual}, {"scaled", p.scaled}});
  return json{{"identity", c.name}, {"first_discarded", c.discarded}, {"points", pts},
              {"residual_decreasing", c.decreasing}, {"scaled_growth", c.growth}};
}

inline json to_json(const CdTrend& t) {
  json pts = json::array();
  for (const auto& p : t.points)
    pts.push_back({{"m_max", p.m_max}, {"C", p.c}, {"C_std_error", p.c_err}, {"D", p.d}, {"D_std_error", p.d_err},
                   {"residual_norm", p.residual_norm}});
  return json{{"points", pts}, {"abs_C_nonincreasing", t.abs_c_nonincreasing}, {"statement", t.statement}};
}

inline json to_json(const VerdictConfrontation& v) {
  return json{{"k_max", v.k_max},
              {"track", to_string(v.track)},
              {"scan", {{"total", v.scan.total},
                        {"holds", v.scan.holds},
                        {"fails", v.scan.fails},
                        {"indeterminate", v.scan.indeterminate},
                        {"undefined_rhs", v.scan.undefined}}},
              {"min_margin", std::isinf(v.min_margin) ? json(nullptr) : json(v.min_margin)},
              {"min_margin_k", v.min_margin_k},
              {"symbolic_conclusion", "LHS < RHS"},
              {"order3_report", to_json(v.order3)},
              {"strengthened_inequality", {{"statement", "prod p/phi(p) < e^gamma log log N_k"},
                                           {"holds", v.strengthened_holds},
                                           {"fails", v.strengthened_fails}}},
              {"statement", v.statement}};
}

inline json to_json(const ThetaProbe& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back({{"m", r.m}, {"p_m", r.p_m}, {"theta", r.theta}, {"eta_signed", r.eta_signed}});
  return json{{"s", t.s},
              {"empirical_eta", t.empirical_eta},
              {"one_sided_max", t.one_sided_max},
              {"configured_eta", t.configured_eta},
              {"provenance", t.provenance},
              {"consistent", t.consistent},
              {"rows", rows}};
}

}  // namespace nrl
