#pragma once

// JSON forms of transcripts, quantum run reports and bound evaluations.
// Keys keep insertion order so equal inputs serialize byte-identically.

#include "qip/bounds.hpp"
#include "qip/quantum.hpp"
#include "qip/sumcheck.hpp"

#include <json.hpp>

namespace qip {

using Json = nlohmann::ordered_json;

inline Json rational_json(const Rational& r) { return Json{{"exact", to_string(r)}, {"float", to_double(r)}}; }

inline Json transcript_json(const Transcript& t) {
  Json r = Json::array(), f = Json::array();
  for (const auto& x : t.r) r.push_back(to_hex(x.bits));
  for (const auto& p : t.f) {
    Json coeffs = Json::array();
    for (const auto& c : p.coeffs) coeffs.push_back(to_hex(c.bits));
    f.push_back(std::move(coeffs));
  }
  Json j{{"n", t.n}, {"N", t.N}, {"k", t.k}, {"g", to_hex(t.g)}, {"r", std::move(r)}, {"f", std::move(f)},
         {"verdict", t.accept ? "accept" : "reject"}};
  j["reject_round"] = t.reject_round ? Json(*t.reject_round) : Json(nullptr);
  if (!t.reason.empty()) j["reason"] = t.reason;
  return j;
}

inline Json bound_value_json(const BigFloat& b) {
  return Json{{"value", to_string(b)}, {"float", b.convert_to<double>()}, {"vacuous", is_vacuous(b)}};
}

inline Json quantum_report_json(const QuantumRunReport& rep) {
  Json per_u = Json::array();
  for (const auto& pu : rep.per_u)
    per_u.push_back(Json{{"u", pu.u}, {"step1_pass", to_string(pu.step1_pass)}, {"accept", to_string(pu.accept)}});
  Json u_mode{{"mode", rep.exhaustive ? "exhaustive" : "sample"}};
  if (!rep.exhaustive) {
    u_mode["count"] = rep.per_u.size();
    u_mode["seed"] = rep.seed;
  }
  Json j{{"params", Json{{"n", rep.n}, {"N", rep.N}, {"k", rep.k}, {"m", rep.m}, {"d", rep.d}}},
         {"prover", rep.prover},
         {"u_mode", std::move(u_mode)},
         {"per_u", std::move(per_u)},
         {"mean_accept", rational_json(rep.mean_accept)},
         {"bound", bound_value_json(rep.bound)}};
  if (rep.events_a) {
    Json a = Json::array();
    for (const auto& row : *rep.events_a) {
      Json r = Json::array();
      for (const auto& p : row) r.push_back(to_string(p));
      a.push_back(std::move(r));
    }
    j["events"] = Json{{"A", std::move(a)}, {"B_U", to_string(*rep.events_b_mean)}};
  }
  return j;
}

inline Json bound_params_json(const BoundParams& p) {
  return Json{{"n", p.n}, {"d", p.d}, {"N", p.N}, {"m", p.m}, {"k", p.k}};
}

}  // namespace qip
