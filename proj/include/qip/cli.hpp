#pragma once

// Command implementations behind the qipsim front end. Argument parsing
// lives in the tool; everything here takes a RunConfig and returns a
// report that renders to JSON or CSV.

#include "qip/bounds.hpp"
#include "qip/dense_oracle.hpp"
#include "qip/quantum.hpp"
#include "qip/report.hpp"
#include "qip/sumcheck.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qip::cli {

inline constexpr const char* kVersion = "qipsim 0.1.0";

class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

struct RunConfig {
  std::string command;  // "classical run", "classical exhaustive", "quantum run", "bound", "field table"
  std::optional<std::string> formula;
  std::optional<std::string> formula_file;
  unsigned k = 0;
  std::size_t m = 1;
  std::string prover = "honest";
  std::string u_mode = "exhaustive";
  std::size_t samples = 16;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::optional<std::string> output;
  std::optional<std::string> format;  // json or csv; per-command default
  bool dense_check = false;
  bool events = false;
  bool transcripts = false;
  bool timing = false;
  // bound
  std::optional<std::uint64_t> xlen, n, d, N, bm, bk;
};

struct ReportDoc {
  Json json;
  std::string csv;
  std::string default_format = "json";
};

inline std::string render(const ReportDoc& doc, const std::optional<std::string>& format) {
  const std::string f = format.value_or(doc.default_format);
  if (f == "json") return doc.json.dump(2) + "\n";
  if (f == "csv") return doc.csv;
  throw UsageError("unknown format '" + f + "' (expected json or csv)");
}

inline PrenexQbf load_formula(const RunConfig& cfg) {
  if (cfg.formula.has_value() == cfg.formula_file.has_value())
    throw UsageError("give exactly one of --formula and --formula-file");
  if (cfg.formula) return parse_qbf(*cfg.formula);
  std::ifstream in(*cfg.formula_file);
  if (!in) throw UsageError("cannot read formula file " + *cfg.formula_file);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_qbf(ss.str());
}

/// splitmix64 step: per-trial seeds from the run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Json field_json(const FieldCtx& f) {
  return Json{{"k", f.k()}, {"g", FieldCtx::poly_string(f.modulus())}, {"g_hex", to_hex(f.modulus())}};
}

inline Json instance_json(const Instance& inst) {
  return Json{{"n", inst.n()},
              {"N", inst.rounds()},
              {"d", inst.d()},
              {"degree_bounds", inst.schedule().degree_bounds},
              {"formula_true", eval_qbf(inst.formula())}};
}

inline Rational classical_bound(const Instance& inst) {
  return Rational(BigInt(inst.d()) * inst.rounds(), BigInt(1) << inst.field().k());
}

inline ReportDoc cmd_classical_run(const RunConfig& cfg) {
  const Instance inst(load_formula(cfg), FieldCtx(cfg.k));
  if (cfg.trials == 0) throw UsageError("--trials must be positive");
  std::shared_ptr<OptimalCheater> optimal;
  if (cfg.prover == "optimal") optimal = std::make_shared<OptimalCheater>(inst);
  else if (cfg.prover != "honest" && cfg.prover != "random")
    throw UsageError("unknown classical prover '" + cfg.prover + "' (honest, random, optimal)");

  ReportDoc doc;
  doc.csv = "trial,seed,verdict,reject_round\n";
  Json runs = Json::array();
  std::size_t accepted = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t s = derive_seed(cfg.seed, t);
    std::unique_ptr<ProverPolicy> own;
    if (cfg.prover == "honest") own = std::make_unique<HonestProver>(inst);
    else if (cfg.prover == "random") own = std::make_unique<RandomProver>(inst, derive_seed(s, 0));
    ProverPolicy& p = optimal ? *optimal : *own;
    const Transcript tr = run_protocol(inst, p, s);
    accepted += tr.accept ? 1 : 0;
    Json run{{"trial", t}, {"seed", s}, {"verdict", tr.accept ? "accept" : "reject"}};
    run["reject_round"] = tr.reject_round ? Json(*tr.reject_round) : Json(nullptr);
    if (cfg.transcripts) run["transcript"] = transcript_json(tr);
    runs.push_back(std::move(run));
    doc.csv += std::to_string(t) + "," + std::to_string(s) + "," + (tr.accept ? "accept" : "reject") + "," +
               (tr.reject_round ? std::to_string(*tr.reject_round) : "") + "\n";
  }
  doc.json = Json{{"command", "classical run"},
                  {"version", kVersion},
                  {"config", Json{{"formula", print_qbf(inst.formula())},
                                  {"k", cfg.k},
                                  {"prover", cfg.prover},
                                  {"trials", cfg.trials},
                                  {"seed", cfg.seed}}},
                  {"instance", instance_json(inst)},
                  {"field", field_json(inst.field())},
                  {"results", Json{{"accepted", accepted},
                                   {"trials", cfg.trials},
                                   {"acceptance", rational_json(Rational(static_cast<long long>(accepted),
                                                                         static_cast<long long>(cfg.trials)))}}},
                  {"bound", Json{{"dN_over_F", rational_json(classical_bound(inst))}}},
                  {"runs", std::move(runs)}};
  return doc;
}

inline ReportDoc cmd_classical_exhaustive(const RunConfig& cfg) {
  const Instance inst(load_formula(cfg), FieldCtx(cfg.k));
  Rational value;
  std::string method;
  if (cfg.prover == "optimal") {
    value = optimal_cheater(inst).max_accept_probability;
    method = "dynamic program over all prover strategies";
  } else if (cfg.prover == "honest") {
    const auto res = exhaustive_honest(inst);
    value = Rational(res.accepted, res.total);
    method = "every challenge vector";
  } else if (cfg.prover == "random") {
    RandomProver p(inst, cfg.seed);
    value = exhaustive_acceptance(inst, p);
    method = "every challenge vector";
  } else {
    throw UsageError("unknown classical prover '" + cfg.prover + "' (honest, random, optimal)");
  }
  const Rational bound = classical_bound(inst);
  ReportDoc doc;
  doc.json = Json{{"command", "classical exhaustive"},
                  {"version", kVersion},
                  {"config", Json{{"formula", print_qbf(inst.formula())},
                                  {"k", cfg.k},
                                  {"prover", cfg.prover},
                                  {"seed", cfg.seed}}},
                  {"instance", instance_json(inst)},
                  {"field", field_json(inst.field())},
                  {"results", Json{{"method", method}, {"accept_probability", rational_json(value)}}},
                  {"bound", Json{{"dN_over_F", rational_json(bound)}, {"within_bound", value <= bound}}}};
  doc.csv = "prover,accept_exact,accept_float,bound_exact,within_bound\n" + cfg.prover + "," + to_string(value) +
            "," + Json(to_double(value)).dump() + "," + to_string(bound) + "," + (value <= bound ? "true" : "false") +
            "\n";
  return doc;
}

/// Support of R matrices whose every row has an accepting lookahead answer.
inline SparseProverSpec biased_valid_spec(const Instance& inst, const RegisterLayout& L) {
  auto look = lookahead_full_spec(inst, L);
  std::vector<SparseProverSpec::Weighted> support;
  const std::uint64_t total = checked_branch_count(L, inst.limits());
  for (std::uint64_t code = 0; code < total; ++code) {
    RMatrix R = decode_r_matrix(L, code);
    const FMatrix F = look.phi(R);
    bool ok = true;
    for (std::size_t i = 1; i <= L.m() && ok; ++i) {
      const RMatrix row = r_row(L, R, i);
      const std::vector<UniPoly> msgs(F.begin() + static_cast<std::ptrdiff_t>(L.cell(i, 1)),
                                      F.begin() + static_cast<std::ptrdiff_t>(L.cell(i, 1) + L.N()));
      ok = predicate_E(inst, row, msgs);
    }
    if (ok) support.push_back({std::move(R), Rational(1), 0});
  }
  if (support.empty()) return look;  // nothing valid: fall back to the full superposition
  return biased_spec("biased:valid", std::move(support), look.phi);
}

inline SparseProverSpec quantum_prover(const std::string& name, const Instance& inst, const RegisterLayout& L) {
  if (name == "honest") return honest_spec(inst, L);
  if (name == "lookahead:full") return lookahead_full_spec(inst, L);
  if (name == "biased:valid") return biased_valid_spec(inst, L);
  throw UsageError("unknown quantum prover '" + name + "' (honest, lookahead:full, biased:valid)");
}

inline ReportDoc cmd_quantum_run(const RunConfig& cfg) {
  const Instance inst(load_formula(cfg), FieldCtx(cfg.k));
  if (cfg.m == 0) throw UsageError("--m must be positive");
  const auto start = std::chrono::steady_clock::now();
  const RegisterLayout L = build_layout(inst, cfg.m);
  const SparseProverSpec spec = quantum_prover(cfg.prover, inst, L);
  UMode mode;
  if (cfg.u_mode == "sample") mode = UMode::sample(cfg.samples, cfg.seed);
  else if (cfg.u_mode != "exhaustive") throw UsageError("--u must be exhaustive or sample");
  const QuantumRunReport rep = run_quantum(inst, cfg.m, spec, mode, cfg.events);

  ReportDoc doc;
  doc.json = Json{{"command", "quantum run"},
                  {"version", kVersion},
                  {"config", Json{{"formula", print_qbf(inst.formula())},
                                  {"k", cfg.k},
                                  {"m", cfg.m},
                                  {"prover", cfg.prover},
                                  {"u", cfg.u_mode},
                                  {"seed", cfg.seed}}},
                  {"field", field_json(inst.field())},
                  {"formula_true", eval_qbf(inst.formula())}};
  const Json body = quantum_report_json(rep);
  for (const auto& [key, value] : body.items()) doc.json[key] = value;
  if (cfg.dense_check) {
    double worst = 0;
    for (const auto& pu : rep.per_u)
      worst = std::max(worst, std::abs(dense_oracle(inst, cfg.m, spec, pu.u) - to_double(pu.accept)));
    doc.json["dense_check"] = Json{{"qubits", dense_qubit_count(L, spec)},
                                   {"max_abs_diff", worst},
                                   {"tolerance", 1e-9},
                                   {"agree", worst <= 1e-9}};
  }
  if (cfg.timing)
    doc.json["timing_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  doc.csv = "u,step1_pass,accept,accept_float\n";
  for (const auto& pu : rep.per_u) {
    std::string u;
    for (std::size_t i = 0; i < pu.u.size(); ++i) u += (i ? " " : "") + std::to_string(pu.u[i]);
    doc.csv += u + "," + to_string(pu.step1_pass) + "," + to_string(pu.accept) + "," +
               Json(to_double(pu.accept)).dump() + "\n";
  }
  return doc;
}

inline ReportDoc cmd_bound(const RunConfig& cfg) {
  BoundParams p;
  if (cfg.N) p.N = *cfg.N;
  else if (cfg.n) p.N = round_count(static_cast<unsigned>(*cfg.n));
  else throw UsageError("bound needs --n or --N");
  if (cfg.n) p.n = *cfg.n;
  p.d = cfg.d.value_or(3);
  if (cfg.bm.has_value() != cfg.bk.has_value()) throw UsageError("give both --m and --k, or neither");
  if (cfg.bm) {
    p.m = *cfg.bm;
    p.k = *cfg.bk;
  } else if (cfg.xlen) {
    const ChosenParams c = choose_params(*cfg.xlen, p.d, p.N);
    p.m = c.m;
    p.k = c.k;
  } else {
    throw UsageError("bound needs --xlen or both --m and --k");
  }
  const BigFloat b = soundness_bound(p);
  ReportDoc doc;
  doc.json = Json{{"command", "bound"}, {"version", kVersion}, {"params", bound_params_json(p)},
                  {"bound", to_string(b)}, {"bound_float", b.convert_to<double>()}, {"vacuous", is_vacuous(b)}};
  std::string target = "", satisfied = "";
  if (cfg.xlen) {
    const BigFloat t = boost::multiprecision::pow(BigFloat(2), -BigFloat(*cfg.xlen));
    doc.json["xlen"] = *cfg.xlen;
    doc.json["target"] = to_string(t);
    doc.json["satisfied"] = b < t;
    target = to_string(t);
    satisfied = b < t ? "true" : "false";
  } else {
    doc.json["target"] = nullptr;
    doc.json["satisfied"] = nullptr;
  }
  doc.csv = "n,d,N,m,k,bound,vacuous,target,satisfied\n" + std::to_string(p.n) + "," + std::to_string(p.d) + "," +
            std::to_string(p.N) + "," + std::to_string(p.m) + "," + std::to_string(p.k) + "," + to_string(b) + "," +
            (is_vacuous(b) ? "true" : "false") + "," + target + "," + satisfied + "\n";
  return doc;
}

inline constexpr unsigned kMaxTableBits = 10;

inline ReportDoc cmd_field_table(const RunConfig& cfg) {
  const FieldCtx f = field_new(cfg.k);
  if (cfg.k > kMaxTableBits)
    throw SizeLimitError("multiplication table of GF(2^" + std::to_string(cfg.k) + ")");
  ReportDoc doc;
  doc.default_format = "csv";
  const std::string g = FieldCtx::poly_string(f.modulus());
  doc.csv = "# GF(2^" + std::to_string(cfg.k) + ") modulus " + g + " (" + to_hex(f.modulus()) + ")\n*";
  for (std::uint64_t b = 0; b < f.size(); ++b) doc.csv += "," + to_hex(b);
  doc.csv += "\n";
  Json rows = Json::array();
  for (std::uint64_t a = 0; a < f.size(); ++a) {
    doc.csv += to_hex(a);
    Json row = Json::array();
    for (std::uint64_t b = 0; b < f.size(); ++b) {
      const std::uint64_t c = f.mul(FieldElem{a}, FieldElem{b}).bits;
      doc.csv += "," + to_hex(c);
      row.push_back(c);
    }
    doc.csv += "\n";
    rows.push_back(std::move(row));
  }
  doc.json = Json{{"command", "field table"}, {"version", kVersion}, {"k", cfg.k}, {"modulus", g},
                  {"modulus_hex", to_hex(f.modulus())}, {"mul", std::move(rows)}};
  return doc;
}

inline ReportDoc run_command(const RunConfig& cfg) {
  if (cfg.command == "classical run") return cmd_classical_run(cfg);
  if (cfg.command == "classical exhaustive") return cmd_classical_exhaustive(cfg);
  if (cfg.command == "quantum run") return cmd_quantum_run(cfg);
  if (cfg.command == "bound") return cmd_bound(cfg);
  if (cfg.command == "field table") return cmd_field_table(cfg);
  throw UsageError("unknown command '" + cfg.command + "'");
}

}  // namespace qip::cli
