// Walks a cheating entangled prover through the parallel-repetition
// verifier on a false formula and prints where it gets caught.

#include "qip/bounds.hpp"
#include "qip/dense_oracle.hpp"
#include "qip/quantum.hpp"

#include <cstdio>
#include <string>

using namespace qip;

int main(int argc, char** argv) {
  const std::string text = argc > 1 ? argv[1] : "A x1 : x1";
  const unsigned k = argc > 2 ? static_cast<unsigned>(std::stoul(argv[2])) : 2;
  const std::size_t m = argc > 3 ? std::stoul(argv[3]) : 1;

  const Instance inst(parse_qbf(text), FieldCtx(k));
  const RegisterLayout L = build_layout(inst, m);
  std::printf("formula   %s (%s)\n", print_qbf(inst.formula()).c_str(), eval_qbf(inst.formula()) ? "true" : "false");
  std::printf("field     GF(2^%u) mod %s\n", k, FieldCtx::poly_string(inst.field().modulus()).c_str());
  std::printf("rounds    N=%zu  d=%u  m=%zu  register qubits=%zu\n\n", inst.rounds(), inst.d(), m,
              L.register_qubits());

  if (k * inst.rounds() <= 20) {
    const Rational classical = optimal_cheater(inst).max_accept_probability;
    std::printf("best classical cheater      %s (%.6f)\n", to_string(classical).c_str(), to_double(classical));
  }

  for (const auto& spec : {honest_spec(inst, L), lookahead_full_spec(inst, L)}) {
    const QuantumRunReport rep = run_quantum(inst, m, spec, UMode::all(), true);
    std::printf("\nprover %s\n", spec.name.c_str());
    for (const auto& pu : rep.per_u) {
      std::string u;
      for (auto x : pu.u) u += std::to_string(x) + " ";
      const bool dense_ok = dense_qubit_count(L, spec) <= inst.limits().max_dense_qubits;
      std::printf("  u = %-8s step1 %-8s accept %-10s", u.c_str(), to_string(pu.step1_pass).c_str(),
                  to_string(pu.accept).c_str());
      if (dense_ok) std::printf(" dense %.12f", dense_oracle(inst, m, spec, pu.u));
      std::printf("\n");
    }
    std::printf("  mean acceptance %s (%.6f)\n", to_string(rep.mean_accept).c_str(), to_double(rep.mean_accept));
    std::printf("  B_U probability %s\n", to_string(*rep.events_b_mean).c_str());
    std::printf("  soundness bound %s%s\n", to_string(rep.bound).c_str(), is_vacuous(rep.bound) ? " (vacuous)" : "");
  }
  return 0;
}
