#pragma once

// Full state-vector simulation of the 2-round protocol for cross-checking
// the sparse backend. The prover's preparation, the verifier's projections
// and the round-2 maps are applied as explicit gates on 2^q amplitudes.

#include "qip/quantum.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <vector>

namespace qip {

using Amplitudes = std::vector<std::complex<double>>;

/// H on one qubit: |0> -> (|0>+|1>)/sqrt2, |1> -> (|0>-|1>)/sqrt2.
inline void apply_hadamard(Amplitudes& psi, std::size_t qubit) {
  const std::size_t bit = std::size_t{1} << qubit;
  const double h = 1 / std::sqrt(2.0);
  for (std::size_t x = 0; x < psi.size(); ++x) {
    if (x & bit) continue;
    const auto a = psi[x], b = psi[x | bit];
    psi[x] = h * (a + b);
    psi[x | bit] = h * (a - b);
  }
}

/// Applies x -> perm(x) to every basis state with nonzero amplitude.
template <class Perm>
void apply_permutation(Amplitudes& psi, Perm&& perm) {
  Amplitudes out(psi.size());
  for (std::size_t x = 0; x < psi.size(); ++x) {
    if (psi[x] == 0.0) continue;
    const std::size_t y = perm(x);
    if (out[y] != 0.0) throw std::logic_error("dense oracle: map is not injective");
    out[y] = psi[x];
  }
  psi = std::move(out);
}

namespace detail {

class DenseCodec {
 public:
  DenseCodec(const RegisterLayout& L, unsigned ancilla_bits) : L_(L), ancilla_bits_(ancilla_bits) {}

  std::size_t qubits() const { return L_.register_qubits() + ancilla_bits_; }

  std::uint64_t field_at(std::size_t x, std::size_t offset) const {
    return (x >> offset) & ((std::uint64_t{1} << L_.k()) - 1);
  }
  static std::size_t with_field(std::size_t x, std::size_t offset, std::uint64_t v, unsigned k) {
    const std::size_t mask = ((std::size_t{1} << k) - 1) << offset;
    return (x & ~mask) | (static_cast<std::size_t>(v) << offset);
  }

  BasisState decode(std::size_t x) const {
    BasisState b;
    b.R.resize(L_.cells());
    b.S.resize(L_.cells());
    b.F.resize(L_.cells() * L_.poly_width());
    for (std::size_t i = 1; i <= L_.m(); ++i)
      for (std::size_t j = 1; j <= L_.N(); ++j) {
        const std::size_t c = L_.cell(i, j);
        b.R[c] = FieldElem{field_at(x, L_.r_qubit(i, j))};
        b.S[c] = FieldElem{field_at(x, L_.s_qubit(i, j))};
        for (std::size_t t = 0; t < L_.poly_width(); ++t)
          b.F[c * L_.poly_width() + t] = FieldElem{field_at(x, L_.f_qubit(i, j, t))};
      }
    b.ancilla = ancilla_bits_ ? (x >> L_.ancilla_qubit()) & ((std::uint64_t{1} << ancilla_bits_) - 1) : 0;
    return b;
  }

  std::size_t encode(const BasisState& b) const {
    std::size_t x = 0;
    for (std::size_t i = 1; i <= L_.m(); ++i)
      for (std::size_t j = 1; j <= L_.N(); ++j) {
        const std::size_t c = L_.cell(i, j);
        x = with_field(x, L_.r_qubit(i, j), b.R[c].bits, L_.k());
        x = with_field(x, L_.s_qubit(i, j), b.S[c].bits, L_.k());
        for (std::size_t t = 0; t < L_.poly_width(); ++t)
          x = with_field(x, L_.f_qubit(i, j, t), b.F[c * L_.poly_width() + t].bits, L_.k());
      }
    return x | (static_cast<std::size_t>(b.ancilla) << L_.ancilla_qubit());
  }

 private:
  const RegisterLayout& L_;
  unsigned ancilla_bits_;
};

}  // namespace detail

inline unsigned ancilla_bits(const SparseProverSpec& spec) {
  std::uint64_t top = 0;
  for (const auto& w : spec.support) top = std::max(top, w.ancilla);
  return static_cast<unsigned>(std::bit_width(top));
}

inline std::size_t dense_qubit_count(const RegisterLayout& L, const SparseProverSpec& spec) {
  return L.register_qubits() + ancilla_bits(spec);
}

/// Acceptance probability of the whole protocol for one fixed u.
inline double dense_oracle(const Instance& inst, std::size_t m, const SparseProverSpec& spec, const UVector& u) {
  const RegisterLayout L = build_layout(inst, m);
  L.check_u(u);
  const detail::DenseCodec codec(L, ancilla_bits(spec));
  const std::size_t q = codec.qubits();
  if (q > inst.limits().max_dense_qubits)
    throw SizeLimitError("dense oracle needs " + std::to_string(q) + " qubits");
  if (!spec.phi) throw std::invalid_argument("prover spec: missing F map");
  Amplitudes psi(std::size_t{1} << q);

  // round 1: prover prepares R (and ancilla), then F ^= Phi(R), S ^= R
  if (spec.kind == SparseProverSpec::Kind::BiasedSupport) {
    double total = 0;
    for (const auto& w : spec.support) total += to_double(w.coeff * w.coeff);
    for (const auto& w : spec.support) {
      BasisState b{w.R, std::vector<FieldElem>(L.cells() * L.poly_width()), RMatrix(L.cells()), w.ancilla};
      psi[codec.encode(b)] += to_double(w.coeff) / std::sqrt(total);
    }
  } else {
    psi[0] = 1;
    for (std::size_t i = 1; i <= m; ++i)
      for (std::size_t j = 1; j <= L.N(); ++j)
        for (unsigned t = 0; t < L.k(); ++t) apply_hadamard(psi, L.r_qubit(i, j) + t);
  }
  apply_permutation(psi, [&](std::size_t x) {
    BasisState b = codec.decode(x);
    const auto add = encode_f(L, spec.phi(b.R));
    for (std::size_t t = 0; t < add.size(); ++t) b.F[t] = FieldElem{b.F[t].bits ^ add[t].bits};
    for (std::size_t c = 0; c < L.cells(); ++c) b.S[c] = FieldElem{b.S[c].bits ^ b.R[c].bits};
    return codec.encode(b);
  });

  // step 1: project onto valid (R_i, F_i) for every i
  for (std::size_t x = 0; x < psi.size(); ++x)
    if (psi[x] != 0.0 && !rows_valid(inst, L, codec.decode(x))) psi[x] = 0;

  // round 2: Fbar ^= Phi(S) by the prover, then S ^= R by the verifier
  apply_permutation(psi, [&](std::size_t x) {
    BasisState b = codec.decode(x);
    const auto add = encode_f(L, spec.phi(b.S));
    for (std::size_t i = 1; i <= m; ++i)
      for (std::size_t j = u[i - 1] + 1; j <= L.N(); ++j)
        for (std::size_t t = 0; t < L.poly_width(); ++t) {
          const std::size_t at = L.cell(i, j) * L.poly_width() + t;
          b.F[at] = FieldElem{b.F[at].bits ^ add[at].bits};
        }
    return codec.encode(b);
  });
  apply_permutation(psi, [&](std::size_t x) {
    BasisState b = codec.decode(x);
    for (std::size_t c = 0; c < L.cells(); ++c) b.S[c] = FieldElem{b.S[c].bits ^ b.R[c].bits};
    return codec.encode(b);
  });

  // step 4: H on every Rbar register, accept on all zeros there
  std::size_t rbar_mask = 0;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = u[i - 1]; j <= L.N(); ++j)
      for (unsigned t = 0; t < L.k(); ++t) {
        apply_hadamard(psi, L.r_qubit(i, j) + t);
        rbar_mask |= std::size_t{1} << (L.r_qubit(i, j) + t);
      }
  double p = 0;
  for (std::size_t x = 0; x < psi.size(); ++x)
    if ((x & rbar_mask) == 0) p += std::norm(psi[x]);
  return p;
}

}  // namespace qip
