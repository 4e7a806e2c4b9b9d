#pragma once

// Exact sparse simulation of the 2-round quantum protocol.
//
// Registers: for copy i in 1..m and round j in 1..N, R_{i,j} and S_{i,j}
// hold one field element and F_{i,j} holds d+1 coefficient blocks, lowest
// degree first. A challenge u in {1..N}^m splits them: R^{(u)} is row i's
// columns 1..u_i-1, F^{(u)} row i's columns 1..u_i, and Rbar/Fbar the rest.
//
// A state is a finite set of computational-basis branches. Every amplitude
// is coeff * sqrt(scale2) with a rational coeff per branch and one rational
// scale2 per state, so the uniform 2^{-kmN/2} amplitude stays exact when
// kmN is odd and every probability is a rational.

#include "qip/bounds.hpp"
#include "qip/limits.hpp"
#include "qip/rational.hpp"
#include "qip/sumcheck.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qip {

using RMatrix = std::vector<FieldElem>;  // m x N, row-major
using FMatrix = std::vector<UniPoly>;    // m x N, row-major
using UVector = std::vector<unsigned>;   // u_i in 1..N

class RegisterLayout {
 public:
  RegisterLayout(std::size_t m, std::size_t N, unsigned k, unsigned d) : m_(m), N_(N), k_(k), d_(d) {
    if (m == 0 || N == 0 || k == 0 || k > 64) throw std::invalid_argument("layout: m, N and k must be positive");
  }

  std::size_t m() const { return m_; }
  std::size_t N() const { return N_; }
  unsigned k() const { return k_; }
  unsigned d() const { return d_; }
  std::size_t cells() const { return m_ * N_; }
  std::size_t poly_width() const { return d_ + 1; }

  /// Row-major index of register (i, j), both 1-based.
  std::size_t cell(std::size_t i, std::size_t j) const {
    if (i < 1 || i > m_ || j < 1 || j > N_) throw std::out_of_range("layout: register index out of range");
    return (i - 1) * N_ + (j - 1);
  }

  void check_u(const UVector& u) const {
    if (u.size() != m_) throw std::invalid_argument("layout: u needs one entry per copy");
    for (unsigned x : u)
      if (x < 1 || x > N_) throw std::invalid_argument("layout: u entries must lie in 1..N");
  }
  bool in_R_u(const UVector& u, std::size_t i, std::size_t j) const { return j < u.at(i - 1); }
  bool in_F_u(const UVector& u, std::size_t i, std::size_t j) const { return j <= u.at(i - 1); }

  std::vector<std::size_t> r_u_row_sizes(const UVector& u) const {
    check_u(u);
    std::vector<std::size_t> out;
    for (unsigned x : u) out.push_back(x - 1);
    return out;
  }
  std::vector<std::size_t> f_u_row_sizes(const UVector& u) const {
    check_u(u);
    return std::vector<std::size_t>(u.begin(), u.end());
  }

  /// Number of Rbar^{(u)} registers, sum of N - u_i + 1.
  std::size_t l(const UVector& u) const {
    check_u(u);
    std::size_t total = 0;
    for (unsigned x : u) total += N_ - x + 1;
    return total;
  }

  // qubit offsets of the dense encoding: R, then F, then S, then ancilla
  std::size_t r_qubit(std::size_t i, std::size_t j) const { return cell(i, j) * k_; }
  std::size_t f_qubit(std::size_t i, std::size_t j, std::size_t c) const {
    return cells() * k_ + (cell(i, j) * poly_width() + c) * k_;
  }
  std::size_t s_qubit(std::size_t i, std::size_t j) const {
    return cells() * k_ * (1 + poly_width()) + cell(i, j) * k_;
  }
  std::size_t ancilla_qubit() const { return cells() * k_ * (2 + poly_width()); }
  std::size_t register_qubits() const { return ancilla_qubit(); }

 private:
  std::size_t m_, N_;
  unsigned k_, d_;
};

inline RegisterLayout build_layout(const Instance& inst, std::size_t m) {
  RegisterLayout layout(m, inst.rounds(), inst.field().k(), inst.d());
  if (layout.register_qubits() > inst.limits().max_layout_qubits)
    throw SizeLimitError("register layout of " + std::to_string(layout.register_qubits()) + " qubits");
  return layout;
}

struct BasisState {
  RMatrix R;
  std::vector<FieldElem> F;  // cell-major, d+1 coefficients per cell
  RMatrix S;
  std::uint64_t ancilla = 0;

  friend auto operator<=>(const BasisState&, const BasisState&) = default;
  friend bool operator==(const BasisState&, const BasisState&) = default;
};

inline UniPoly f_entry(const RegisterLayout& L, const BasisState& b, std::size_t i, std::size_t j) {
  const auto first = b.F.begin() + static_cast<std::ptrdiff_t>(L.cell(i, j) * L.poly_width());
  return UniPoly(std::vector<FieldElem>(first, first + static_cast<std::ptrdiff_t>(L.poly_width())));
}

inline std::vector<UniPoly> f_row(const RegisterLayout& L, const BasisState& b, std::size_t i) {
  std::vector<UniPoly> row;
  for (std::size_t j = 1; j <= L.N(); ++j) row.push_back(f_entry(L, b, i, j));
  return row;
}

inline RMatrix r_row(const RegisterLayout& L, const RMatrix& R, std::size_t i) {
  const auto first = R.begin() + static_cast<std::ptrdiff_t>(L.cell(i, 1));
  return RMatrix(first, first + static_cast<std::ptrdiff_t>(L.N()));
}

/// Flattens an F matrix into register contents; throws on degree > d.
inline std::vector<FieldElem> encode_f(const RegisterLayout& L, const FMatrix& F) {
  if (F.size() != L.cells()) throw std::invalid_argument("F matrix must have m*N entries");
  std::vector<FieldElem> out;
  out.reserve(L.cells() * L.poly_width());
  for (const auto& p : F) {
    const UniPoly w = p.padded(L.poly_width());
    out.insert(out.end(), w.coeffs.begin(), w.coeffs.end());
  }
  return out;
}

class SparseState {
 public:
  SparseState() = default;
  explicit SparseState(Rational scale2) : scale2_(std::move(scale2)) {}

  const Rational& scale2() const { return scale2_; }
  const std::map<BasisState, Rational>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }
  bool empty() const { return branches_.empty(); }

  /// Adds a branch; keys must be distinct and coefficients nonzero.
  void insert(BasisState b, Rational coeff) {
    if (coeff == 0) throw std::invalid_argument("sparse state: zero amplitude");
    if (!branches_.emplace(std::move(b), std::move(coeff)).second)
      throw std::invalid_argument("sparse state: duplicate basis state");
  }

  /// Probability mass of branches selected by pred.
  template <class Pred>
  Rational mass(Pred&& pred) const {
    Rational acc = 0;
    for (const auto& [b, c] : branches_)
      if (pred(b)) acc += c * c;
    return acc * scale2_;
  }
  Rational norm2() const {
    return mass([](const BasisState&) { return true; });
  }

 private:
  Rational scale2_ = 1;
  std::map<BasisState, Rational> branches_;
};

/// Prover families that act as classical reversible maps on the basis.
/// All keep S = R in round 1 and answer round 2 with Fbar ^= Phi(S).
struct SparseProverSpec {
  enum class Kind { Honest, Lookahead, BiasedSupport };

  struct Weighted {
    RMatrix R;
    Rational coeff;  // relative amplitude
    std::uint64_t ancilla = 0;
  };

  Kind kind = Kind::Honest;
  std::string name = "honest";
  std::function<FMatrix(const RMatrix&)> phi;  // F contents as a function of R
  std::vector<Weighted> support;               // BiasedSupport only
};

namespace detail {

/// Row-wise Phi with a per-row memo; not safe to call concurrently.
inline std::function<FMatrix(const RMatrix&)> row_wise(std::size_t m, std::size_t N,
                                                       std::function<std::vector<UniPoly>(const RMatrix&)> row_fn) {
  auto memo = std::make_shared<std::map<RMatrix, std::vector<UniPoly>>>();
  return [=](const RMatrix& R) {
    if (R.size() != m * N) throw std::invalid_argument("phi: R matrix must have m*N entries");
    FMatrix out;
    for (std::size_t i = 0; i < m; ++i) {
      RMatrix row(R.begin() + static_cast<std::ptrdiff_t>(i * N), R.begin() + static_cast<std::ptrdiff_t>((i + 1) * N));
      auto it = memo->find(row);
      if (it == memo->end()) it = memo->emplace(row, row_fn(row)).first;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  };
}

inline std::vector<UniPoly> correct_row(const Instance& inst, const RMatrix& row) {
  std::vector<UniPoly> c;
  for (std::size_t j = 1; j <= inst.rounds(); ++j)
    c.push_back(correct_polynomial(inst, j, std::span<const FieldElem>(row).first(j - 1)));
  return c;
}

/// First accepting message row for the whole challenge row, by depth-first
/// search in coefficient order; nullopt if none exists.
inline std::optional<std::vector<UniPoly>> first_valid_row(const Instance& inst, const RMatrix& row) {
  std::vector<UniPoly> msgs;
  const FieldCtx& f = inst.field();
  auto dfs = [&](auto&& self, const Verifier& v) -> bool {
    const std::size_t j = v.round();
    if (j > inst.rounds()) {
      Verifier last = v;
      return last.finish();
    }
    const Operator& op = inst.schedule().op(j);
    return find_consistent_poly(f, op.kind, v.assignment()[op.var - 1], v.claim(), inst.schedule().degree_bound(j),
                                [&](const UniPoly& p) {
                                  Verifier next = v;
                                  next.receive(p);
                                  next.challenge(row[j - 1]);
                                  msgs.push_back(p);
                                  if (self(self, next)) return true;
                                  msgs.pop_back();
                                  return false;
                                });
  };
  if (dfs(dfs, Verifier(inst))) return msgs;
  return std::nullopt;
}

}  // namespace detail

/// F = C(R): the honest prover's correct polynomials.
inline SparseProverSpec honest_spec(const Instance& inst, const RegisterLayout& L) {
  SparseProverSpec s;
  s.kind = SparseProverSpec::Kind::Honest;
  s.name = "honest";
  s.phi = detail::row_wise(L.m(), L.N(), [&inst](const RMatrix& row) { return detail::correct_row(inst, row); });
  return s;
}

inline SparseProverSpec lookahead_spec(std::string name, std::function<FMatrix(const RMatrix&)> phi) {
  SparseProverSpec s;
  s.kind = SparseProverSpec::Kind::Lookahead;
  s.name = std::move(name);
  s.phi = std::move(phi);
  return s;
}

/// Per row, the first message sequence E accepts given every challenge of
/// the row in advance; rows with no such sequence get C(R).
inline SparseProverSpec lookahead_full_spec(const Instance& inst, const RegisterLayout& L) {
  return lookahead_spec("lookahead:full", detail::row_wise(L.m(), L.N(), [&inst](const RMatrix& row) {
                          if (auto found = detail::first_valid_row(inst, row)) return *found;
                          return detail::correct_row(inst, row);
                        }));
}

inline SparseProverSpec biased_spec(std::string name, std::vector<SparseProverSpec::Weighted> support,
                                    std::function<FMatrix(const RMatrix&)> phi) {
  SparseProverSpec s;
  s.kind = SparseProverSpec::Kind::BiasedSupport;
  s.name = std::move(name);
  s.support = std::move(support);
  s.phi = std::move(phi);
  return s;
}

inline std::uint64_t checked_branch_count(const RegisterLayout& L, const Limits& limits) {
  const std::size_t bits = L.cells() * L.k();
  if (bits >= 63 || (std::uint64_t{1} << bits) > limits.max_branches)
    throw SizeLimitError("uniform superposition over 2^" + std::to_string(bits) + " challenge matrices");
  return std::uint64_t{1} << bits;
}

inline RMatrix decode_r_matrix(const RegisterLayout& L, std::uint64_t code) {
  RMatrix R(L.cells());
  const std::uint64_t mask = L.k() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << L.k()) - 1;
  for (std::size_t c = 0; c < R.size(); ++c) R[c] = FieldElem{(code >> (c * L.k())) & mask};
  return R;
}

/// Round-1 superposition sum_R alpha(R) |R>|Phi(R)>|S = R>.
inline SparseState prepare_round1(const SparseProverSpec& spec, const RegisterLayout& L, const Limits& limits = {}) {
  if (!spec.phi) throw std::invalid_argument("prover spec: missing F map");
  auto branch = [&](const RMatrix& R, std::uint64_t ancilla) {
    return BasisState{R, encode_f(L, spec.phi(R)), R, ancilla};
  };
  if (spec.kind != SparseProverSpec::Kind::BiasedSupport) {
    const std::uint64_t total = checked_branch_count(L, limits);
    SparseState s(Rational(BigInt(1), BigInt(total)));
    for (std::uint64_t code = 0; code < total; ++code) s.insert(branch(decode_r_matrix(L, code), 0), Rational(1));
    return s;
  }
  if (spec.support.empty()) throw std::invalid_argument("prover spec: empty support");
  if (spec.support.size() > limits.max_branches) throw SizeLimitError("support exceeds branch budget");
  Rational total = 0;
  for (const auto& w : spec.support) {
    if (w.coeff == 0) throw std::invalid_argument("prover spec: zero amplitude in support");
    total += w.coeff * w.coeff;
  }
  SparseState s(1 / total);
  for (const auto& w : spec.support) {
    if (w.R.size() != L.cells()) throw std::invalid_argument("prover spec: R matrix must have m*N entries");
    s.insert(branch(w.R, w.ancilla), w.coeff);  // duplicates are not isometric
  }
  return s;
}

struct Step1Result {
  Rational pass_probability;
  SparseState state;
};

inline bool rows_valid(const Instance& inst, const RegisterLayout& L, const BasisState& b) {
  for (std::size_t i = 1; i <= L.m(); ++i) {
    const RMatrix r = r_row(L, b.R, i);
    const auto f = f_row(L, b, i);
    if (!predicate_E(inst, r, f)) return false;
  }
  return true;
}

/// Projects onto branches where every row (R_i, F_i) is an accepted
/// transcript. The result is not renormalized.
inline Step1Result step1_filter(const SparseState& state, const Instance& inst, const RegisterLayout& L) {
  Step1Result out{0, SparseState(state.scale2())};
  for (const auto& [b, c] : state.branches())
    if (rows_valid(inst, L, b)) out.state.insert(b, c);
  out.pass_probability = out.state.norm2();
  return out;
}

/// Prover XORs Phi(S) into each Fbar^{(u)} register and returns S; the
/// verifier subtracts R from S. A permutation of the basis.
inline BasisState round2_map(const BasisState& b, const UVector& u, const SparseProverSpec& spec,
                             const RegisterLayout& L) {
  BasisState out = b;
  const std::vector<FieldElem> recomputed = encode_f(L, spec.phi(b.S));
  for (std::size_t i = 1; i <= L.m(); ++i)
    for (std::size_t j = 1; j <= L.N(); ++j) {
      if (L.in_F_u(u, i, j)) continue;
      for (std::size_t c = 0; c < L.poly_width(); ++c) {
        const std::size_t at = L.cell(i, j) * L.poly_width() + c;
        out.F[at] = FieldElem{out.F[at].bits ^ recomputed[at].bits};
      }
    }
  for (std::size_t c = 0; c < L.cells(); ++c) out.S[c] = FieldElem{out.S[c].bits ^ out.R[c].bits};
  return out;
}

inline SparseState apply_round2_and_cancel(const SparseState& state, const UVector& u, const SparseProverSpec& spec,
                                           const RegisterLayout& L) {
  L.check_u(u);
  SparseState out(state.scale2());
  for (const auto& [b, c] : state.branches()) out.insert(round2_map(b, u, spec, L), c);
  return out;
}

/// Probability that H^{(x)k} on every Rbar^{(u)} register yields all
/// zeros: 2^{-lk} times the sum over the remaining registers of the
/// squared summed amplitude.
inline Rational step4_accept_prob(const SparseState& state, const UVector& u, const RegisterLayout& L) {
  L.check_u(u);
  std::map<BasisState, Rational> groups;
  for (const auto& [b, c] : state.branches()) {
    BasisState key = b;
    for (std::size_t i = 1; i <= L.m(); ++i)
      for (std::size_t j = u[i - 1]; j <= L.N(); ++j) key.R[L.cell(i, j)] = FieldElem{0};
    groups[std::move(key)] += c;
  }
  Rational acc = 0;
  for (const auto& [key, sum] : groups) acc += sum * sum;
  return acc * state.scale2() * pow2(-static_cast<long>(L.l(u) * L.k()));
}

struct EventQuery {
  enum class Kind { A, B, D };
  Kind kind = Kind::A;
  std::size_t i = 1, j = 1;  // A only
  UVector v;                 // B and D only

  static EventQuery A(std::size_t i, std::size_t j) { return {Kind::A, i, j, {}}; }
  static EventQuery B(UVector v) { return {Kind::B, 0, 0, std::move(v)}; }
  static EventQuery D(UVector v) { return {Kind::D, 0, 0, std::move(v)}; }
};

namespace detail {

/// Smallest j such that row i's F disagrees with C(R) in columns 1..j and
/// agrees in column j+1 (N if it disagrees everywhere); 0 when column 1 is
/// already correct, where no A_{i,j} holds.
inline std::size_t a_index(const Instance& inst, const RegisterLayout& L, const BasisState& b, std::size_t i) {
  const auto c = correct_row(inst, r_row(L, b.R, i));
  std::size_t j = 0;
  while (j < L.N() && !(f_entry(L, b, i, j + 1) == c[j])) ++j;
  return j;
}

}  // namespace detail

inline bool event_holds(const Instance& inst, const RegisterLayout& L, const BasisState& b, const EventQuery& ev) {
  switch (ev.kind) {
    case EventQuery::Kind::A:
      if (ev.j < 1 || ev.j > L.N()) throw std::invalid_argument("event: j must lie in 1..N");
      return detail::a_index(inst, L, b, ev.i) == ev.j;
    case EventQuery::Kind::B:
    case EventQuery::Kind::D: {
      L.check_u(ev.v);
      const bool any = ev.kind == EventQuery::Kind::B;
      for (std::size_t i = 1; i <= L.m(); ++i)
        if ((detail::a_index(inst, L, b, i) == ev.v[i - 1]) == any) return any;
      return !any;
    }
  }
  return false;
}

/// Probability of ev in state, conditioned on the state itself (0 for an
/// empty state).
inline Rational event_probability(const SparseState& state, const EventQuery& ev, const Instance& inst,
                                  const RegisterLayout& L) {
  const Rational total = state.norm2();
  if (total == 0) return 0;
  return state.mass([&](const BasisState& b) { return event_holds(inst, L, b, ev); }) / total;
}

struct SupportCount {
  std::size_t max_support = 0;  // over (R^{(u)}, F^{(u)}) groups, branches in B_u
  BigInt bound;                 // d m 2^{k(l-1)}
};

/// Largest number of distinct Rbar^{(u)} values compatible with B_u inside
/// any group with fixed R^{(u)}, F^{(u)} and prover workspace.
inline SupportCount support_count(const SparseState& state, const UVector& u, const Instance& inst,
                                  const RegisterLayout& L) {
  L.check_u(u);
  std::map<BasisState, std::set<RMatrix>> groups;
  const EventQuery bu = EventQuery::B(u);
  for (const auto& [b, c] : state.branches()) {
    if (!event_holds(inst, L, b, bu)) continue;
    BasisState key = b;
    RMatrix rbar;
    for (std::size_t i = 1; i <= L.m(); ++i)
      for (std::size_t j = 1; j <= L.N(); ++j) {
        const std::size_t at = L.cell(i, j);
        if (!L.in_R_u(u, i, j)) {
          rbar.push_back(b.R[at]);
          key.R[at] = FieldElem{0};
        }
        if (!L.in_F_u(u, i, j))
          for (std::size_t cf = 0; cf < L.poly_width(); ++cf) key.F[at * L.poly_width() + cf] = FieldElem{0};
      }
    groups[std::move(key)].insert(std::move(rbar));
  }
  SupportCount out;
  for (const auto& [key, vals] : groups) out.max_support = std::max(out.max_support, vals.size());
  out.bound = BigInt(L.d()) * L.m();
  out.bound <<= static_cast<unsigned>(L.k() * (L.l(u) - 1));
  return out;
}

struct UMode {
  bool exhaustive = true;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  static UMode all() { return {}; }
  static UMode sample(std::size_t count, std::uint64_t seed) { return {false, count, seed}; }
};

struct PerU {
  UVector u;
  Rational step1_pass;
  Rational accept;  // absolute: includes the step-1 pass probability
};

struct QuantumRunReport {
  unsigned n = 0;
  std::size_t N = 0;
  unsigned k = 0;
  std::size_t m = 0;
  unsigned d = 0;
  std::string prover;
  bool exhaustive = true;
  std::uint64_t seed = 0;
  std::vector<PerU> per_u;
  Rational mean_accept;
  BigFloat bound;
  bool vacuous = false;
  // Pr[A_{i,j}] after step 1 and the mean of Pr[B_u] over the evaluated u
  std::optional<std::vector<std::vector<Rational>>> events_a;
  std::optional<Rational> events_b_mean;
};

/// Challenges in lexicographic order, u_1 most significant.
inline std::vector<UVector> all_u(const RegisterLayout& L, const Limits& limits = {}) {
  double total = 1;
  for (std::size_t i = 0; i < L.m(); ++i) total *= static_cast<double>(L.N());
  if (total > static_cast<double>(limits.max_branches)) throw SizeLimitError("N^m challenges exceed budget");
  std::vector<UVector> out;
  UVector u(L.m(), 1);
  for (;;) {
    out.push_back(u);
    std::size_t i = L.m();
    while (i > 0 && u[i - 1] == L.N()) u[--i] = 1;
    if (i == 0) return out;
    ++u[i - 1];
  }
}

inline std::vector<UVector> sample_u(const RegisterLayout& L, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<UVector> out(count, UVector(L.m()));
  for (auto& u : out)
    for (auto& x : u) x = 1 + static_cast<unsigned>(rng() % L.N());
  return out;
}

inline QuantumRunReport run_quantum(const Instance& inst, std::size_t m, const SparseProverSpec& spec,
                                    const UMode& mode, bool with_events = false) {
  const RegisterLayout L = build_layout(inst, m);
  QuantumRunReport rep;
  rep.n = inst.n();
  rep.N = inst.rounds();
  rep.k = inst.field().k();
  rep.m = m;
  rep.d = inst.d();
  rep.prover = spec.name;
  rep.exhaustive = mode.exhaustive;
  rep.seed = mode.seed;
  if (!mode.exhaustive && mode.count == 0) throw std::invalid_argument("quantum run: sample count must be positive");

  const SparseState psi = prepare_round1(spec, L, inst.limits());
  const Step1Result s1 = step1_filter(psi, inst, L);
  const auto us = mode.exhaustive ? all_u(L, inst.limits()) : sample_u(L, mode.count, mode.seed);
  Rational sum = 0, b_sum = 0;
  for (const auto& u : us) {
    const SparseState after = apply_round2_and_cancel(s1.state, u, spec, L);
    PerU row{u, s1.pass_probability, step4_accept_prob(after, u, L)};
    sum += row.accept;
    if (with_events) b_sum += event_probability(s1.state, EventQuery::B(u), inst, L);
    rep.per_u.push_back(std::move(row));
  }
  rep.mean_accept = sum / static_cast<long long>(us.size());
  rep.bound = soundness_bound({inst.n(), inst.d(), inst.rounds(), m, inst.field().k()});
  rep.vacuous = is_vacuous(rep.bound);
  if (with_events) {
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(L.N()));
    for (std::size_t i = 1; i <= m; ++i)
      for (std::size_t j = 1; j <= L.N(); ++j) a[i - 1][j - 1] = event_probability(s1.state, EventQuery::A(i, j), inst, L);
    rep.events_a = std::move(a);
    rep.events_b_mean = b_sum / static_cast<long long>(us.size());
  }
  return rep;
}

}  // namespace qip
