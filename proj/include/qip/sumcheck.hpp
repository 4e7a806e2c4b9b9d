#pragma once

// The classical N-round interactive proof for QBF over GF(2^k).
//
// The verified expression is O_1 O_2 ... O_N A(B) where O_1 is outermost and
// the operator sequence is
//   Q1 x1, R x1, Q2 x2, R x1, R x2, ..., Qn xn, R x1, ..., R xn
// so N = C(n+1, 2) + n. Round j handles O_j: the prover sends the polynomial
// in O_j's variable of O_{j+1} ... O_N A(B) under the current assignment, the
// verifier checks it against the running claim and draws r_j.

#include "qip/gf2k.hpp"
#include "qip/limits.hpp"
#include "qip/qbf.hpp"
#include "qip/rational.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qip {

enum class OpKind { Forall, Exists, Reduce };

struct Operator {
  OpKind kind;
  unsigned var;  // 1-based

  friend bool operator==(const Operator&, const Operator&) = default;
};

inline std::string to_string(const Operator& op) {
  const char* prefix = op.kind == OpKind::Forall ? "A" : op.kind == OpKind::Exists ? "E" : "R";
  return std::string(prefix) + " x" + std::to_string(op.var);
}

struct RoundSchedule {
  std::vector<Operator> ops;              // ops[j-1] is the operator of round j
  std::vector<unsigned> degree_bounds;    // degree_bounds[j-1] = d_j
  unsigned d = 2;                         // protocol-wide bound, max_j d_j

  std::size_t rounds() const { return ops.size(); }
  const Operator& op(std::size_t j) const { return ops.at(j - 1); }
  unsigned degree_bound(std::size_t j) const { return degree_bounds.at(j - 1); }
};

inline std::size_t round_count(unsigned n) { return static_cast<std::size_t>(n) * (n + 1) / 2 + n; }

inline RoundSchedule build_schedule(const PrenexQbf& q) {
  if (q.n() == 0) throw std::invalid_argument("schedule: formula has no variables");
  const DegreeProfile profile = degree_profile(q);
  RoundSchedule s;
  s.d = profile.d;
  for (unsigned i = 1; i <= q.n(); ++i) {
    const auto kind = q.quantifiers[i - 1] == Quantifier::Forall ? OpKind::Forall : OpKind::Exists;
    s.ops.push_back({kind, i});
    s.degree_bounds.push_back(1);
    for (unsigned t = 1; t <= i; ++t) {
      s.ops.push_back({OpKind::Reduce, t});
      // only the innermost block acts directly on A(B); elsewhere the next
      // quantifier squares the degree of an otherwise linear variable
      s.degree_bounds.push_back(i == q.n() ? std::max(2u, profile.per_variable[t - 1]) : 2u);
    }
  }
  return s;
}

/// Formula, field and round schedule of one protocol instance.
class Instance {
 public:
  Instance(PrenexQbf q, FieldCtx field, Limits limits = {})
      : q_(std::move(q)), field_(std::move(field)), schedule_(build_schedule(q_)), limits_(limits) {}

  const PrenexQbf& formula() const { return q_; }
  const FieldCtx& field() const { return field_; }
  const RoundSchedule& schedule() const { return schedule_; }
  const Limits& limits() const { return limits_; }
  unsigned n() const { return q_.n(); }
  std::size_t rounds() const { return schedule_.rounds(); }
  unsigned d() const { return schedule_.d; }

 private:
  PrenexQbf q_;
  FieldCtx field_;
  RoundSchedule schedule_;
  Limits limits_;
};

/// Value combination rule of an operator given the round polynomial's values
/// at 0 and 1; rho is the operator variable's value before the round.
template <class Ring>
typename Ring::value_type combine(const Ring& ring, OpKind kind, const typename Ring::value_type& at0,
                                  const typename Ring::value_type& at1,
                                  const typename Ring::value_type& rho) {
  switch (kind) {
    case OpKind::Forall: return ring.mul(at0, at1);
    case OpKind::Exists: return ring.add(ring.add(at0, at1), ring.mul(at0, at1));
    case OpKind::Reduce:
      return ring.add(ring.mul(ring.add(ring.one(), rho), at0), ring.mul(rho, at1));
  }
  throw std::logic_error("combine: bad operator");
}

/// Variable assignment after rounds 1..r_prefix.size() (unset entries are 0).
inline std::vector<FieldElem> assignment_after(const Instance& inst, std::span<const FieldElem> r_prefix) {
  if (r_prefix.size() > inst.rounds()) throw std::invalid_argument("assignment: prefix longer than N");
  std::vector<FieldElem> a(inst.n());
  for (std::size_t j = 1; j <= r_prefix.size(); ++j) a[inst.schedule().op(j).var - 1] = r_prefix[j - 1];
  return a;
}

namespace detail {

template <class Ring>
typename Ring::value_type expand_suffix(const Instance& inst, const Ring& ring, std::size_t j,
                                        std::vector<typename Ring::value_type>& assignment) {
  const auto& sched = inst.schedule();
  if (j == sched.rounds())
    return arith_eval(inst.formula().matrix,
                      std::span<const typename Ring::value_type>(assignment), ring);
  const Operator& op = sched.ops[j];  // operator j+1
  auto& slot = assignment[op.var - 1];
  const auto saved = slot;
  slot = ring.zero();
  auto at0 = expand_suffix(inst, ring, j + 1, assignment);
  slot = ring.one();
  auto at1 = expand_suffix(inst, ring, j + 1, assignment);
  slot = saved;
  return combine(ring, op.kind, at0, at1, saved);
}

inline void check_expansion(const Instance& inst, std::size_t j) {
  const std::size_t remaining = inst.rounds() - j;
  if (remaining >= 63 || (std::uint64_t{1} << remaining) > inst.limits().max_expansion_leaves)
    throw SizeLimitError("expansion of " + std::to_string(remaining) + " operators exceeds budget");
}

}  // namespace detail

/// Value of O_{j+1} ... O_N A(B) under the given assignment, by recursive
/// expansion over the remaining operators (2^(N-j) leaves).
template <class Ring>
typename Ring::value_type partial_value(const Instance& inst, const Ring& ring, std::size_t j,
                                        std::vector<typename Ring::value_type> assignment) {
  if (j > inst.rounds()) throw std::invalid_argument("partial_value: round index out of range");
  if (assignment.size() != inst.n()) throw std::invalid_argument("partial_value: assignment size mismatch");
  detail::check_expansion(inst, j);
  return detail::expand_suffix(inst, ring, j, assignment);
}

inline FieldElem partial_value(const Instance& inst, std::size_t j, std::vector<FieldElem> assignment) {
  return partial_value(inst, FieldRing{&inst.field()}, j, std::move(assignment));
}

/// The correct (honest) polynomial c_j for the verifier's r_1..r_{j-1}.
///
/// Evaluates the round-j expression at d_j+1 points and interpolates. Over
/// fields with fewer than d_j+1 elements the expression is expanded
/// symbolically over GF(2^k)[z] instead.
inline UniPoly correct_polynomial(const Instance& inst, std::size_t j, std::span<const FieldElem> r_prefix) {
  if (j < 1 || j > inst.rounds()) throw std::invalid_argument("correct_polynomial: round out of range");
  if (r_prefix.size() != j - 1) throw std::invalid_argument("correct_polynomial: need r_1..r_{j-1}");
  const FieldCtx& f = inst.field();
  const Operator& op = inst.schedule().op(j);
  const unsigned dj = inst.schedule().degree_bound(j);
  std::vector<FieldElem> base = assignment_after(inst, r_prefix);
  detail::check_expansion(inst, j);

  if (f.k() < 63 && f.size() > dj) {
    std::vector<std::pair<FieldElem, FieldElem>> points;
    for (std::uint64_t x = 0; x <= dj; ++x) {
      base[op.var - 1] = FieldElem{x};
      points.emplace_back(FieldElem{x}, partial_value(inst, j, base));
    }
    return poly_interpolate(f, points).padded(dj + 1);
  }

  const PolyRing ring{&f};
  std::vector<UniPoly> symbolic;
  for (const auto& v : base) symbolic.push_back(UniPoly::constant(v));
  symbolic[op.var - 1] = UniPoly::identity();
  UniPoly c = detail::expand_suffix(inst, ring, j, symbolic);
  if (!c.degree_at_most(dj)) throw std::logic_error("correct_polynomial: degree bound violated");
  return c.padded(dj + 1);
}

/// Round-by-round verifier state; predicate E is the conjunction of every
/// receive() and the final finish().
class Verifier {
 public:
  explicit Verifier(const Instance& inst)
      : inst_(&inst), assignment_(inst.n()), claim_(inst.field().one()) {}

  /// Next round whose polynomial is expected (1-based); N+1 after the last.
  std::size_t round() const { return round_; }
  FieldElem claim() const { return claim_; }
  const std::vector<FieldElem>& assignment() const { return assignment_; }
  bool rejected() const { return reject_round_.has_value(); }
  std::optional<std::size_t> reject_round() const { return reject_round_; }
  const std::string& reason() const { return reason_; }

  /// Checks the degree bound and the round's consistency rule for f_j.
  bool receive(const UniPoly& f) {
    if (awaiting_challenge_) throw std::logic_error("verifier: challenge expected before next polynomial");
    if (round_ > inst_->rounds()) throw std::logic_error("verifier: all rounds already received");
    awaiting_challenge_ = true;
    last_ = f;
    if (rejected()) return false;
    const auto& fld = inst_->field();
    const Operator& op = inst_->schedule().op(round_);
    const unsigned dj = inst_->schedule().degree_bound(round_);
    for (const auto& c : f.coeffs)
      if (!fld.contains(c)) return reject("coefficient outside the field");
    if (!f.degree_at_most(dj)) return reject("degree exceeds bound " + std::to_string(dj));
    const FieldElem at0 = poly_eval(fld, f, fld.zero());
    const FieldElem at1 = poly_eval(fld, f, fld.one());
    const FieldElem rho = assignment_[op.var - 1];
    if (combine(FieldRing{&fld}, op.kind, at0, at1, rho) != claim_)
      return reject("inconsistent with claim for " + to_string(op));
    return true;
  }

  /// Fixes r_j: the operator's variable becomes r_j and the claim f_j(r_j).
  void challenge(FieldElem r) {
    if (!awaiting_challenge_) throw std::logic_error("verifier: polynomial expected before challenge");
    awaiting_challenge_ = false;
    const auto& fld = inst_->field();
    if (!fld.contains(r)) throw std::invalid_argument("verifier: challenge outside the field");
    assignment_[inst_->schedule().op(round_).var - 1] = r;
    if (!rejected()) claim_ = poly_eval(fld, last_, r);
    ++round_;
  }

  /// Final check v_N = A(B)(final assignment). Call after round N.
  bool finish() {
    if (round_ != inst_->rounds() + 1 || awaiting_challenge_)
      throw std::logic_error("verifier: finish before all rounds");
    if (rejected()) return false;
    const FieldElem expected = arith_eval(inst_->formula().matrix, assignment_, inst_->field());
    if (expected != claim_) return reject("final value differs from A(B)", inst_->rounds());
    return true;
  }

 private:
  bool reject(std::string why) { return reject(std::move(why), round_); }
  bool reject(std::string why, std::size_t round) {
    if (!reject_round_) {
      reject_round_ = round;
      reason_ = std::move(why);
    }
    return false;
  }

  const Instance* inst_;
  std::size_t round_ = 1;
  std::vector<FieldElem> assignment_;
  FieldElem claim_;
  UniPoly last_;
  bool awaiting_challenge_ = false;
  std::optional<std::size_t> reject_round_;
  std::string reason_;
};

struct Verdict {
  bool accept = false;
  std::optional<std::size_t> reject_round;
  std::string reason;
};

inline Verdict check_transcript(const Instance& inst, std::span<const FieldElem> r, std::span<const UniPoly> f) {
  if (r.size() != inst.rounds() || f.size() != inst.rounds())
    throw std::invalid_argument("predicate E: expected " + std::to_string(inst.rounds()) +
                                " challenges and polynomials");
  Verifier v(inst);
  for (std::size_t j = 0; j < r.size(); ++j) {
    v.receive(f[j]);
    v.challenge(r[j]);
  }
  Verdict out;
  out.accept = v.finish();
  out.reject_round = v.reject_round();
  out.reason = v.reason();
  return out;
}

inline bool predicate_E(const Instance& inst, std::span<const FieldElem> r, std::span<const UniPoly> f) {
  return check_transcript(inst, r, f).accept;
}

/// Calls fn(poly) for every polynomial of degree <= dj that passes the
/// consistency rule of `kind` against `claim`, in increasing coefficient
/// order, until fn returns true. Returns whether it stopped early. The
/// constant term is solved from the others: with s = c_1 + ... + c_dj we
/// have f(0) = c_0 and f(1) = c_0 + s.
inline bool find_consistent_poly(const FieldCtx& f, OpKind kind, FieldElem rho, FieldElem claim, unsigned dj,
                                 const std::function<bool(const UniPoly&)>& fn) {
  if (f.k() > 16) throw SizeLimitError("polynomial enumeration over GF(2^" + std::to_string(f.k()) + ")");
  const std::uint64_t q = f.size();
  std::vector<FieldElem> c(dj + 1);
  const FieldRing ring{&f};
  for (;;) {
    FieldElem s = f.zero();
    for (unsigned i = 1; i <= dj; ++i) s = f.add(s, c[i]);
    if (kind == OpKind::Reduce) {
      c[0] = f.add(claim, f.mul(rho, s));
      if (fn(UniPoly(c))) return true;
    } else {
      for (std::uint64_t c0 = 0; c0 < q; ++c0) {
        c[0] = FieldElem{c0};
        if (combine(ring, kind, c[0], f.add(c[0], s), rho) == claim && fn(UniPoly(c))) return true;
      }
    }
    unsigned i = 1;
    for (; i <= dj; ++i) {
      if (++c[i].bits < q) break;
      c[i].bits = 0;
    }
    if (i > dj) return false;
  }
}

inline void for_each_consistent_poly(const FieldCtx& f, OpKind kind, FieldElem rho, FieldElem claim,
                                     unsigned dj, const std::function<void(const UniPoly&)>& fn) {
  find_consistent_poly(f, kind, rho, claim, dj, [&](const UniPoly& p) {
    fn(p);
    return false;
  });
}

/// A prover strategy for the classical protocol.
class ProverPolicy {
 public:
  virtual ~ProverPolicy() = default;
  /// Message for round j given r_1..r_{j-1} and this prover's f_1..f_{j-1}.
  virtual UniPoly next_poly(std::size_t round, std::span<const FieldElem> r_prefix,
                            std::span<const UniPoly> prior) = 0;
};

class HonestProver final : public ProverPolicy {
 public:
  explicit HonestProver(const Instance& inst) : inst_(&inst) {}
  UniPoly next_poly(std::size_t round, std::span<const FieldElem> r_prefix, std::span<const UniPoly>) override {
    return correct_polynomial(*inst_, round, r_prefix);
  }

 private:
  const Instance* inst_;
};

inline HonestProver honest_policy(const Instance& inst) { return HonestProver(inst); }

/// Sends uniformly random polynomials within each round's degree bound.
class RandomProver final : public ProverPolicy {
 public:
  RandomProver(const Instance& inst, std::uint64_t seed) : inst_(&inst), rng_(seed) {}
  UniPoly next_poly(std::size_t round, std::span<const FieldElem>, std::span<const UniPoly>) override {
    std::vector<FieldElem> c(inst_->schedule().degree_bound(round) + 1);
    for (auto& x : c) x = FieldElem{rng_() & inst_->field().mask()};
    return UniPoly(std::move(c));
  }

 private:
  const Instance* inst_;
  std::mt19937_64 rng_;
};

/// Prover maximizing the verifier's acceptance probability by backward
/// induction over (round, assignment, claim) states.
class OptimalCheater final : public ProverPolicy {
 public:
  explicit OptimalCheater(const Instance& inst) : inst_(&inst) {
    const FieldCtx& f = inst.field();
    if (f.k() > 16) throw SizeLimitError("optimal cheater needs an enumerable field");
    const double q = static_cast<double>(f.size());
    if (inst.rounds() * f.k() >= 62) throw SizeLimitError("optimal cheater: |F|^N overflows");
    double work = 0;
    std::vector<bool> bound(inst.n(), false);
    unsigned assigned = 0;
    for (std::size_t j = 1; j <= inst.rounds(); ++j) {
      const auto& op = inst.schedule().op(j);
      const double states = std::pow(q, std::min<double>(static_cast<double>(j - 1), assigned) + 1);
      work += states * std::pow(q, inst.schedule().degree_bound(j) + 1) * 2;
      if (!bound[op.var - 1]) {
        bound[op.var - 1] = true;
        ++assigned;
      }
    }
    if (work > static_cast<double>(inst.limits().max_cheater_work))
      throw SizeLimitError("optimal cheater dynamic program too large");
    std::vector<FieldElem> start(inst.n());
    best_count_ = solve(1, start, f.one()).count;
  }

  /// Exact maximum acceptance probability, |F|^-N times an accepting count.
  Rational value() const {
    BigInt den = 1;
    den <<= static_cast<unsigned>(inst_->rounds() * inst_->field().k());
    return Rational(BigInt(best_count_), den);
  }

  UniPoly next_poly(std::size_t round, std::span<const FieldElem> r_prefix,
                    std::span<const UniPoly> prior) override {
    const FieldCtx& f = inst_->field();
    FieldElem claim = f.one();
    if (round > 1) claim = poly_eval(f, prior[round - 2], r_prefix[round - 2]);
    auto a = assignment_after(*inst_, r_prefix);
    const Entry& e = solve(round, a, claim);
    return e.best;
  }

 private:
  struct Entry {
    std::uint64_t count = 0;
    UniPoly best;
  };

  const Entry& solve(std::size_t j, const std::vector<FieldElem>& assignment, FieldElem claim) {
    std::vector<std::uint64_t> key;
    key.reserve(assignment.size() + 2);
    key.push_back(j);
    key.push_back(claim.bits);
    for (const auto& v : assignment) key.push_back(v.bits);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    const FieldCtx& f = inst_->field();
    const auto& op = inst_->schedule().op(j);
    const unsigned dj = inst_->schedule().degree_bound(j);
    const FieldElem rho = assignment[op.var - 1];
    Entry best;
    best.best = UniPoly(std::vector<FieldElem>(dj + 1));
    bool found = false;
    std::vector<FieldElem> next = assignment;

    std::vector<FieldElem> targets;
    if (j == inst_->rounds()) {
      for (std::uint64_t r = 0; r < f.size(); ++r) {
        next[op.var - 1] = FieldElem{r};
        targets.push_back(arith_eval(inst_->formula().matrix, next, f));
      }
    }

    for_each_consistent_poly(f, op.kind, rho, claim, dj, [&](const UniPoly& p) {
      std::uint64_t total = 0;
      for (std::uint64_t r = 0; r < f.size(); ++r) {
        const FieldElem v = poly_eval(f, p, FieldElem{r});
        if (j == inst_->rounds()) {
          total += v == targets[r] ? 1 : 0;
        } else {
          next[op.var - 1] = FieldElem{r};
          total += solve(j + 1, next, v).count;
        }
      }
      if (!found || total > best.count) {
        found = true;
        best.count = total;
        best.best = p;
      }
    });
    return memo_.emplace(std::move(key), std::move(best)).first->second;
  }

  const Instance* inst_;
  std::map<std::vector<std::uint64_t>, Entry> memo_;
  std::uint64_t best_count_ = 0;
};

struct CheaterResult {
  std::shared_ptr<OptimalCheater> policy;
  Rational max_accept_probability;
};

inline CheaterResult optimal_cheater(const Instance& inst) {
  auto p = std::make_shared<OptimalCheater>(inst);
  Rational v = p->value();
  return {std::move(p), std::move(v)};
}

struct Transcript {
  unsigned n = 0;
  std::size_t N = 0;
  unsigned k = 0;
  u128 g = 0;
  std::vector<FieldElem> r;
  std::vector<UniPoly> f;
  bool accept = false;
  std::optional<std::size_t> reject_round;
  std::string reason;
};

namespace detail {

template <class NextChallenge>
Transcript execute(const Instance& inst, ProverPolicy& prover, NextChallenge&& next_challenge) {
  Transcript t;
  t.n = inst.n();
  t.N = inst.rounds();
  t.k = inst.field().k();
  t.g = inst.field().modulus();
  for (std::size_t j = 1; j <= inst.rounds(); ++j) {
    try {
      t.f.push_back(prover.next_poly(j, t.r, t.f));
    } catch (const std::exception& e) {
      t.accept = false;
      t.reject_round = j;
      t.reason = std::string("prover failure: ") + e.what();
      return t;
    }
    t.r.push_back(next_challenge(j));
  }
  const Verdict v = check_transcript(inst, t.r, t.f);
  t.accept = v.accept;
  t.reject_round = v.reject_round;
  t.reason = v.reason;
  return t;
}

}  // namespace detail

/// One seeded execution: N prover messages interleaved with uniform k-bit
/// challenges (r_N is drawn but never shown to the prover).
inline Transcript run_protocol(const Instance& inst, ProverPolicy& prover, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::uint64_t mask = inst.field().mask();
  return detail::execute(inst, prover, [&](std::size_t) { return FieldElem{rng() & mask}; });
}

/// Execution against a fixed challenge vector r_1..r_N.
inline Transcript run_protocol_with(const Instance& inst, ProverPolicy& prover, std::span<const FieldElem> r) {
  if (r.size() != inst.rounds()) throw std::invalid_argument("run_protocol_with: need N challenges");
  for (const auto& x : r)
    if (!inst.field().contains(x)) throw std::invalid_argument("run_protocol_with: challenge outside the field");
  return detail::execute(inst, prover, [&](std::size_t j) { return r[j - 1]; });
}

/// Exact acceptance probability of a prover over every r in F^N.
inline Rational exhaustive_acceptance(const Instance& inst, ProverPolicy& prover) {
  const FieldCtx& f = inst.field();
  if (f.k() * inst.rounds() > 20) throw SizeLimitError("exhaustive run over |F|^N challenge vectors");
  const std::uint64_t total = std::uint64_t{1} << (f.k() * inst.rounds());
  std::uint64_t accepted = 0;
  std::vector<FieldElem> r(inst.rounds());
  for (std::uint64_t code = 0; code < total; ++code) {
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = FieldElem{(code >> (j * f.k())) & f.mask()};
    accepted += run_protocol_with(inst, prover, r).accept ? 1 : 0;
  }
  return Rational(BigInt(accepted), BigInt(total));
}

/// Accepting count of the honest prover over every challenge vector in
/// F^N, by depth-first search sharing verifier state between common prefixes.
struct ExhaustiveResult {
  BigInt accepted = 0;
  BigInt total = 0;
};

inline ExhaustiveResult exhaustive_honest(const Instance& inst) {
  const FieldCtx& f = inst.field();
  if (f.k() * inst.rounds() > 24) throw SizeLimitError("exhaustive run over |F|^N challenge vectors");
  ExhaustiveResult out;
  std::vector<FieldElem> prefix;
  auto dfs = [&](auto&& self, const Verifier& v) -> void {
    const std::size_t j = v.round();
    if (j > inst.rounds()) {
      Verifier last = v;
      out.total += 1;
      if (last.finish()) out.accepted += 1;
      return;
    }
    Verifier received = v;
    received.receive(correct_polynomial(inst, j, prefix));
    if (received.rejected()) {
      // fails for every extension; count them without expanding
      BigInt skipped = 1;
      skipped <<= static_cast<unsigned>((inst.rounds() - j + 1) * f.k());
      out.total += skipped;
      return;
    }
    for (std::uint64_t r = 0; r < f.size(); ++r) {
      Verifier next = received;
      next.challenge(FieldElem{r});
      prefix.push_back(FieldElem{r});
      self(self, next);
      prefix.pop_back();
    }
  };
  dfs(dfs, Verifier(inst));
  return out;
}

}  // namespace qip
