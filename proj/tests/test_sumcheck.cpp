#include "qip/sumcheck.hpp"
#include "support/formulas.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qip;
using testing_support::all_challenges;
using testing_support::all_polys;
using testing_support::correct_polys;

namespace {

Instance make(const std::string& text, unsigned k) { return Instance(parse_qbf(text), FieldCtx(k)); }

std::vector<std::string> all_n12(bool truth) {
  std::vector<std::string> out;
  for (const auto* list : truth ? std::vector{&testing_support::true_formulas_n1(), &testing_support::true_formulas_n2()}
                                : std::vector{&testing_support::false_formulas_n1(), &testing_support::false_formulas_n2()})
    out.insert(out.end(), list->begin(), list->end());
  return out;
}

}  // namespace

TEST(Schedule, Examples) {
  const auto s1 = build_schedule(parse_qbf("A x1 : x1"));
  ASSERT_EQ(s1.rounds(), 2u);
  EXPECT_EQ(s1.op(1), (Operator{OpKind::Forall, 1}));
  EXPECT_EQ(s1.op(2), (Operator{OpKind::Reduce, 1}));
  EXPECT_EQ(s1.degree_bounds, std::vector<unsigned>({1, 2}));

  const auto s2 = build_schedule(parse_qbf("E x1 A x2 : x1 & x1 & x1 & x2"));
  ASSERT_EQ(s2.rounds(), 5u);
  const std::vector<Operator> expect{{OpKind::Exists, 1}, {OpKind::Reduce, 1}, {OpKind::Forall, 2},
                                     {OpKind::Reduce, 1}, {OpKind::Reduce, 2}};
  EXPECT_EQ(s2.ops, expect);
  EXPECT_EQ(s2.degree_bounds, std::vector<unsigned>({1, 2, 1, 3, 2}));
  EXPECT_EQ(s2.d, 3u);
  EXPECT_EQ(build_schedule(parse_qbf("E x1 E x2 E x3 : x1 | x2 | x3")).rounds(), 9u);
}

TEST(Schedule, LengthFormula) {
  for (unsigned n = 1; n <= 6; ++n) {
    PrenexQbf q;
    q.quantifiers.assign(n, Quantifier::Exists);
    q.matrix = BoolExpr::variable(1);
    for (unsigned v = 2; v <= n; ++v) q.matrix = BoolExpr::conj(q.matrix, BoolExpr::variable(v));
    const auto s = build_schedule(q);
    EXPECT_EQ(s.rounds(), n * (n + 1) / 2 + n);
    EXPECT_EQ(round_count(n), s.rounds());
    for (std::size_t j = 1; j <= s.rounds(); ++j) EXPECT_LE(s.degree_bound(j), s.d);
  }
}

TEST(PartialValue, Examples) {
  const auto e = make("E x1 : x1", 2);
  EXPECT_EQ(partial_value(e, 0, {FieldElem{0}}), e.field().one());
  const auto a = make("A x1 : x1", 2);
  EXPECT_EQ(partial_value(a, 0, {FieldElem{0}}), a.field().zero());
  EXPECT_EQ(partial_value(a, 2, {FieldElem{3}}), FieldElem{3});
}

TEST(PartialValue, RoundZeroIsTruthValue) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 150; ++t) {
    const unsigned n = 1 + rng() % 3;
    const Instance inst(testing_support::random_qbf(rng, n, 1 + rng() % 5), FieldCtx(3));
    const bool truth = eval_qbf(inst.formula());
    ASSERT_EQ(partial_value(inst, 0, std::vector<FieldElem>(n)), truth ? FieldElem{1} : FieldElem{0})
        << print_qbf(inst.formula());
  }
}

TEST(PartialValue, SizeCutoff) {
  Limits tight;
  tight.max_expansion_leaves = 4;
  const Instance inst(parse_qbf("E x1 E x2 : x1 & x2"), FieldCtx(2), tight);
  EXPECT_THROW(partial_value(inst, 0, std::vector<FieldElem>(2)), SizeLimitError);
  EXPECT_NO_THROW(partial_value(inst, 3, std::vector<FieldElem>(2)));
}

TEST(CorrectPolynomial, Examples) {
  const UniPoly z = UniPoly::identity();
  for (const char* text : {"A x1 : x1", "E x1 : x1"}) {
    const auto inst = make(text, 2);
    EXPECT_EQ(correct_polynomial(inst, 1, {}), z) << text;
    for (std::uint64_t r = 0; r < 4; ++r) {
      const std::vector<FieldElem> pre{FieldElem{r}};
      EXPECT_EQ(correct_polynomial(inst, 2, pre), z) << text;
    }
  }
  const auto inst = make("A x1 : x1", 2);
  EXPECT_EQ(honest_policy(inst).next_poly(1, {}, {}), z);
  EXPECT_THROW(correct_polynomial(inst, 0, {}), std::invalid_argument);
  EXPECT_THROW(correct_polynomial(inst, 2, {}), std::invalid_argument);
}

// c_j(z) must equal the brute-force round-j expression at every field point.
TEST(CorrectPolynomial, MatchesPointwiseExpansion) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 60; ++t) {
    const unsigned n = 1 + rng() % 2;
    const Instance inst(testing_support::random_qbf(rng, n, 1 + rng() % 5), FieldCtx(3));
    std::vector<FieldElem> r;
    for (std::size_t j = 1; j <= inst.rounds(); ++j) {
      const UniPoly c = correct_polynomial(inst, j, r);
      ASSERT_TRUE(c.degree_at_most(inst.schedule().degree_bound(j)));
      auto a = assignment_after(inst, r);
      for (std::uint64_t z = 0; z < 8; ++z) {
        a[inst.schedule().op(j).var - 1] = FieldElem{z};
        ASSERT_EQ(poly_eval(inst.field(), c, FieldElem{z}), partial_value(inst, j, a));
      }
      r.push_back(FieldElem{rng() & 7});
    }
  }
}

// Over GF(2) the polynomial is built symbolically; its coefficients lie in
// the prime field, so they must agree with the interpolated GF(4) result
// for challenges in {0,1}.
TEST(CorrectPolynomial, SymbolicAgreesWithInterpolation) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 80; ++t) {
    const unsigned n = 1 + rng() % 2;
    const auto q = testing_support::random_qbf(rng, n, 1 + rng() % 6);
    const Instance small(q, FieldCtx(1)), big(q, FieldCtx(2));
    std::vector<FieldElem> r;
    for (std::size_t j = 1; j <= small.rounds(); ++j) {
      ASSERT_EQ(correct_polynomial(small, j, r), correct_polynomial(big, j, r)) << print_qbf(q) << " j=" << j;
      r.push_back(FieldElem{rng() & 1});
    }
  }
}

TEST(CorrectPolynomial, RoundConsistencyIdentity) {
  for (bool truth : {true, false})
    for (const auto& text : all_n12(truth)) {
      const auto inst = make(text, 2);
      const FieldCtx& f = inst.field();
      for (const auto& r : all_challenges(inst))
        for (std::size_t j = 1; j <= inst.rounds(); ++j) {
          const auto prefix = std::span<const FieldElem>(r).first(j - 1);
          const UniPoly c = correct_polynomial(inst, j, prefix);
          const Operator& op = inst.schedule().op(j);
          auto before = assignment_after(inst, prefix);
          const FieldElem rho = before[op.var - 1];
          const FieldElem combined =
              combine(FieldRing{&f}, op.kind, poly_eval(f, c, f.zero()), poly_eval(f, c, f.one()), rho);
          ASSERT_EQ(combined, partial_value(inst, j - 1, before)) << text;
          const auto after = assignment_after(inst, std::span<const FieldElem>(r).first(j));
          ASSERT_EQ(poly_eval(f, c, r[j - 1]), partial_value(inst, j, after)) << text;
        }
    }
}

TEST(PredicateE, Examples) {
  const auto t = make("E x1 : x1", 2);
  const std::vector<FieldElem> r{FieldElem{2}, FieldElem{3}};
  EXPECT_TRUE(predicate_E(t, r, correct_polys(t, r)));

  const auto fq = make("A x1 : x1", 2);
  auto msgs = correct_polys(fq, r);
  const Verdict v = check_transcript(fq, r, msgs);
  EXPECT_FALSE(v.accept);
  EXPECT_EQ(v.reject_round, 1u);
  EXPECT_NE(v.reason.find("A x1"), std::string::npos);

  // degree above d_1 = 1, otherwise consistent with claim 1 under E
  auto over = correct_polys(t, r);
  over[0] = UniPoly({FieldElem{0}, FieldElem{0}, FieldElem{1}});
  EXPECT_FALSE(predicate_E(t, r, over));
  EXPECT_THROW(predicate_E(t, std::span<const FieldElem>(r).first(1), over), std::invalid_argument);
}

TEST(PredicateE, FinalCheckFailureIsRoundN) {
  const auto t = make("E x1 : x1", 2);
  const std::vector<FieldElem> r{FieldElem{2}, FieldElem{3}};
  auto msgs = correct_polys(t, r);
  // keep round-2 consistency (f(0)(1+r1) + f(1) r1 = f1(r1)) but change f(r2)
  const FieldCtx& f = t.field();
  const FieldElem target = poly_eval(f, msgs[0], r[0]);
  UniPoly alt({f.add(target, f.mul(r[0], FieldElem{1})), FieldElem{0}, FieldElem{1}});
  ASSERT_EQ(f.add(f.mul(f.add(f.one(), r[0]), poly_eval(f, alt, f.zero())), f.mul(r[0], poly_eval(f, alt, f.one()))),
            target);
  msgs[1] = alt;
  ASSERT_NE(poly_eval(f, alt, r[1]), r[1]);
  const Verdict v = check_transcript(t, r, msgs);
  EXPECT_FALSE(v.accept);
  EXPECT_EQ(v.reject_round, 2u);
  EXPECT_EQ(v.reason, "final value differs from A(B)");
}

// Honest messages are accepted for every r (n <= 2, k = 2).
TEST(Properties, HonestAcceptedEverywhere) {
  for (const auto& text : all_n12(true)) {
    const auto inst = make(text, 2);
    for (const auto& r : all_challenges(inst)) ASSERT_TRUE(predicate_E(inst, r, correct_polys(inst, r))) << text;
  }
}

// For false formulas f_1 = c_1 admits no accepting completion.
TEST(Properties, FalseFormulaHonestFirstMessageDooms) {
  for (const auto& text : all_n12(false)) {
    const auto inst = make(text, 2);
    const std::vector<UniPoly> first{correct_polynomial(inst, 1, {})};
    for (const auto& r : all_challenges(inst))
      ASSERT_FALSE(testing_support::accepting_completion_exists(inst, r, first)) << text;
  }
}

// At n = 1 a wrong f_1 lets at most d_1 values of r_1 keep the
// honest continuation f_2 = c_2 consistent.
// A wrong f_N passes the final check for at most d_N values of r_N.
TEST(Properties, WrongMessagesAgreeOnFewChallenges) {
  for (unsigned k : {2u, 3u})
    for (const auto& text : testing_support::false_formulas_n1()) {
      const auto inst = make(text, k);
      const FieldCtx& f = inst.field();
      const UniPoly c1 = correct_polynomial(inst, 1, {});
      for (const auto& f1 : all_polys(f, inst.schedule().degree_bound(1))) {
        if (f1 == c1) continue;
        std::size_t admitting = 0;
        for (std::uint64_t r1 = 0; r1 < f.size(); ++r1) {
          Verifier v(inst);
          if (!v.receive(f1)) break;
          v.challenge(FieldElem{r1});
          const std::vector<FieldElem> pre{FieldElem{r1}};
          admitting += v.receive(correct_polynomial(inst, 2, pre)) ? 1 : 0;
        }
        ASSERT_LE(admitting, inst.schedule().degree_bound(1)) << text;
      }
      for (std::uint64_t r1 = 0; r1 < f.size(); ++r1) {
        const std::vector<FieldElem> pre{FieldElem{r1}};
        const UniPoly c2 = correct_polynomial(inst, 2, pre);
        for (const auto& f2 : all_polys(f, inst.schedule().degree_bound(2))) {
          if (f2 == c2) continue;
          std::size_t passing = 0;
          for (std::uint64_t r2 = 0; r2 < f.size(); ++r2) {
            std::vector<FieldElem> a{FieldElem{r2}};
            passing += poly_eval(f, f2, FieldElem{r2}) == arith_eval(inst.formula().matrix, a, f) ? 1 : 0;
          }
          ASSERT_LE(passing, inst.schedule().degree_bound(2)) << text;
        }
      }
    }
}

TEST(ConsistentPolys, EnumeratesExactlyTheConsistentOnes) {
  const FieldCtx f(2);
  const FieldRing ring{&f};
  for (auto kind : {OpKind::Forall, OpKind::Exists, OpKind::Reduce})
    for (std::uint64_t rho = 0; rho < 4; ++rho)
      for (std::uint64_t claim = 0; claim < 4; ++claim) {
        std::vector<UniPoly> got;
        for_each_consistent_poly(f, kind, FieldElem{rho}, FieldElem{claim}, 2,
                                 [&](const UniPoly& p) { got.push_back(p); });
        std::vector<UniPoly> want;
        for (const auto& p : all_polys(f, 2))
          if (combine(ring, kind, poly_eval(f, p, f.zero()), poly_eval(f, p, f.one()), FieldElem{rho}) ==
              FieldElem{claim})
            want.push_back(p);
        ASSERT_EQ(got.size(), want.size());
        for (const auto& p : want) ASSERT_NE(std::find(got.begin(), got.end(), p), got.end());
      }
}

TEST(OptimalCheater, MatchesBruteForceAtN1) {
  for (unsigned k : {2u, 3u})
    for (bool truth : {true, false})
      for (const auto& text : truth ? testing_support::true_formulas_n1() : testing_support::false_formulas_n1()) {
        const auto inst = make(text, k);
        const auto res = optimal_cheater(inst);
        const std::uint64_t count = testing_support::brute_force_optimal_count_n1(inst);
        const Rational brute(BigInt(count), BigInt(std::uint64_t{1} << (2 * k)));
        EXPECT_EQ(res.max_accept_probability, brute) << text << " k=" << k;
        if (truth) {
          EXPECT_EQ(res.max_accept_probability, Rational(1)) << text;
        }
      }
}

TEST(OptimalCheater, BelowSoundnessBound) {
  for (unsigned k : {2u, 3u, 4u})
    for (const auto& text : testing_support::false_formulas_n1()) {
      const auto inst = make(text, k);
      const auto res = optimal_cheater(inst);
      const Rational bound(BigInt(inst.d() * inst.rounds()), BigInt(inst.field().size()));
      EXPECT_LE(res.max_accept_probability, bound) << text << " k=" << k;
    }
  const auto a4 = make("A x1 : x1", 4);
  EXPECT_LE(optimal_cheater(a4).max_accept_probability, Rational(4, 16));
}

TEST(OptimalCheater, PolicyRealizesItsValue) {
  for (const char* text : {"A x1 : x1", "E x1 : x1 & ~x1", "A x1 : x1 & x1", "E x1 : ~x1"}) {
    const auto inst = make(text, 2);
    auto res = optimal_cheater(inst);
    EXPECT_EQ(exhaustive_acceptance(inst, *res.policy), res.max_accept_probability) << text;
  }
  const auto inst2 = make("A x1 A x2 : x1 | x2", 2);
  auto res = optimal_cheater(inst2);
  EXPECT_EQ(exhaustive_acceptance(inst2, *res.policy), res.max_accept_probability);
  EXPECT_LE(res.max_accept_probability, Rational(BigInt(inst2.d() * inst2.rounds()), BigInt(4)));
}

TEST(OptimalCheater, SizeCutoff) {
  EXPECT_THROW(OptimalCheater(make("A x1 : x1", 20)), SizeLimitError);
  Limits tight;
  tight.max_cheater_work = 100;
  EXPECT_THROW(OptimalCheater(Instance(parse_qbf("A x1 : x1"), FieldCtx(3), tight)), SizeLimitError);
}

TEST(RunProtocol, HonestOutcomeFollowsTruth) {
  for (bool truth : {true, false})
    for (const auto& text : all_n12(truth)) {
      const auto inst = make(text, 4);
      HonestProver p(inst);
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto t = run_protocol(inst, p, seed);
        ASSERT_EQ(t.accept, truth) << text;
        ASSERT_EQ(t.r.size(), inst.rounds());
        ASSERT_EQ(t.f.size(), inst.rounds());
        ASSERT_EQ(t.accept, predicate_E(inst, t.r, t.f));
        if (!truth) {
          ASSERT_EQ(t.reject_round, 1u);
        }
      }
    }
}

TEST(RunProtocol, DeterministicInSeed) {
  const auto inst = make("A x1 E x2 : x1 | x2", 4);
  RandomProver a(inst, 3), b(inst, 3);
  const auto t1 = run_protocol(inst, a, 11), t2 = run_protocol(inst, b, 11);
  EXPECT_EQ(t1.r, t2.r);
  EXPECT_EQ(t1.f, t2.f);
  EXPECT_EQ(t1.reject_round, t2.reject_round);
  HonestProver h(inst);
  EXPECT_NE(run_protocol(inst, h, 1).r, run_protocol(inst, h, 2).r);
}

TEST(RunProtocol, ProverFailureRejects) {
  struct Broken final : ProverPolicy {
    UniPoly next_poly(std::size_t round, std::span<const FieldElem>, std::span<const UniPoly>) override {
      if (round == 2) throw std::runtime_error("out of ideas");
      return UniPoly::identity();
    }
  } broken;
  const auto inst = make("E x1 : x1", 2);
  const auto t = run_protocol(inst, broken, 0);
  EXPECT_FALSE(t.accept);
  EXPECT_EQ(t.reject_round, 2u);
  EXPECT_EQ(t.reason, "prover failure: out of ideas");
}

TEST(ExhaustiveHonest, CountsEveryChallengeVector) {
  const auto t = make("A x1 E x2 : (x1 | ~x2) & (~x1 | x2)", 3);
  const auto res = exhaustive_honest(t);
  EXPECT_EQ(res.total, BigInt(1) << 15);
  EXPECT_EQ(res.accepted, res.total);
  const auto fq = make("A x1 A x2 : x1 | x2", 3);
  const auto bad = exhaustive_honest(fq);
  EXPECT_EQ(bad.total, BigInt(1) << 15);
  EXPECT_EQ(bad.accepted, 0);
}
