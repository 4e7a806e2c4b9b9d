#include "qip/gf2k.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qip;

namespace {

// Schoolbook carry-less product followed by long division; shares no code
// with FieldCtx.
std::uint64_t oracle_mul(std::uint64_t a, std::uint64_t b, u128 g) {
  u128 prod = 0;
  for (int i = 0; i < 64; ++i)
    if ((b >> i) & 1) prod ^= u128{a} << i;
  int dg = 127;
  while (!((g >> dg) & 1)) --dg;
  for (int i = 127; i >= dg; --i)
    if ((prod >> i) & 1) prod ^= g << (i - dg);
  return static_cast<std::uint64_t>(prod);
}

// Irreducibility by trial division against every polynomial of degree 1..k/2.
bool oracle_irreducible(std::uint64_t g, int k) {
  for (int dd = 1; dd <= k / 2; ++dd)
    for (std::uint64_t low = 0; low < (std::uint64_t{1} << dd); ++low) {
      const u128 divisor = (u128{1} << dd) | low;
      if (gf2::mod(g, divisor) == 0) return false;
    }
  return true;
}

}  // namespace

TEST(FieldNew, SmallModuliMatchExhaustiveSearch) {
  EXPECT_EQ(FieldCtx(1).modulus(), u128{0b10});    // x
  EXPECT_EQ(FieldCtx(2).modulus(), u128{0b111});   // x^2+x+1
  EXPECT_EQ(FieldCtx(3).modulus(), u128{0b1011});  // x^3+x+1
  EXPECT_EQ(FieldCtx::poly_string(FieldCtx(2).modulus()), "x^2+x+1");

  for (int k = 1; k <= 12; ++k) {
    std::uint64_t first = 0;
    for (std::uint64_t low = 0; low < (std::uint64_t{1} << k); ++low)
      if (oracle_irreducible((std::uint64_t{1} << k) | low, k)) {
        first = (std::uint64_t{1} << k) | low;
        break;
      }
    EXPECT_EQ(FieldCtx(k).modulus(), u128{first}) << "k=" << k;
  }
}

TEST(FieldNew, RejectsOutOfRange) {
  EXPECT_THROW(FieldCtx(0), std::invalid_argument);
  EXPECT_THROW(FieldCtx(65), std::invalid_argument);
  EXPECT_NO_THROW(FieldCtx(64));
}

TEST(FieldNew, IrreducibilityCertificate) {
  for (unsigned k = 1; k <= 64; ++k) {
    const FieldCtx f(k);
    const u128 g = f.modulus();
    ASSERT_EQ(gf2::degree(g), static_cast<int>(k));
    u128 power = 2;
    for (unsigned i = 1; i <= k / 2; ++i) {
      power = gf2::mulmod(power, power, g);
      ASSERT_EQ(gf2::gcd(g, power ^ 2), u128{1}) << "k=" << k << " i=" << i;
    }
  }
}

TEST(ElemOps, Gf4Tables) {
  const FieldCtx f(2);
  const FieldElem w{0b10}, w1{0b11}, one{1};
  EXPECT_EQ(f.add(w, one), w1);
  EXPECT_EQ(f.add(w, w), f.zero());
  EXPECT_EQ(f.mul(w, w), w1);
  EXPECT_EQ(f.mul(w, w1), one);
  EXPECT_EQ(f.inv(w), w1);
  EXPECT_EQ(f.inv(one), one);
  EXPECT_THROW(f.inv(f.zero()), std::domain_error);
}

TEST(ElemOps, MismatchedContextRejected) {
  const FieldCtx f2(2);
  EXPECT_THROW(f2.add(FieldElem{4}, FieldElem{1}), std::invalid_argument);
  EXPECT_THROW(f2.mul(FieldElem{1}, FieldElem{7}), std::invalid_argument);
}

TEST(ElemOps, MultiplicationMatchesOracle) {
  std::mt19937_64 rng(11);
  for (unsigned k : {1u, 2u, 3u, 4u, 5u, 8u, 9u, 16u, 31u, 32u, 63u, 64u}) {
    const FieldCtx f(k);
    for (int t = 0; t < 2000; ++t) {
      const std::uint64_t a = rng() & f.mask(), b = rng() & f.mask();
      ASSERT_EQ(f.mul(FieldElem{a}, FieldElem{b}).bits, oracle_mul(a, b, f.modulus())) << "k=" << k;
    }
  }
}

TEST(ElemOps, AxiomsExhaustiveSmallFields) {
  for (unsigned k = 1; k <= 4; ++k) {
    const FieldCtx f(k);
    const auto all = all_elements(f);
    for (auto a : all) {
      EXPECT_EQ(f.add(a, f.zero()), a);
      EXPECT_EQ(f.mul(a, f.one()), a);
      EXPECT_EQ(f.add(a, a), f.zero());
      if (!a.is_zero()) {
        EXPECT_EQ(f.mul(a, f.inv(a)), f.one());
      }
      for (auto b : all) {
        EXPECT_EQ(f.add(a, b), f.add(b, a));
        EXPECT_EQ(f.mul(a, b), f.mul(b, a));
        EXPECT_EQ(f.add(f.add(a, b), b), a);
        for (auto c : all) {
          EXPECT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
          EXPECT_EQ(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
          EXPECT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        }
      }
    }
  }
}

TEST(ElemOps, InverseRandomLargeFields) {
  std::mt19937_64 rng(5);
  for (unsigned k : {16u, 32u, 48u, 64u}) {
    const FieldCtx f(k);
    for (int t = 0; t < 500; ++t) {
      FieldElem a{rng() & f.mask()};
      if (a.is_zero()) continue;
      ASSERT_EQ(f.mul(a, f.inv(a)), f.one()) << "k=" << k;
    }
  }
}

TEST(Codec, PositionalConvention) {
  const FieldCtx f2(2);
  EXPECT_EQ(f2.encode(FieldElem{0}), "00");
  EXPECT_EQ(f2.encode(FieldElem{0b10}), "01");
  EXPECT_EQ(f2.decode("01"), FieldElem{0b10});
  EXPECT_THROW(f2.decode("011"), std::invalid_argument);
  EXPECT_THROW(f2.decode("0a"), std::invalid_argument);

  const FieldCtx f3(3);
  for (auto e : all_elements(f3)) EXPECT_EQ(f3.decode(f3.encode(e)), e);
}

TEST(Poly, EvalExamples) {
  const FieldCtx f(2);
  const FieldElem w{0b10};
  EXPECT_EQ(poly_eval(f, UniPoly::constant(FieldElem{3}), w), FieldElem{3});
  EXPECT_EQ(poly_eval(f, UniPoly::identity(), w), w);
  // x^2 + 1 at w: w^2 + 1 = (w+1) + 1 = w
  EXPECT_EQ(poly_eval(f, UniPoly({FieldElem{1}, FieldElem{0}, FieldElem{1}}), w), w);
  EXPECT_EQ(poly_eval(f, UniPoly{}, w), f.zero());
}

TEST(Poly, DegreeIgnoresTrailingZeros) {
  UniPoly p({FieldElem{1}, FieldElem{0}, FieldElem{0}});
  EXPECT_EQ(p.degree(), 0u);
  EXPECT_FALSE(UniPoly{}.degree().has_value());
  EXPECT_TRUE(UniPoly({FieldElem{0}, FieldElem{0}}).is_zero());
  EXPECT_EQ(p, UniPoly::constant(FieldElem{1}));
  EXPECT_THROW(UniPoly({FieldElem{1}, FieldElem{1}}).padded(1), std::invalid_argument);
}

TEST(Poly, InterpolateExamples) {
  const FieldCtx f(2);
  using P = std::pair<FieldElem, FieldElem>;
  EXPECT_EQ(poly_interpolate(f, std::vector<P>{{FieldElem{2}, FieldElem{3}}}), UniPoly::constant(FieldElem{3}));
  EXPECT_EQ(poly_interpolate(f, std::vector<P>{{FieldElem{0}, FieldElem{0}}, {FieldElem{1}, FieldElem{1}}}),
            UniPoly::identity());
  EXPECT_THROW(poly_interpolate(f, std::vector<P>{{FieldElem{1}, FieldElem{0}}, {FieldElem{1}, FieldElem{1}}}),
               std::invalid_argument);
}

TEST(Poly, InterpolationRoundTripProperty) {
  const FieldCtx f(4);
  std::mt19937_64 rng(99);
  for (int t = 0; t < 500; ++t) {
    const std::size_t deg = rng() % 4;
    std::vector<FieldElem> c(deg + 1);
    for (auto& x : c) x = FieldElem{rng() & f.mask()};
    const UniPoly p(c);
    // distinct abscissae: a random 4-subset of GF(16)
    std::vector<std::uint64_t> xs(16);
    for (std::uint64_t i = 0; i < 16; ++i) xs[i] = i;
    std::shuffle(xs.begin(), xs.end(), rng);
    std::vector<std::pair<FieldElem, FieldElem>> pts;
    for (int i = 0; i < 4; ++i) pts.emplace_back(FieldElem{xs[i]}, poly_eval(f, p, FieldElem{xs[i]}));
    const UniPoly q = poly_interpolate(f, pts);
    ASSERT_EQ(q, p);
    for (const auto& [x, y] : pts) ASSERT_EQ(poly_eval(f, q, x), y);
  }
}

TEST(Hex, RoundTrip) {
  EXPECT_EQ(to_hex(std::uint64_t{0}), "0x0");
  EXPECT_EQ(to_hex(std::uint64_t{0xab}), "0xab");
  EXPECT_EQ(from_hex("0xab"), 0xabu);
  EXPECT_EQ(to_hex((u128{1} << 64) | 0x1b), "0x1000000000000001b");
  EXPECT_THROW(from_hex("0xzz"), std::invalid_argument);
}
