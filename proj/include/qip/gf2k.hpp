#pragma once

// Arithmetic in GF(2^k), 1 <= k <= 64, and univariate polynomials over it.
//
// Elements are k-bit words; bit i is the coefficient of x^i. The modulus g is
// stored without its leading x^k term.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qip {

using u128 = unsigned __int128;

struct FieldElem {
  std::uint64_t bits = 0;

  constexpr FieldElem() = default;
  constexpr explicit FieldElem(std::uint64_t b) : bits(b) {}

  constexpr bool is_zero() const { return bits == 0; }
  friend constexpr bool operator==(FieldElem, FieldElem) = default;
  friend constexpr auto operator<=>(FieldElem, FieldElem) = default;
};

namespace gf2 {

/// Degree of a GF(2) polynomial packed in 128 bits; -1 for the zero polynomial.
inline int degree(u128 p) {
  if (p == 0) return -1;
  const auto hi = static_cast<std::uint64_t>(p >> 64);
  if (hi != 0) return 127 - __builtin_clzll(hi);
  return 63 - __builtin_clzll(static_cast<std::uint64_t>(p));
}

inline u128 mod(u128 a, u128 m) {
  const int dm = degree(m);
  if (dm < 0) throw std::domain_error("gf2::mod: zero modulus");
  for (int da = degree(a); da >= dm; da = degree(a)) a ^= m << (da - dm);
  return a;
}

inline u128 gcd(u128 a, u128 b) {
  while (b != 0) {
    a = mod(a, b);
    std::swap(a, b);
  }
  return a;
}

// a * b mod m, for deg a, deg b < deg m <= 64.
inline u128 mulmod(u128 a, u128 b, u128 m) {
  const int dm = degree(m);
  const u128 top = u128{1} << dm;
  u128 acc = 0;
  while (b != 0) {
    if (b & 1) acc ^= a;
    b >>= 1;
    a <<= 1;
    if (a & top) a ^= m;
  }
  return acc;
}

/// Ben-Or test: g of degree k is irreducible iff gcd(g, x^(2^i) - x) = 1 for
/// 1 <= i <= floor(k/2).
inline bool is_irreducible(u128 g) {
  const int k = degree(g);
  if (k < 1) return false;
  const u128 x = 2;
  u128 power = x;  // x^(2^i) mod g; deg g >= 2 whenever the loop runs
  for (int i = 1; i <= k / 2; ++i) {
    power = mulmod(power, power, g);
    if (gcd(g, power ^ x) != 1) return false;
  }
  return true;
}

}  // namespace gf2

class FieldCtx {
 public:
  static constexpr unsigned kMaxBits = 64;

  /// Builds GF(2^k) using the irreducible modulus of degree k with the
  /// smallest integer encoding.
  explicit FieldCtx(unsigned k) : k_(k) {
    if (k < 1 || k > kMaxBits)
      throw std::invalid_argument("field: k must be in [1, 64], got " + std::to_string(k));
    mask_ = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    const u128 lead = u128{1} << k;
    for (std::uint64_t low = 0;; ++low) {
      if (gf2::is_irreducible(lead | low)) {
        low_ = low;
        break;
      }
      if (low == mask_) throw std::logic_error("field: no irreducible polynomial found");
    }
    if (k <= kTableBits) build_table();
  }

  unsigned k() const { return k_; }
  /// Number of elements, 2^k. Only meaningful for k < 64.
  std::uint64_t size() const { return k_ == 64 ? 0 : std::uint64_t{1} << k_; }
  std::uint64_t mask() const { return mask_; }
  /// Full modulus including the x^k term.
  u128 modulus() const { return (u128{1} << k_) | low_; }

  bool contains(FieldElem a) const { return (a.bits & ~mask_) == 0; }

  FieldElem zero() const { return FieldElem{0}; }
  FieldElem one() const { return FieldElem{1}; }
  FieldElem elem(std::uint64_t bits) const {
    FieldElem e{bits};
    check(e);
    return e;
  }

  FieldElem add(FieldElem a, FieldElem b) const {
    check(a);
    check(b);
    return FieldElem{a.bits ^ b.bits};
  }
  FieldElem sub(FieldElem a, FieldElem b) const { return add(a, b); }

  FieldElem mul(FieldElem a, FieldElem b) const {
    check(a);
    check(b);
    if (table_) return FieldElem{(*table_)[(a.bits << k_) | b.bits]};
    return FieldElem{raw_mul(a.bits, b.bits)};
  }

  FieldElem square(FieldElem a) const { return mul(a, a); }

  /// Multiplicative inverse by the extended Euclidean algorithm over GF(2)[x].
  FieldElem inv(FieldElem a) const {
    check(a);
    if (a.is_zero()) throw std::domain_error("field: zero has no inverse");
    u128 r0 = modulus(), r1 = a.bits;
    u128 s0 = 0, s1 = 1;
    while (r1 != 1) {
      // one long-division step at a time keeps the cofactors bounded by deg g
      int shift = gf2::degree(r0) - gf2::degree(r1);
      if (shift < 0) {
        std::swap(r0, r1);
        std::swap(s0, s1);
        shift = -shift;
      }
      r0 ^= r1 << shift;
      s0 ^= s1 << shift;
      if (gf2::degree(r0) < gf2::degree(r1)) {
        std::swap(r0, r1);
        std::swap(s0, s1);
      }
    }
    return FieldElem{static_cast<std::uint64_t>(gf2::mod(s1, modulus()))};
  }

  FieldElem div(FieldElem a, FieldElem b) const { return mul(a, inv(b)); }

  FieldElem pow(FieldElem a, std::uint64_t e) const {
    FieldElem acc = one();
    while (e != 0) {
      if (e & 1) acc = mul(acc, a);
      a = mul(a, a);
      e >>= 1;
    }
    return acc;
  }

  /// Bit string of length k, character i is the coefficient of x^i.
  std::string encode(FieldElem a) const {
    check(a);
    std::string s(k_, '0');
    for (unsigned i = 0; i < k_; ++i)
      if ((a.bits >> i) & 1) s[i] = '1';
    return s;
  }

  FieldElem decode(std::string_view s) const {
    if (s.size() != k_)
      throw std::invalid_argument("field: expected " + std::to_string(k_) + " bits, got " +
                                  std::to_string(s.size()));
    std::uint64_t bits = 0;
    for (unsigned i = 0; i < k_; ++i) {
      if (s[i] == '1')
        bits |= std::uint64_t{1} << i;
      else if (s[i] != '0')
        throw std::invalid_argument("field: bit string contains non-binary character");
    }
    return FieldElem{bits};
  }

  /// Human-readable polynomial in x, e.g. "x^2+x+1".
  static std::string poly_string(u128 p) {
    if (p == 0) return "0";
    std::string out;
    for (int i = gf2::degree(p); i >= 0; --i) {
      if (!((p >> i) & 1)) continue;
      if (!out.empty()) out += '+';
      if (i == 0)
        out += '1';
      else if (i == 1)
        out += 'x';
      else
        out += "x^" + std::to_string(i);
    }
    return out;
  }

  friend bool operator==(const FieldCtx& a, const FieldCtx& b) {
    return a.k_ == b.k_ && a.low_ == b.low_;
  }

 private:
  static constexpr unsigned kTableBits = 8;

  void check(FieldElem a) const {
    if (!contains(a))
      throw std::invalid_argument("field: element does not belong to GF(2^" + std::to_string(k_) +
                                  ")");
  }

  std::uint64_t raw_mul(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t acc = 0;
    const std::uint64_t top = std::uint64_t{1} << (k_ - 1);
    while (b != 0) {
      if (b & 1) acc ^= a;
      b >>= 1;
      const bool carry = (a & top) != 0;
      a = (a << 1) & mask_;
      if (carry) a ^= low_;
    }
    return acc;
  }

  void build_table() {
    const std::uint64_t q = size();
    auto t = std::make_shared<std::vector<std::uint8_t>>(q * q);
    for (std::uint64_t a = 0; a < q; ++a)
      for (std::uint64_t b = 0; b < q; ++b) (*t)[(a << k_) | b] = static_cast<std::uint8_t>(raw_mul(a, b));
    table_ = std::move(t);
  }

  unsigned k_;
  std::uint64_t mask_ = 0;
  std::uint64_t low_ = 0;
  std::shared_ptr<const std::vector<std::uint8_t>> table_;
};

inline FieldCtx field_new(unsigned k) { return FieldCtx(k); }

/// Polynomial over GF(2^k), coefficients lowest degree first. Trailing zero
/// coefficients are allowed; degree() ignores them.
struct UniPoly {
  std::vector<FieldElem> coeffs;

  UniPoly() = default;
  explicit UniPoly(std::vector<FieldElem> c) : coeffs(std::move(c)) {}

  static UniPoly constant(FieldElem c) { return UniPoly({c}); }
  static UniPoly identity() { return UniPoly({FieldElem{0}, FieldElem{1}}); }

  /// Degree ignoring trailing zeros; nullopt for the zero polynomial.
  std::optional<std::size_t> degree() const {
    for (std::size_t i = coeffs.size(); i > 0; --i)
      if (!coeffs[i - 1].is_zero()) return i - 1;
    return std::nullopt;
  }
  bool is_zero() const { return !degree().has_value(); }
  bool degree_at_most(std::size_t bound) const {
    auto d = degree();
    return !d || *d <= bound;
  }

  FieldElem coeff(std::size_t i) const { return i < coeffs.size() ? coeffs[i] : FieldElem{}; }

  /// Copy with exactly n coefficients; throws if that would drop a nonzero one.
  UniPoly padded(std::size_t n) const {
    if (n == 0 ? !is_zero() : !degree_at_most(n - 1))
      throw std::invalid_argument("poly: degree exceeds padding width");
    std::vector<FieldElem> c(n);
    for (std::size_t i = 0; i < std::min(n, coeffs.size()); ++i) c[i] = coeffs[i];
    return UniPoly(std::move(c));
  }

  UniPoly trimmed() const {
    auto d = degree();
    if (!d) return UniPoly{};
    return UniPoly(std::vector<FieldElem>(coeffs.begin(), coeffs.begin() + *d + 1));
  }

  /// Equality as polynomials (trailing zeros ignored).
  friend bool operator==(const UniPoly& a, const UniPoly& b) {
    const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
    for (std::size_t i = 0; i < n; ++i)
      if (a.coeff(i) != b.coeff(i)) return false;
    return true;
  }
};

inline FieldElem poly_eval(const FieldCtx& f, const UniPoly& p, FieldElem z) {
  FieldElem acc = f.zero();
  for (std::size_t i = p.coeffs.size(); i > 0; --i) acc = f.add(f.mul(acc, z), p.coeffs[i - 1]);
  return acc;
}

inline UniPoly poly_add(const FieldCtx& f, const UniPoly& a, const UniPoly& b) {
  const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
  std::vector<FieldElem> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = f.add(a.coeff(i), b.coeff(i));
  return UniPoly(std::move(c)).trimmed();
}

inline UniPoly poly_scale(const FieldCtx& f, const UniPoly& a, FieldElem s) {
  std::vector<FieldElem> c(a.coeffs.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.mul(a.coeffs[i], s);
  return UniPoly(std::move(c)).trimmed();
}

inline UniPoly poly_mul(const FieldCtx& f, const UniPoly& a, const UniPoly& b) {
  const auto ta = a.trimmed(), tb = b.trimmed();
  if (ta.coeffs.empty() || tb.coeffs.empty()) return UniPoly{};
  std::vector<FieldElem> c(ta.coeffs.size() + tb.coeffs.size() - 1);
  for (std::size_t i = 0; i < ta.coeffs.size(); ++i)
    for (std::size_t j = 0; j < tb.coeffs.size(); ++j)
      c[i + j] = f.add(c[i + j], f.mul(ta.coeffs[i], tb.coeffs[j]));
  return UniPoly(std::move(c)).trimmed();
}

/// Lagrange interpolation: the unique polynomial of degree < points.size()
/// through the given (abscissa, value) pairs.
inline UniPoly poly_interpolate(const FieldCtx& f,
                                std::span<const std::pair<FieldElem, FieldElem>> points) {
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i].first == points[j].first)
        throw std::invalid_argument("interpolate: duplicate abscissa");
  UniPoly result;
  for (std::size_t i = 0; i < points.size(); ++i) {
    UniPoly basis = UniPoly::constant(f.one());
    FieldElem denom = f.one();
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == i) continue;
      // (z - x_j) == (z + x_j) in characteristic 2
      basis = poly_mul(f, basis, UniPoly({points[j].first, f.one()}));
      denom = f.mul(denom, f.sub(points[i].first, points[j].first));
    }
    result = poly_add(f, result, poly_scale(f, basis, f.div(points[i].second, denom)));
  }
  return result;
}

inline UniPoly poly_interpolate(const FieldCtx& f,
                                const std::vector<std::pair<FieldElem, FieldElem>>& points) {
  return poly_interpolate(f, std::span<const std::pair<FieldElem, FieldElem>>(points));
}

/// All elements of a field small enough to enumerate, in encoding order.
inline std::vector<FieldElem> all_elements(const FieldCtx& f) {
  if (f.k() > 24) throw std::length_error("field: too large to enumerate");
  std::vector<FieldElem> out(f.size());
  for (std::uint64_t i = 0; i < f.size(); ++i) out[i] = FieldElem{i};
  return out;
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  if (v == 0) return "0x0";
  std::string s;
  while (v != 0) {
    s.insert(s.begin(), digits[v & 0xf]);
    v >>= 4;
  }
  return "0x" + s;
}

inline std::string to_hex(u128 v) {
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  if (hi == 0) return to_hex(static_cast<std::uint64_t>(v));
  std::string lo = to_hex(static_cast<std::uint64_t>(v)).substr(2);
  return to_hex(hi) + std::string(16 - lo.size(), '0') + lo;
}

inline std::uint64_t from_hex(std::string_view s) {
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  if (s.empty() || s.size() > 16) throw std::invalid_argument("hex: bad length");
  std::uint64_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9')
      d = c - '0';
    else if (c >= 'a' && c <= 'f')
      d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      d = c - 'A' + 10;
    else
      throw std::invalid_argument("hex: bad digit");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

}  // namespace qip
