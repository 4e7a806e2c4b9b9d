#pragma once

// Analytic soundness quantities of the 2-round protocol.

#include "qip/rational.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace qip {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

/// theta_S(f) = (1/|S|) (sum_s sqrt f(s))^2.
inline double theta(std::span<const double> f) {
  if (f.empty()) throw std::invalid_argument("theta: empty set");
  double acc = 0;
  for (double v : f) {
    if (v < 0 || std::isnan(v)) throw std::invalid_argument("theta: negative value");
    acc += std::sqrt(v);
  }
  return acc * acc / static_cast<double>(f.size());
}

struct ThetaCheck {
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};

/// Compares theta(lambda f + (1-lambda) g) with 1 - lambda r + 2 sqrt(1-r),
/// r the fraction of points where f vanishes.
inline ThetaCheck lemma_theta_check(std::span<const double> f, std::span<const double> g, double lambda) {
  constexpr double kSlack = 1e-12;
  if (f.empty() || f.size() != g.size()) throw std::invalid_argument("lemma check: f and g need one common nonempty domain");
  if (!(lambda >= 0 && lambda <= 1)) throw std::invalid_argument("lemma check: lambda outside [0,1]");
  double sf = 0, sg = 0;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 0 || g[i] < 0) throw std::invalid_argument("lemma check: negative value");
    sf += f[i];
    sg += g[i];
    zeros += f[i] == 0 ? 1 : 0;
  }
  if (sf > 1 + kSlack || sg > 1 + kSlack) throw std::invalid_argument("lemma check: mass exceeds 1");
  std::vector<double> mix(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) mix[i] = lambda * f[i] + (1 - lambda) * g[i];
  const double r = static_cast<double>(zeros) / static_cast<double>(f.size());
  ThetaCheck out;
  out.lhs = theta(mix);
  out.rhs = 1 - lambda * r + 2 * std::sqrt(1 - r);
  out.holds = out.lhs <= out.rhs + kSlack;
  return out;
}

struct BuProbability {
  Rational exact;      // 1 - (1 - 1/N)^m
  double lower = 0;    // 1 - e^{-m/N}
  bool exceeds_lower = false;
};

/// Probability that a uniform u in {1..N}^m agrees with a fixed v in at
/// least one coordinate.
inline BuProbability b_u_probability(std::uint64_t N, std::uint64_t m) {
  if (N < 1) throw std::invalid_argument("b_u_probability: N must be positive");
  Rational miss(BigInt(N - 1), BigInt(N));
  Rational p = 1;
  for (std::uint64_t i = 0; i < m; ++i) p *= miss;
  BuProbability out;
  out.exact = 1 - p;
  BigFloat lower = 1 - boost::multiprecision::exp(-BigFloat(m) / BigFloat(N));
  out.lower = lower.convert_to<double>();
  out.exceeds_lower = BigFloat(out.exact) > lower;
  return out;
}

struct BoundParams {
  std::uint64_t n = 1;
  std::uint64_t d = 2;
  std::uint64_t N = 2;
  std::uint64_t m = 1;
  std::uint64_t k = 1;

  BigFloat dm_over_field() const {
    return BigFloat(d) * BigFloat(m) * boost::multiprecision::pow(BigFloat(2), -BigFloat(k));
  }
  BigFloat exp_m_over_N() const { return boost::multiprecision::exp(-BigFloat(m) / BigFloat(N)); }
};

/// 1 - (1 - e^{-m/N})(1 - dm 2^-k) + 2 sqrt(dm 2^-k).
inline BigFloat soundness_bound(const BoundParams& p) {
  if (p.d == 0 || p.N == 0 || p.m == 0 || p.k == 0) throw std::invalid_argument("bound: parameters must be positive");
  const BigFloat eps = p.dm_over_field();
  return 1 - (1 - p.exp_m_over_N()) * (1 - eps) + 2 * boost::multiprecision::sqrt(eps);
}

inline bool is_vacuous(const BigFloat& bound) { return bound >= 1; }

struct ChosenParams {
  std::uint64_t m = 0;
  std::uint64_t k = 0;
};

inline std::uint64_t ceil_log2(std::uint64_t v) {
  if (v == 0) throw std::invalid_argument("ceil_log2: zero");
  std::uint64_t e = 0;
  while ((std::uint64_t{1} << e) < v) ++e;
  return e;
}

/// m = (|x|+1) N and k = 2|x| + 6 + ceil(log2(d m)).
inline ChosenParams choose_params(std::uint64_t x_len, std::uint64_t d, std::uint64_t N) {
  if (x_len == 0 || d == 0 || N == 0) throw std::invalid_argument("choose_params: inputs must be positive");
  ChosenParams c;
  c.m = (x_len + 1) * N;
  c.k = 2 * x_len + 6 + ceil_log2(d * c.m);
  return c;
}

inline std::string to_string(const BigFloat& v, int digits = 20) {
  return v.str(digits, std::ios_base::scientific);
}

}  // namespace qip
