#pragma once

// Prenex quantified Boolean formulas: parsing, printing, brute-force
// evaluation and arithmetization over a commutative ring of characteristic 2.
//
// Grammar (whitespace insignificant):
//   formula     := quantprefix ':' expr
//   quantprefix := (('E' | 'A') var)+
//   var         := 'x' digits
//   expr        := term ('|' term)*
//   term        := factor ('&' factor)*
//   factor      := '~' factor | var | '(' expr ')'

#include "qip/gf2k.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qip {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                           ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

struct BoolExpr {
  enum class Kind { Var, Not, And, Or };

  Kind kind = Kind::Var;
  unsigned var = 0;  // 1-based, Var nodes only
  std::shared_ptr<const BoolExpr> lhs, rhs;

  static BoolExpr variable(unsigned index) {
    BoolExpr e;
    e.kind = Kind::Var;
    e.var = index;
    return e;
  }
  static BoolExpr negate(BoolExpr child) {
    BoolExpr e;
    e.kind = Kind::Not;
    e.lhs = std::make_shared<const BoolExpr>(std::move(child));
    return e;
  }
  static BoolExpr conj(BoolExpr a, BoolExpr b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static BoolExpr disj(BoolExpr a, BoolExpr b) { return binary(Kind::Or, std::move(a), std::move(b)); }

  unsigned max_var() const {
    switch (kind) {
      case Kind::Var: return var;
      case Kind::Not: return lhs->max_var();
      default: return std::max(lhs->max_var(), rhs->max_var());
    }
  }

  friend bool operator==(const BoolExpr& a, const BoolExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Var: return a.var == b.var;
      case Kind::Not: return *a.lhs == *b.lhs;
      default: return *a.lhs == *b.lhs && *a.rhs == *b.rhs;
    }
  }

 private:
  static BoolExpr binary(Kind k, BoolExpr a, BoolExpr b) {
    BoolExpr e;
    e.kind = k;
    e.lhs = std::make_shared<const BoolExpr>(std::move(a));
    e.rhs = std::make_shared<const BoolExpr>(std::move(b));
    return e;
  }
};

enum class Quantifier { Exists, Forall };

struct PrenexQbf {
  std::vector<Quantifier> quantifiers;  // quantifiers[t-1] binds x_t
  BoolExpr matrix;
  std::size_t length = 0;  // number of symbols in the source text

  unsigned n() const { return static_cast<unsigned>(quantifiers.size()); }

  friend bool operator==(const PrenexQbf& a, const PrenexQbf& b) {
    return a.quantifiers == b.quantifiers && a.matrix == b.matrix;
  }
};

namespace detail {

class QbfParser {
 public:
  explicit QbfParser(std::string_view text) : text_(text) {}

  PrenexQbf parse() {
    PrenexQbf q;
    skip_ws();
    while (peek() == 'E' || peek() == 'A') {
      const auto kind = peek() == 'E' ? Quantifier::Exists : Quantifier::Forall;
      advance();
      ++symbols_;
      skip_ws();
      const auto [line, col] = position();
      const unsigned index = parse_var_index();
      if (index <= q.quantifiers.size())
        throw ParseError("variable x" + std::to_string(index) + " is bound more than once", line, col);
      if (index != q.quantifiers.size() + 1)
        throw ParseError("quantifier prefix must bind x1..xn in order; expected x" +
                             std::to_string(q.quantifiers.size() + 1),
                         line, col);
      q.quantifiers.push_back(kind);
      skip_ws();
    }
    if (q.quantifiers.empty()) fail("expected quantifier 'E' or 'A'");
    expect(':');
    n_ = q.n();
    q.matrix = parse_or();
    skip_ws();
    if (!at_end()) {
      if (peek() == 'E' || peek() == 'A') fail("quantifier inside the matrix; only prenex form is accepted");
      fail(std::string("unexpected character '") + peek() + "'");
    }
    q.length = symbols_;
    return q;
  }

 private:
  BoolExpr parse_or() {
    BoolExpr e = parse_and();
    for (skip_ws(); peek() == '|'; skip_ws()) {
      advance();
      ++symbols_;
      e = BoolExpr::disj(std::move(e), parse_and());
    }
    return e;
  }

  BoolExpr parse_and() {
    BoolExpr e = parse_factor();
    for (skip_ws(); peek() == '&'; skip_ws()) {
      advance();
      ++symbols_;
      e = BoolExpr::conj(std::move(e), parse_factor());
    }
    return e;
  }

  BoolExpr parse_factor() {
    skip_ws();
    const char c = peek();
    if (c == '~') {
      advance();
      ++symbols_;
      return BoolExpr::negate(parse_factor());
    }
    if (c == '(') {
      advance();
      ++symbols_;
      BoolExpr e = parse_or();
      expect(')');
      return e;
    }
    if (c == 'x') {
      const auto [line, col] = position();
      const unsigned index = parse_var_index();
      if (index == 0 || index > n_)
        throw ParseError("unbound variable x" + std::to_string(index), line, col);
      return BoolExpr::variable(index);
    }
    if (c == 'E' || c == 'A') fail("quantifier inside the matrix; only prenex form is accepted");
    if (at_end()) fail("unexpected end of input");
    fail(std::string("unexpected character '") + c + "'");
  }

  unsigned parse_var_index() {
    if (peek() != 'x') fail("expected variable 'x<digits>'");
    advance();
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digits after 'x'");
    unsigned long value = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + static_cast<unsigned long>(peek() - '0');
      if (value > 1'000'000) fail("variable index too large");
      advance();
    }
    ++symbols_;
    return static_cast<unsigned>(value);
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
    ++symbols_;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::pair<std::size_t, std::size_t> position() const { return {line_, col_}; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  std::string_view text_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
  std::size_t symbols_ = 0;
  unsigned n_ = 0;
};

inline int precedence(BoolExpr::Kind k) {
  switch (k) {
    case BoolExpr::Kind::Or: return 1;
    case BoolExpr::Kind::And: return 2;
    default: return 3;
  }
}

inline void print_expr(const BoolExpr& e, std::string& out) {
  using K = BoolExpr::Kind;
  auto child = [&out](const BoolExpr& c, bool parens) {
    if (parens) out += '(';
    print_expr(c, out);
    if (parens) out += ')';
  };
  switch (e.kind) {
    case K::Var: out += "x" + std::to_string(e.var); break;
    case K::Not:
      out += '~';
      child(*e.lhs, precedence(e.lhs->kind) < 3);
      break;
    case K::And:
    case K::Or: {
      const int p = precedence(e.kind);
      child(*e.lhs, precedence(e.lhs->kind) < p);
      out += e.kind == K::And ? " & " : " | ";
      // left-associative: an equal-precedence right child needs parentheses
      child(*e.rhs, precedence(e.rhs->kind) <= p);
      break;
    }
  }
}

}  // namespace detail

inline PrenexQbf parse_qbf(std::string_view text) { return detail::QbfParser(text).parse(); }

inline std::string print_expr(const BoolExpr& e) {
  std::string out;
  detail::print_expr(e, out);
  return out;
}

inline std::string print_qbf(const PrenexQbf& q) {
  std::string out;
  for (unsigned t = 1; t <= q.n(); ++t) {
    out += q.quantifiers[t - 1] == Quantifier::Exists ? "E" : "A";
    out += " x" + std::to_string(t) + " ";
  }
  out += ": ";
  out += print_expr(q.matrix);
  return out;
}

/// Boolean value of the matrix; assignment[t-1] is the value of x_t (0 or 1).
inline bool eval_bool(const BoolExpr& e, std::span<const std::uint8_t> assignment) {
  using K = BoolExpr::Kind;
  switch (e.kind) {
    case K::Var:
      if (e.var == 0 || e.var > assignment.size())
        throw std::out_of_range("eval: no value for x" + std::to_string(e.var));
      return assignment[e.var - 1] != 0;
    case K::Not: return !eval_bool(*e.lhs, assignment);
    case K::And: return eval_bool(*e.lhs, assignment) && eval_bool(*e.rhs, assignment);
    case K::Or: return eval_bool(*e.lhs, assignment) || eval_bool(*e.rhs, assignment);
  }
  return false;
}

/// Truth value by exhaustive recursion over the quantifier prefix.
inline bool eval_qbf(const PrenexQbf& q) {
  std::vector<std::uint8_t> bits(q.n());
  auto rec = [&](auto&& self, unsigned t) -> bool {
    if (t == q.n()) return eval_bool(q.matrix, bits);
    bits[t] = 0;
    const bool v0 = self(self, t + 1);
    if (q.quantifiers[t] == Quantifier::Exists && v0) return true;
    if (q.quantifiers[t] == Quantifier::Forall && !v0) return false;
    bits[t] = 1;
    return self(self, t + 1);
  };
  return rec(rec, 0);
}

/// Arithmetic over GF(2^k) as a characteristic-2 ring.
struct FieldRing {
  using value_type = FieldElem;
  const FieldCtx* field;

  FieldElem zero() const { return field->zero(); }
  FieldElem one() const { return field->one(); }
  FieldElem add(FieldElem a, FieldElem b) const { return field->add(a, b); }
  FieldElem mul(FieldElem a, FieldElem b) const { return field->mul(a, b); }
};

/// Univariate polynomials over GF(2^k).
struct PolyRing {
  using value_type = UniPoly;
  const FieldCtx* field;

  UniPoly zero() const { return UniPoly{}; }
  UniPoly one() const { return UniPoly::constant(field->one()); }
  UniPoly add(const UniPoly& a, const UniPoly& b) const { return poly_add(*field, a, b); }
  UniPoly mul(const UniPoly& a, const UniPoly& b) const { return poly_mul(*field, a, b); }
};

/// A(x)=x, A(~a)=1+A(a), A(a&b)=A(a)A(b), A(a|b)=A(a)+A(b)+A(a)A(b).
template <class Ring>
typename Ring::value_type arith_eval(const BoolExpr& e,
                                     std::span<const typename Ring::value_type> assignment,
                                     const Ring& ring) {
  using K = BoolExpr::Kind;
  switch (e.kind) {
    case K::Var:
      if (e.var == 0 || e.var > assignment.size())
        throw std::out_of_range("arith_eval: no value for x" + std::to_string(e.var));
      return assignment[e.var - 1];
    case K::Not: return ring.add(ring.one(), arith_eval(*e.lhs, assignment, ring));
    case K::And: return ring.mul(arith_eval(*e.lhs, assignment, ring), arith_eval(*e.rhs, assignment, ring));
    case K::Or: {
      auto a = arith_eval(*e.lhs, assignment, ring);
      auto b = arith_eval(*e.rhs, assignment, ring);
      auto ab = ring.mul(a, b);
      return ring.add(ring.add(a, b), ab);
    }
  }
  throw std::logic_error("arith_eval: bad node");
}

inline FieldElem arith_eval(const BoolExpr& e, std::span<const FieldElem> assignment, const FieldCtx& f) {
  return arith_eval(e, assignment, FieldRing{&f});
}

struct DegreeProfile {
  std::vector<unsigned> per_variable;  // per_variable[t-1] = deg_{x_t} A(B)
  unsigned d = 2;                      // max(2, max_t per_variable)
};

inline unsigned structural_degree(const BoolExpr& e, unsigned t) {
  using K = BoolExpr::Kind;
  switch (e.kind) {
    case K::Var: return e.var == t ? 1 : 0;
    case K::Not: return structural_degree(*e.lhs, t);
    default: return structural_degree(*e.lhs, t) + structural_degree(*e.rhs, t);
  }
}

inline DegreeProfile degree_profile(const PrenexQbf& q) {
  DegreeProfile p;
  p.per_variable.resize(q.n());
  for (unsigned t = 1; t <= q.n(); ++t) {
    p.per_variable[t - 1] = structural_degree(q.matrix, t);
    p.d = std::max(p.d, p.per_variable[t - 1]);
  }
  return p;
}

}  // namespace qip
