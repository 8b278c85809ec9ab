#pragma once

// A tiny expression language for structural functions of one grid variable.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//
// '^' binds tighter than unary minus and is right-associative, so "-x^2"
// is -(x^2) and "2^3^2" is 2^9.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsfact/error.hpp"
#include "tsfact/grid.hpp"

namespace tsfact {

class ParseError : public Error {
public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
      : Error(format(offset, expected, found)), offset_(offset),
        expected_(std::move(expected)) {}
  ParseError(std::size_t offset, const std::string& message)
      : Error("at byte " + std::to_string(offset) + ": " + message), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
  static std::string format(std::size_t offset, const std::vector<std::string>& expected,
                            const std::string& found) {
    std::string s = "at byte " + std::to_string(offset) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) s += i + 1 == expected.size() ? " or " : ", ";
      s += expected[i];
    }
    return s + ", found " + found;
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Evaluation failure at a grid point (domain error or unbound name).
class EvalError : public PointError {
public:
  using PointError::PointError;
};

struct Expr {
  enum class Kind { number, variable, constant, negate, binary, call };

  Kind kind = Kind::number;
  double value = 0.0; // number
  std::string name;   // constant or function name
  char op = 0;        // binary: + - * / ^
  std::vector<Expr> children;

  static Expr number(double v) { return {Kind::number, v, {}, 0, {}}; }
  static Expr variable() { return {Kind::variable, 0.0, "x", 0, {}}; }
  static Expr constant(std::string n) { return {Kind::constant, 0.0, std::move(n), 0, {}}; }
  static Expr negate(Expr e) { return {Kind::negate, 0.0, {}, 0, {std::move(e)}}; }
  static Expr binary(char op, Expr l, Expr r) {
    return {Kind::binary, 0.0, {}, op, {std::move(l), std::move(r)}};
  }
  static Expr call(std::string fn, std::vector<Expr> args) {
    return {Kind::call, 0.0, std::move(fn), 0, std::move(args)};
  }

  friend bool operator==(const Expr&, const Expr&) = default;
};

/// Names of the built-in functions and their arities.
inline const std::map<std::string, std::size_t>& builtin_functions() {
  static const std::map<std::string, std::size_t> fns{
      {"abs", 1}, {"sqrt", 1}, {"pow", 2}, {"qpow", 2}};
  return fns;
}

inline const std::map<std::string, double>& builtin_constants() {
  static const std::map<std::string, double> c{{"pi", 3.141592653589793},
                                               {"e", 2.718281828459045}};
  return c;
}

namespace detail {

class ExprParser {
public:
  ExprParser(std::string_view src, const std::set<std::string>* known)
      : src_(src), known_(known) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ < src_.size()) fail({"operator", "end of input"});
    return e;
  }

private:
  Expr expr() {
    Expr l = term();
    while (true) {
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        const char op = src_[pos_++];
        l = Expr::binary(op, std::move(l), term());
      } else {
        return l;
      }
    }
  }

  Expr term() {
    Expr l = unary();
    while (true) {
      skip_ws();
      if (peek() == '*' || peek() == '/') {
        const char op = src_[pos_++];
        l = Expr::binary(op, std::move(l), unary());
      } else {
        return l;
      }
    }
  }

  Expr unary() {
    skip_ws();
    if (peek() == '-') {
      ++pos_;
      return Expr::negate(unary());
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      return Expr::binary('^', std::move(base), unary());
    }
    return base;
  }

  Expr primary() {
    skip_ws();
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail({"number", "identifier", "'('", "'-'"});
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_, ++n;
      return n;
    };
    std::size_t nd = digits();
    if (peek() == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) {
      pos_ = start;
      fail({"digit"});
    }
    if (peek() == 'e' || peek() == 'E') {
      const std::size_t save = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (digits() == 0) pos_ = save; // "2e" is 2 followed by constant e
    }
    const std::string text(src_.substr(start, pos_ - start));
    return Expr::number(std::stod(text));
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    skip_ws();
    const auto& fns = builtin_functions();
    if (peek() == '(') {
      const auto it = fns.find(name);
      if (it == fns.end()) throw ParseError(start, "unknown function '" + name + "'");
      ++pos_;
      std::vector<Expr> args;
      args.push_back(expr());
      while (true) {
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          args.push_back(expr());
        } else {
          break;
        }
      }
      expect(')');
      if (args.size() != it->second)
        throw ParseError(start, name + " takes " + std::to_string(it->second) +
                                    " argument(s), got " + std::to_string(args.size()));
      return Expr::call(std::move(name), std::move(args));
    }
    if (fns.count(name)) fail({"'('"});
    if (name == "x") return Expr::variable();
    if (known_ && !builtin_constants().count(name) && !known_->count(name))
      throw ParseError(start, "unknown identifier '" + name + "'");
    return Expr::constant(std::move(name));
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail({std::string("'") + c + "'"});
    ++pos_;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const std::string found =
        pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    throw ParseError(pos_, std::move(expected), found);
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  const std::set<std::string>* known_;
};

} // namespace detail

/// Parse an expression. When `known_constants` is given, any other
/// identifier (besides x, pi, e) is rejected at parse time.
inline Expr parse_expression(std::string_view source,
                             const std::set<std::string>* known_constants = nullptr) {
  return detail::ExprParser(source, known_constants).parse();
}

/// Fully parenthesized text form; numbers keep 17 significant digits.
inline std::string print(const Expr& e) {
  switch (e.kind) {
  case Expr::Kind::number: {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    return buf;
  }
  case Expr::Kind::variable: return "x";
  case Expr::Kind::constant: return e.name;
  case Expr::Kind::negate: return "(-" + print(e.children[0]) + ")";
  case Expr::Kind::binary:
    return "(" + print(e.children[0]) + " " + e.op + " " + print(e.children[1]) + ")";
  case Expr::Kind::call: {
    std::string s = e.name + "(";
    for (std::size_t i = 0; i < e.children.size(); ++i) {
      if (i) s += ", ";
      s += print(e.children[i]);
    }
    return s + ")";
  }
  }
  return {};
}

using ConstantMap = std::map<std::string, double>;

namespace detail {

inline double eval_at(const Expr& e, double x, std::size_t index, const ConstantMap& c) {
  auto fail = [&](const std::string& what) -> double { throw EvalError(what, index, x); };
  auto finite = [&](double v, const char* what) {
    if (!std::isfinite(v)) fail(std::string(what) + " is not finite");
    return v;
  };
  switch (e.kind) {
  case Expr::Kind::number: return e.value;
  case Expr::Kind::variable: return x;
  case Expr::Kind::constant: {
    if (auto it = c.find(e.name); it != c.end()) return it->second;
    if (auto it = builtin_constants().find(e.name); it != builtin_constants().end())
      return it->second;
    return fail("unbound identifier '" + e.name + "'");
  }
  case Expr::Kind::negate: return -eval_at(e.children[0], x, index, c);
  case Expr::Kind::binary: {
    const double l = eval_at(e.children[0], x, index, c);
    const double r = eval_at(e.children[1], x, index, c);
    switch (e.op) {
    case '+': return finite(l + r, "sum");
    case '-': return finite(l - r, "difference");
    case '*': return finite(l * r, "product");
    case '/':
      if (r == 0.0) return fail("division by zero");
      return finite(l / r, "quotient");
    case '^': return finite(std::pow(l, r), "power");
    }
    return fail(std::string("unknown operator ") + e.op);
  }
  case Expr::Kind::call: {
    const double a0 = eval_at(e.children[0], x, index, c);
    if (e.name == "abs") return std::abs(a0);
    if (e.name == "sqrt") {
      if (a0 < 0.0) return fail("sqrt of a negative number");
      return std::sqrt(a0);
    }
    const double a1 = eval_at(e.children[1], x, index, c);
    if (e.name == "pow") return finite(std::pow(a0, a1), "pow");
    if (e.name == "qpow") {
      if (!(a0 > 0.0)) return fail("qpow needs a positive base");
      return finite(std::pow(a0, a1), "qpow");
    }
    return fail("unknown function '" + e.name + "'");
  }
  }
  return fail("malformed expression");
}

} // namespace detail

/// Value at a single point; `index` is only used in error reports.
inline double evaluate(const Expr& e, double x, const ConstantMap& constants = {},
                       std::size_t index = 0) {
  return detail::eval_at(e, x, index, constants);
}

/// Pointwise values on the grid. With `kappa_only` the top point, which has
/// no mass, is set to 0 instead of evaluated.
inline std::vector<double> evaluate_on_grid(const Expr& e, const TimeScaleGrid& grid,
                                            const ConstantMap& constants = {},
                                            bool kappa_only = false) {
  std::vector<double> out(grid.size(), 0.0);
  const std::size_t n = kappa_only ? grid.size() - 1 : grid.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = evaluate(e, grid[i], constants, i);
  return out;
}

} // namespace tsfact
