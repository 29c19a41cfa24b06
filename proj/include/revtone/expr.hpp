#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace revtone::expr {

/// Parse failure with the 1-based column of the offending character.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t column, const std::string& what)
      : std::runtime_error("column " + std::to_string(column) + ": " + what), column_(column), message_(what) {}
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t column_;
  std::string message_;
};

using Fn = std::function<double(double)>;

namespace detail {

// Recursive descent over
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | variable | 'pi' | func '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view src, char variable) : src_(src), var_(variable) {}

  Fn parse() {
    Fn f = expression();
    skip();
    if (pos_ < src_.size()) error("unexpected '" + std::string(1, src_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void error(const std::string& what) const { throw ParseError(pos_ + 1, what); }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Fn expression() {
    Fn lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = [l = lhs, r = term()](double x) { return l(x) + r(x); };
      } else if (accept('-')) {
        lhs = [l = lhs, r = term()](double x) { return l(x) - r(x); };
      } else {
        return lhs;
      }
    }
  }

  Fn term() {
    Fn lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = [l = lhs, r = unary()](double x) { return l(x) * r(x); };
      } else if (accept('/')) {
        lhs = [l = lhs, r = unary()](double x) { return l(x) / r(x); };
      } else {
        return lhs;
      }
    }
  }

  Fn unary() {
    if (accept('-')) return [f = unary()](double x) { return -f(x); };
    if (accept('+')) return unary();
    return power();
  }

  Fn power() {
    Fn base = primary();
    if (accept('^')) return [b = base, e = unary()](double x) { return std::pow(b(x), e(x)); };
    return base;
  }

  Fn primary() {
    skip();
    if (pos_ >= src_.size()) error("unexpected end of expression");
    const char ch = src_[pos_];
    if (ch == '(') {
      ++pos_;
      Fn inner = expression();
      if (!accept(')')) error("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const std::string_view word = src_.substr(start, pos_ - start);
      if (word.size() == 1 && word[0] == var_) return [](double x) { return x; };
      if (word == "pi") return [](double) { return std::numbers::pi; };
      double (*fn)(double) = nullptr;
      if (word == "sin") fn = [](double x) { return std::sin(x); };
      else if (word == "cos") fn = [](double x) { return std::cos(x); };
      else if (word == "exp") fn = [](double x) { return std::exp(x); };
      if (!fn) {
        pos_ = start;
        error("unknown identifier '" + std::string(word) + "' (variable is '" + std::string(1, var_) + "')");
      }
      if (!accept('(')) error("expected '(' after " + std::string(word));
      Fn arg = expression();
      if (!accept(')')) error("expected ')'");
      return [fn, arg](double x) { return fn(arg(x)); };
    }
    error("unexpected '" + std::string(1, ch) + "'");
  }

  Fn number() {
    const std::string rest(src_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      error("malformed number");
    }
    pos_ += used;
    return [v](double) { return v; };
  }

  std::string_view src_;
  char var_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Compiles an arithmetic expression in one variable into a callable.
inline Fn parse(std::string_view source, char variable) { return detail::Parser(source, variable).parse(); }

}  // namespace revtone::expr
