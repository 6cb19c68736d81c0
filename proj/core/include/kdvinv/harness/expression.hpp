#pragma once

#include <map>
#include <memory>
#include <string>

namespace kdvinv::harness {

using Parameters = std::map<std::string, double>;

// Analytic data in the variables t and x:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
// Names are t, x, pi, e and the keys of the parameter map; functions are
// sin, cos, tan, exp, log, sqrt, sinh, cosh, tanh and abs. Parameters are
// bound at parse time.
class Expression {
public:
  // Throws ConfigError with the offending position on malformed text.
  static Expression parse(const std::string& text, const Parameters& params = {});
  static Expression constant(double c);

  double operator()(double t, double x) const;
  bool uses_t() const { return uses_t_; }
  bool uses_x() const { return uses_x_; }
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  bool uses_t_ = false;
  bool uses_x_ = false;
};

}  // namespace kdvinv::harness
