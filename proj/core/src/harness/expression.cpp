#include "kdvinv/harness/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "kdvinv/errors.hpp"

namespace kdvinv::harness {

struct Expression::Node {
  enum class Kind { number, t, x, add, sub, mul, div, pow, neg, call };
  Kind kind = Kind::number;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(Node::Kind kind, double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->value = value;
  return n;
}

NodePtr binary(Node::Kind kind, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = {std::move(a), std::move(b)};
  return n;
}

double (*function_named(const std::string& name))(double) {
  static const std::map<std::string, double (*)(double)> table = {
      {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
      {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
      {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
      {"sinh", [](double v) { return std::sinh(v); }}, {"cosh", [](double v) { return std::cosh(v); }},
      {"tanh", [](double v) { return std::tanh(v); }}, {"abs", [](double v) { return std::abs(v); }},
  };
  const auto it = table.find(name);
  return it == table.end() ? nullptr : it->second;
}

class Parser {
public:
  Parser(const std::string& text, const Parameters& params) : s_(text), params_(params) {}

  NodePtr run() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

  bool uses_t = false;
  bool uses_x = false;

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr a = term();
    for (;;) {
      if (accept('+')) {
        a = binary(Node::Kind::add, a, term());
      } else if (accept('-')) {
        a = binary(Node::Kind::sub, a, term());
      } else {
        return a;
      }
    }
  }

  NodePtr term() {
    NodePtr a = unary();
    for (;;) {
      if (accept('*')) {
        a = binary(Node::Kind::mul, a, unary());
      } else if (accept('/')) {
        a = binary(Node::Kind::div, a, unary());
      } else {
        return a;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::neg;
      n->args = {unary()};
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary(Node::Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return leaf(Node::Kind::number, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (accept('(')) {
        auto fn = function_named(name);
        if (!fn) fail("unknown function '" + name + "'");
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::call;
        n->fn = fn;
        n->args = {expr()};
        if (!accept(')')) fail("missing ')'");
        return n;
      }
      if (name == "t") {
        uses_t = true;
        return leaf(Node::Kind::t);
      }
      if (name == "x") {
        uses_x = true;
        return leaf(Node::Kind::x);
      }
      if (const auto it = params_.find(name); it != params_.end()) return leaf(Node::Kind::number, it->second);
      if (name == "pi") return leaf(Node::Kind::number, std::numbers::pi);
      if (name == "e") return leaf(Node::Kind::number, std::numbers::e);
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  const Parameters& params_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, double t, double x) {
  switch (n.kind) {
    case Node::Kind::number:
      return n.value;
    case Node::Kind::t:
      return t;
    case Node::Kind::x:
      return x;
    case Node::Kind::add:
      return eval(*n.args[0], t, x) + eval(*n.args[1], t, x);
    case Node::Kind::sub:
      return eval(*n.args[0], t, x) - eval(*n.args[1], t, x);
    case Node::Kind::mul:
      return eval(*n.args[0], t, x) * eval(*n.args[1], t, x);
    case Node::Kind::div:
      return eval(*n.args[0], t, x) / eval(*n.args[1], t, x);
    case Node::Kind::pow: {
      const double base = eval(*n.args[0], t, x);
      const double ex = eval(*n.args[1], t, x);
      // Integer exponents by repeated multiplication keep negative bases valid.
      if (ex == std::round(ex) && std::abs(ex) <= 64.0) {
        double r = 1.0;
        for (int i = 0; i < static_cast<int>(std::abs(ex)); ++i) r *= base;
        return ex < 0.0 ? 1.0 / r : r;
      }
      return std::pow(base, ex);
    }
    case Node::Kind::neg:
      return -eval(*n.args[0], t, x);
    case Node::Kind::call:
      return n.fn(eval(*n.args[0], t, x));
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text, const Parameters& params) {
  Parser p(text, params);
  Expression e;
  e.root_ = p.run();
  e.text_ = text;
  e.uses_t_ = p.uses_t;
  e.uses_x_ = p.uses_x;
  return e;
}

Expression Expression::constant(double c) {
  Expression e;
  e.root_ = leaf(Node::Kind::number, c);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  e.text_ = buf;
  return e;
}

double Expression::operator()(double t, double x) const { return eval(*root_, t, x); }

}  // namespace kdvinv::harness
