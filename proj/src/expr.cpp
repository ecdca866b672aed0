#include "erglab/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "erglab/common.hpp"

namespace erglab {

struct Expression::Node {
  enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
  long double value = 0;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;

  long double eval(long double x) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::Var: return x;
      case Kind::Neg: return -args[0]->eval(x);
      case Kind::Add: return args[0]->eval(x) + args[1]->eval(x);
      case Kind::Sub: return args[0]->eval(x) - args[1]->eval(x);
      case Kind::Mul: return args[0]->eval(x) * args[1]->eval(x);
      case Kind::Div: return args[0]->eval(x) / args[1]->eval(x);
      case Kind::Pow: return std::pow(args[0]->eval(x), args[1]->eval(x));
      case Kind::Call: return call(x);
    }
    return NAN;
  }

  long double call(long double x) const {
    long double a = args[0]->eval(x);
    if (fn == "log" || fn == "ln") return std::log(a);
    if (fn == "log2") return std::log2(a);
    if (fn == "log10") return std::log10(a);
    if (fn == "exp") return std::exp(a);
    if (fn == "sqrt") return std::sqrt(a);
    if (fn == "abs") return std::fabs(a);
    if (fn == "floor") return std::floor(a);
    if (fn == "ceil") return std::ceil(a);
    if (fn == "sin") return std::sin(a);
    if (fn == "cos") return std::cos(a);
    if (fn == "tan") return std::tan(a);
    long double b = args[1]->eval(x);
    if (fn == "pow") return std::pow(a, b);
    if (fn == "min") return std::min(a, b);
    if (fn == "max") return std::max(a, b);
    return NAN;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, std::vector<NodePtr> args = {}, long double v = 0, std::string fn = {}) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->args = std::move(args);
  n->value = v;
  n->fn = std::move(fn);
  return n;
}

int arity(const std::string& fn) {
  static const char* one[] = {"log", "ln", "log2", "log10", "exp", "sqrt", "abs", "floor", "ceil", "sin", "cos", "tan"};
  for (const char* f : one)
    if (fn == f) return 1;
  if (fn == "pow" || fn == "min" || fn == "max") return 2;
  return -1;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make(Kind::Add, {lhs, term()});
      else if (eat('-'))
        lhs = make(Kind::Sub, {lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = make(Kind::Mul, {lhs, unary()});
      else if (eat('/'))
        lhs = make(Kind::Div, {lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Kind::Neg, {unary()});
    if (eat('+')) return unary();
    return power();
  }

  // Right-associative; binds tighter than unary minus on its left operand.
  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) return make(Kind::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      long double v = std::stold(s_.substr(pos_), &used);
      pos_ += used;
      return make(Kind::Number, {}, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      if (id == "x" || id == "n" || id == "t" || id == "y") return make(Kind::Var);
      if (id == "pi") return make(Kind::Number, {}, std::numbers::pi_v<long double>);
      if (id == "e") return make(Kind::Number, {}, std::numbers::e_v<long double>);
      int ar = arity(id);
      if (ar < 0) fail("unknown identifier '" + id + "'");
      if (!eat('(')) fail("expected '(' after " + id);
      std::vector<NodePtr> args{expr()};
      for (int i = 1; i < ar; ++i) {
        if (!eat(',')) fail("expected ',' in call to " + id);
        args.push_back(expr());
      }
      if (!eat(')')) fail("missing ')' in call to " + id);
      return make(Kind::Call, std::move(args), 0, id);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text).parse()) {}

long double Expression::operator()(long double x) const {
  if (!root_) throw ConfigError("empty expression");
  return root_->eval(x);
}

}  // namespace erglab
