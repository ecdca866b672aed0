#pragma once

#include <memory>
#include <string>

namespace erglab {

// Arithmetic expression in one variable, parsed once and evaluated many times.
// Grammar: + - * / ^, unary minus, parentheses, numbers, constants pi and e, the variable
// (named by the caller, default "x"; "n" and "t" are accepted as aliases) and the functions
// log ln log2 log10 exp sqrt abs floor ceil sin cos tan pow(a,b) min(a,b) max(a,b).
class Expression {
 public:
  Expression() = default;
  explicit Expression(const std::string& text);
  long double operator()(long double x) const;
  const std::string& text() const { return text_; }
  bool empty() const { return !root_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace erglab
