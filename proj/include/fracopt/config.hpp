#ifndef FRACOPT_CONFIG_HPP
#define FRACOPT_CONFIG_HPP

#include <string>
#include <vector>

#include "fracopt/afem.hpp"

namespace fracopt {

// Tiny expression language for desired-state fields: numbers, x1/x2 (aliases
// x/y), pi, sin(...), unary minus, sums and products.
class Expr {
public:
  static Expr parse(const std::string& text);
  double operator()(double x1, double x2) const;
  const std::string& text() const { return text_; }

private:
  struct Node {
    enum class Op { Const, X1, X2, Add, Sub, Mul, Neg, Sin };
    Op op;
    double value = 0.0;
    int lhs = -1, rhs = -1;
  };
  double eval(int node, double x1, double x2) const;

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// Key = value configuration. Unknown keys and malformed values raise
// ParseError with the offending line; violated invariants raise
// ValidationError naming the field.
AfemConfig parse_config_text(const std::string& text);
AfemConfig parse_config_file(const std::string& path);

// Canonical echo of a configuration (stable key order).
std::string config_echo(const AfemConfig& config);

}  // namespace fracopt

#endif
