#include "fracopt/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace fracopt {

// ---- expression parsing -----------------------------------------------------

namespace {

class Tokenizer {
public:
  explicit Tokenizer(const std::string& s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eof() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void advance() { ++pos_; }

  bool try_number(double& out) {
    skip_ws();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) return false;
    // reject a leading sign here; unary minus is handled by the grammar
    if (*begin == '-' || *begin == '+') return false;
    out = v;
    pos_ += end - begin;
    return true;
  }

  bool try_ident(std::string& out) {
    skip_ws();
    std::size_t p = pos_;
    while (p < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[p])) || s_[p] == '_'))
      ++p;
    if (p == pos_) return false;
    out = s_.substr(pos_, p - pos_);
    pos_ = p;
    return true;
  }

  std::size_t position() const { return pos_; }

private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

double Expr::eval(int node, double x1, double x2) const {
  const Node& n = nodes_[node];
  switch (n.op) {
    case Node::Op::Const: return n.value;
    case Node::Op::X1: return x1;
    case Node::Op::X2: return x2;
    case Node::Op::Add: return eval(n.lhs, x1, x2) + eval(n.rhs, x1, x2);
    case Node::Op::Sub: return eval(n.lhs, x1, x2) - eval(n.rhs, x1, x2);
    case Node::Op::Mul: return eval(n.lhs, x1, x2) * eval(n.rhs, x1, x2);
    case Node::Op::Neg: return -eval(n.lhs, x1, x2);
    case Node::Op::Sin: return std::sin(eval(n.lhs, x1, x2));
  }
  return 0.0;
}

double Expr::operator()(double x1, double x2) const { return eval(root_, x1, x2); }

Expr Expr::parse(const std::string& text) {
  Expr e;
  e.text_ = text;
  Tokenizer tok(text);

  auto make = [&](Node n) {
    e.nodes_.push_back(n);
    return static_cast<int>(e.nodes_.size()) - 1;
  };

  // expr := term (('+'|'-') term)* ; term := factor ('*' factor)*
  // factor := number | x1 | x2 | x | y | pi | sin '(' expr ')' | '(' expr ')'
  //         | '-' factor
  std::function<int()> parse_expr;
  std::function<int()> parse_factor = [&]() -> int {
    if (tok.peek() == '-') {
      tok.advance();
      return make({Node::Op::Neg, 0.0, parse_factor(), -1});
    }
    if (tok.peek() == '(') {
      tok.advance();
      const int inner = parse_expr();
      if (tok.peek() != ')') throw ValidationError("expression: missing ')'");
      tok.advance();
      return inner;
    }
    double num;
    if (tok.try_number(num)) return make({Node::Op::Const, num, -1, -1});
    std::string id;
    if (tok.try_ident(id)) {
      if (id == "x1" || id == "x") return make({Node::Op::X1, 0.0, -1, -1});
      if (id == "x2" || id == "y") return make({Node::Op::X2, 0.0, -1, -1});
      if (id == "pi") return make({Node::Op::Const, std::numbers::pi, -1, -1});
      if (id == "sin") {
        if (tok.peek() != '(') throw ValidationError("expression: sin requires '('");
        tok.advance();
        const int inner = parse_expr();
        if (tok.peek() != ')') throw ValidationError("expression: missing ')'");
        tok.advance();
        return make({Node::Op::Sin, 0.0, inner, -1});
      }
      throw ValidationError("expression: unknown identifier '" + id + "'");
    }
    throw ValidationError("expression: unexpected character at position " +
                          std::to_string(tok.position()));
  };
  std::function<int()> parse_term = [&]() -> int {
    int lhs = parse_factor();
    while (tok.peek() == '*') {
      tok.advance();
      lhs = make({Node::Op::Mul, 0.0, lhs, parse_factor()});
    }
    return lhs;
  };
  parse_expr = [&]() -> int {
    int lhs = parse_term();
    while (true) {
      const char c = tok.peek();
      if (c == '+') {
        tok.advance();
        lhs = make({Node::Op::Add, 0.0, lhs, parse_term()});
      } else if (c == '-') {
        tok.advance();
        lhs = make({Node::Op::Sub, 0.0, lhs, parse_term()});
      } else {
        break;
      }
    }
    return lhs;
  };

  e.root_ = parse_expr();
  if (!tok.eof())
    throw ValidationError("expression: trailing input at position " +
                          std::to_string(tok.position()));
  return e;
}

// ---- config files -------------------------------------------------------------

namespace {

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "on" || v == "1") {
    out = true;
    return true;
  }
  if (v == "false" || v == "off" || v == "0") {
    out = false;
    return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

AfemConfig parse_config_text(const std::string& text) {
  AfemConfig cfg;
  bool have_s = false, have_domain = false, have_ud = false;

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError("empty key or value", lineno);

    auto as_double = [&](double& out) {
      char* end = nullptr;
      out = std::strtod(value.c_str(), &end);
      if (end != value.c_str() + value.size())
        throw ParseError("field '" + key + "' expects a number", lineno);
    };
    auto as_int = [&](int& out) {
      double d;
      as_double(d);
      out = static_cast<int>(d);
      if (out != d) throw ParseError("field '" + key + "' expects an integer", lineno);
    };
    auto as_bool = [&](bool& out) {
      if (!parse_bool(value, out))
        throw ParseError("field '" + key + "' expects true/false", lineno);
    };

    if (key == "domain") {
      try {
        cfg.domain = DomainSpec::parse(value);
      } catch (const UnsupportedDomain& e) {
        throw ParseError(e.what(), lineno);
      }
      have_domain = true;
    } else if (key == "s") {
      as_double(cfg.problem.s);
      have_s = true;
    } else if (key == "sigma") {
      as_double(cfg.problem.sigma);
    } else if (key == "nu") {
      as_double(cfg.problem.nu);
    } else if (key == "a") {
      as_double(cfg.problem.a);
    } else if (key == "b") {
      as_double(cfg.problem.b);
    } else if (key == "theta") {
      as_double(cfg.problem.theta);
    } else if (key == "u_d") {
      try {
        const Expr expr = Expr::parse(value);
        cfg.ud_expression = value;
        cfg.problem.u_d = [expr](int, double x, double y) { return expr(x, y); };
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), lineno);
      }
      have_ud = true;
    } else if (key == "max_iterations") {
      as_int(cfg.max_iterations);
    } else if (key == "initial_refinements") {
      as_int(cfg.initial_refinements);
    } else if (key == "enforce_grading") {
      as_bool(cfg.enforce_grading);
    } else if (key == "grading_constant") {
      as_double(cfg.grading_constant);
    } else if (key == "gamma_margin") {
      as_double(cfg.gamma_margin);
    } else if (key == "m_growth") {
      as_double(cfg.m_growth);
    } else if (key == "y_log") {
      if (value == "natural")
        cfg.y_rule_log10 = false;
      else if (value == "log10")
        cfg.y_rule_log10 = true;
      else
        throw ParseError("y_log expects 'natural' or 'log10'", lineno);
    } else if (key == "stars") {
      if (value == "all")
        cfg.interior_stars_only = false;
      else if (value == "interior")
        cfg.interior_stars_only = true;
      else
        throw ParseError("stars expects 'all' or 'interior'", lineno);
    } else if (key == "jobs") {
      as_int(cfg.jobs);
    } else if (key == "vtk") {
      as_bool(cfg.vtk);
    } else if (key == "timing") {
      as_bool(cfg.timing);
    } else if (key == "as_max_iterations") {
      as_int(cfg.as_max_iterations);
    } else {
      throw ParseError("unknown field '" + key + "'", lineno);
    }
  }

  if (!have_s) throw ValidationError("config: field 's' is required");
  if (!have_domain) throw ValidationError("config: field 'domain' is required");
  if (!have_ud) throw ValidationError("config: field 'u_d' is required");
  cfg.validate();
  return cfg;
}

AfemConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_echo(const AfemConfig& c) {
  char buf[128];
  std::ostringstream os;
  auto num = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    os << buf;
  };
  os << "domain = " << c.domain.name() << "\n";
  num("s", c.problem.s);
  num("sigma", c.problem.sigma);
  num("nu", c.problem.nu);
  num("a", c.problem.a);
  num("b", c.problem.b);
  num("theta", c.problem.theta);
  os << "u_d = " << c.ud_expression << "\n";
  os << "max_iterations = " << c.max_iterations << "\n";
  os << "initial_refinements = " << c.initial_refinements << "\n";
  os << "enforce_grading = " << (c.enforce_grading ? "true" : "false") << "\n";
  num("grading_constant", c.grading_constant);
  num("gamma_margin", c.gamma_margin);
  num("m_growth", c.m_growth);
  os << "y_log = " << (c.y_rule_log10 ? "log10" : "natural") << "\n";
  os << "stars = " << (c.interior_stars_only ? "interior" : "all") << "\n";
  os << "jobs = " << c.jobs << "\n";
  os << "vtk = " << (c.vtk ? "true" : "false") << "\n";
  os << "timing = " << (c.timing ? "true" : "false") << "\n";
  os << "as_max_iterations = " << c.as_max_iterations << "\n";
  return os.str();
}

}  // namespace fracopt
