#include "expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <utility>

namespace srlab::expr {
namespace {

struct Node {
  virtual ~Node() = default;
  virtual double eval(const Eigen::VectorXd& x) const = 0;
};
using NodePtr = std::shared_ptr<const Node>;

struct Num final : Node {
  double v;
  explicit Num(double value) : v(value) {}
  double eval(const Eigen::VectorXd&) const override { return v; }
};

struct Var final : Node {
  int idx;
  explicit Var(int i) : idx(i) {}
  double eval(const Eigen::VectorXd& x) const override { return x[idx]; }
};

struct Neg final : Node {
  NodePtr a;
  explicit Neg(NodePtr n) : a(std::move(n)) {}
  double eval(const Eigen::VectorXd& x) const override { return -a->eval(x); }
};

struct Bin final : Node {
  char op;
  NodePtr a, b;
  Bin(char o, NodePtr l, NodePtr r) : op(o), a(std::move(l)), b(std::move(r)) {}
  double eval(const Eigen::VectorXd& x) const override {
    const double l = a->eval(x), r = b->eval(x);
    switch (op) {
      case '+': return l + r;
      case '-': return l - r;
      case '*': return l * r;
      case '/': return l / r;
      default: return std::pow(l, r);
    }
  }
};

struct Fun final : Node {
  double (*f)(double);
  NodePtr a;
  Fun(double (*fn)(double), NodePtr n) : f(fn), a(std::move(n)) {}
  double eval(const Eigen::VectorXd& x) const override { return f(a->eval(x)); }
};

double (*lookup_function(const std::string& name))(double) {
  if (name == "sin") return std::sin;
  if (name == "cos") return std::cos;
  if (name == "tan") return std::tan;
  if (name == "asin") return std::asin;
  if (name == "acos") return std::acos;
  if (name == "atan") return std::atan;
  if (name == "sinh") return std::sinh;
  if (name == "cosh") return std::cosh;
  if (name == "tanh") return std::tanh;
  if (name == "exp") return std::exp;
  if (name == "log") return std::log;
  if (name == "sqrt") return std::sqrt;
  if (name == "abs") return std::fabs;
  return nullptr;
}

class Parser {
 public:
  Parser(const std::string& text, int dim, int* max_var)
      : s_(text), dim_(dim), max_var_(max_var) {}

  NodePtr parse() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("bad expression '" + s_ + "' at position " + std::to_string(pos_) + ": " +
                     why);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr e = term();
    for (;;) {
      if (consume('+')) {
        e = std::make_shared<Bin>('+', e, term());
      } else if (consume('-')) {
        e = std::make_shared<Bin>('-', e, term());
      } else {
        return e;
      }
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (consume('*')) {
        e = std::make_shared<Bin>('*', e, unary());
      } else if (consume('/')) {
        e = std::make_shared<Bin>('/', e, unary());
      } else {
        return e;
      }
    }
  }

  NodePtr unary() {
    if (consume('-')) return std::make_shared<Neg>(unary());
    if (consume('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (consume('^')) return std::make_shared<Bin>('^', base, unary());  // right-assoc
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected operand");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    return std::make_shared<Num>(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name == "pi") return std::make_shared<Num>(3.14159265358979323846);
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits) {
        const int idx = std::atoi(name.c_str() + 1);
        if (idx >= dim_) fail("variable " + name + " out of range (dim " + std::to_string(dim_) + ")");
        if (max_var_ && idx > *max_var_) *max_var_ = idx;
        return std::make_shared<Var>(idx);
      }
    }
    if (auto* f = lookup_function(name)) {
      if (!consume('(')) fail("expected '(' after " + name);
      NodePtr arg = expression();
      if (!consume(')')) fail("missing ')' after argument of " + name);
      return std::make_shared<Fun>(f, arg);
    }
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int dim_;
  int* max_var_;
};

// Splits "(a, b, ...)" on top-level commas; whole string must be one tuple.
std::vector<std::string> split_tuple(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i >= text.size() || text[i] != '(') throw ParseError("tuple must start with '(': " + text);
  std::size_t j = text.size();
  while (j > i && std::isspace(static_cast<unsigned char>(text[j - 1]))) --j;
  if (j == i || text[j - 1] != ')') throw ParseError("tuple must end with ')': " + text);
  const std::string body = text.substr(i + 1, j - i - 2);
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

Scalar compile(const std::string& text, int dim) {
  NodePtr root = Parser(text, dim, nullptr).parse();
  return [root](const Eigen::VectorXd& x) { return root->eval(x); };
}

std::vector<Scalar> compile_tuple(const std::string& text, int dim) {
  std::vector<Scalar> out;
  for (const auto& part : split_tuple(text)) out.push_back(compile(part, dim));
  return out;
}

int tuple_arity(const std::string& text) {
  return static_cast<int>(split_tuple(text).size());
}

int max_var_index(const std::string& text) {
  int max_var = -1;
  for (const auto& part : split_tuple(text)) Parser(part, 1 << 20, &max_var).parse();
  return max_var;
}

}  // namespace srlab::expr
