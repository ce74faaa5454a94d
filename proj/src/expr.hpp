#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace srlab::expr {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Compiled scalar expression in variables x0..x{dim-1}.  Supports + - * / ^,
// parentheses, the constant pi, and sin cos tan asin acos atan sinh cosh tanh
// exp log sqrt abs.
using Scalar = std::function<double(const Eigen::VectorXd&)>;

Scalar compile(const std::string& text, int dim);

// "(e1, e2, ...)" -> component expressions (top-level commas split).
std::vector<Scalar> compile_tuple(const std::string& text, int dim);
int tuple_arity(const std::string& text);

// Highest variable index referenced, or -1 when none.
int max_var_index(const std::string& text);

}  // namespace srlab::expr
