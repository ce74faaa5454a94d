#include "srlab/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "expr.hpp"
#include "srlab/rng.hpp"

namespace srlab {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// reduce to [-pi, pi]
double wrap_angle(double d) { return std::remainder(d, kTwoPi); }

VectorFieldModel heisenberg_model() {
  VectorFieldModel m;
  m.name = "heisenberg";
  m.dim_m = 3;
  m.num_fields_ell = 2;
  m.eval_fields = [](const Eigen::VectorXd& p) {
    Eigen::MatrixXd F(3, 2);
    F << 1.0, 0.0, 0.0, 1.0, -0.5 * p[1], 0.5 * p[0];
    return F;
  };
  m.eval_fields_into = [](const Eigen::VectorXd& p, Eigen::MatrixXd& F) {
    if (F.rows() != 3 || F.cols() != 2) F.resize(3, 2);
    F(0, 0) = 1.0;
    F(0, 1) = 0.0;
    F(1, 0) = 0.0;
    F(1, 1) = 1.0;
    F(2, 0) = -0.5 * p[1];
    F(2, 1) = 0.5 * p[0];
  };
  m.eval_drift = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(3).eval(); };
  m.eval_drift_into = [](const Eigen::VectorXd&, Eigen::VectorXd& v) {
    if (v.size() != 3) v.resize(3);
    v.setZero();
  };
  m.eval_jacobians = [](const Eigen::VectorXd&) {
    std::vector<Eigen::MatrixXd> J(3, Eigen::MatrixXd::Zero(3, 3));
    J[0](2, 1) = -0.5;  // d(V1)_z / dy
    J[1](2, 0) = 0.5;   // d(V2)_z / dx
    return J;
  };
  m.drift_is_zero = true;
  m.self_adjoint = true;
  // Exact distances are known for two classes after left translation
  // n = p^{-1} q: purely planar targets (d = |n_xy|) and purely vertical
  // targets, where the isoperimetric (Dido) solution gives 2*sqrt(pi*|n_z|).
  m.distance_oracle = [](const Eigen::VectorXd& p,
                         const Eigen::VectorXd& q) -> std::optional<double> {
    const double nx = q[0] - p[0];
    const double ny = q[1] - p[1];
    const double nz = q[2] - p[2] - 0.5 * (p[0] * q[1] - p[1] * q[0]);
    const double planar = std::hypot(nx, ny);
    const double scale = std::max({1.0, planar, std::fabs(nz)});
    if (std::fabs(nz) <= 1e-12 * scale) return planar;
    if (planar <= 1e-12 * scale) return 2.0 * std::sqrt(kPi * std::fabs(nz));
    return std::nullopt;
  };
  return m;
}

VectorFieldModel torus_model() {
  VectorFieldModel m;
  m.name = "torus_hypo";
  m.dim_m = 2;
  m.num_fields_ell = 2;
  m.periodic_dims = {0, 1};
  m.eval_fields = [](const Eigen::VectorXd& p) {
    Eigen::MatrixXd F(2, 2);
    F << 1.0, 0.0, 0.0, std::sin(p[0]);
    return F;
  };
  m.eval_fields_into = [](const Eigen::VectorXd& p, Eigen::MatrixXd& F) {
    if (F.rows() != 2 || F.cols() != 2) F.resize(2, 2);
    F(0, 0) = 1.0;
    F(0, 1) = 0.0;
    F(1, 0) = 0.0;
    F(1, 1) = std::sin(p[0]);
  };
  m.eval_drift = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2).eval(); };
  m.eval_drift_into = [](const Eigen::VectorXd&, Eigen::VectorXd& v) {
    if (v.size() != 2) v.resize(2);
    v.setZero();
  };
  m.eval_jacobians = [](const Eigen::VectorXd& p) {
    std::vector<Eigen::MatrixXd> J(3, Eigen::MatrixXd::Zero(2, 2));
    J[1](1, 0) = std::cos(p[0]);  // d(V2)_y / dx
    return J;
  };
  m.drift_is_zero = true;
  m.self_adjoint = true;  // div V2 = d(sin x0)/dx1 = 0
  // Moving only in x0 costs exactly the wrapped displacement.
  m.distance_oracle = [](const Eigen::VectorXd& p,
                         const Eigen::VectorXd& q) -> std::optional<double> {
    const double dx = wrap_angle(q[0] - p[0]);
    const double dy = wrap_angle(q[1] - p[1]);
    if (std::fabs(dy) <= 1e-12) return std::fabs(dx);
    return std::nullopt;
  };
  return m;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

VectorFieldModel custom_model(const std::map<std::string, std::string>& params) {
  const auto it = params.find("fields");
  if (it == params.end())
    throw std::invalid_argument("custom model needs a 'fields' parameter, e.g. V1=(1,0);V2=(0,x0)");

  std::vector<std::string> field_texts;
  for (const auto& entry : split(it->second, ';')) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw expr::ParseError("field entry missing '=': " + entry);
    const std::string lhs = trim(entry.substr(0, eq));
    if (lhs.size() < 2 || lhs[0] != 'V')
      throw expr::ParseError("field entry must be named V1, V2, ...: " + entry);
    const int idx = std::atoi(lhs.c_str() + 1);
    if (idx < 1 || idx > 64) throw expr::ParseError("bad field index in: " + entry);
    if (static_cast<int>(field_texts.size()) < idx) field_texts.resize(idx);
    field_texts[idx - 1] = trim(entry.substr(eq + 1));
  }
  if (field_texts.empty()) throw expr::ParseError("no fields given");
  for (std::size_t i = 0; i < field_texts.size(); ++i)
    if (field_texts[i].empty())
      throw expr::ParseError("missing definition for V" + std::to_string(i + 1));

  // Dimension: the tuple arity of the fields (each V_i maps into R^m); all
  // referenced variables must fit.
  const int m_dim = expr::tuple_arity(field_texts[0]);
  int max_var = -1;
  for (const auto& t : field_texts) {
    if (expr::tuple_arity(t) != m_dim)
      throw expr::ParseError("all fields must have the same arity");
    max_var = std::max(max_var, expr::max_var_index(t));
  }

  const auto drift_it = params.find("drift");
  const std::string drift_text = drift_it == params.end() ? std::string() : drift_it->second;
  if (!drift_text.empty()) {
    if (expr::tuple_arity(drift_text) != m_dim)
      throw expr::ParseError("drift arity must match the field arity");
    max_var = std::max(max_var, expr::max_var_index(drift_text));
  }
  if (max_var >= m_dim)
    throw expr::ParseError("expression references x" + std::to_string(max_var) +
                           " but the model dimension is " + std::to_string(m_dim));

  const int ell = static_cast<int>(field_texts.size());
  std::vector<std::vector<expr::Scalar>> comps;
  comps.reserve(ell);
  for (const auto& t : field_texts) comps.push_back(expr::compile_tuple(t, m_dim));
  std::vector<expr::Scalar> drift_comps;
  if (!drift_text.empty()) drift_comps = expr::compile_tuple(drift_text, m_dim);

  VectorFieldModel m;
  m.name = "custom";
  m.dim_m = m_dim;
  m.num_fields_ell = ell;
  m.eval_fields = [comps, m_dim, ell](const Eigen::VectorXd& p) {
    Eigen::MatrixXd F(m_dim, ell);
    for (int i = 0; i < ell; ++i)
      for (int c = 0; c < m_dim; ++c) F(c, i) = comps[i][c](p);
    return F;
  };
  if (drift_comps.empty()) {
    m.eval_drift = [m_dim](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(m_dim).eval(); };
    m.drift_is_zero = true;
  } else {
    m.eval_drift = [drift_comps, m_dim](const Eigen::VectorXd& p) {
      Eigen::VectorXd v(m_dim);
      for (int c = 0; c < m_dim; ++c) v[c] = drift_comps[c](p);
      return v;
    };
    m.drift_is_zero = false;  // refined below by sampling
  }

  if (const auto p_it = params.find("periodic"); p_it != params.end()) {
    for (const auto& tok : split(p_it->second, ',')) {
      const int c = std::atoi(trim(tok).c_str());
      if (c < 0 || c >= m_dim) throw std::invalid_argument("periodic coordinate out of range");
      m.periodic_dims.push_back(c);
    }
  }

  finalize_model(m);

  // Probe a few deterministic sample points to classify the generator:
  // zero drift + divergence-free fields means it is self-adjoint.
  RandomStream rng(0x5eed5eedULL);
  bool drift_zero = true, div_free = true;
  for (int trial = 0; trial < 24; ++trial) {
    Eigen::VectorXd p(m_dim);
    for (int c = 0; c < m_dim; ++c) p[c] = 2.0 * rng.normal();
    if (m.eval_drift(p).norm() > 1e-10) drift_zero = false;
    const auto J = m.eval_jacobians(p);
    for (int i = 0; i < ell; ++i)
      if (std::fabs(J[i].trace()) > 1e-6) div_free = false;
  }
  m.drift_is_zero = drift_zero;
  m.self_adjoint = drift_zero && div_free;
  return m;
}

}  // namespace

bool VectorFieldModel::is_periodic(int coord) const {
  return std::find(periodic_dims.begin(), periodic_dims.end(), coord) != periodic_dims.end();
}

void finalize_model(VectorFieldModel& model) {
  if (!model.eval_drift) {
    const int m_dim = model.dim_m;
    model.eval_drift = [m_dim](const Eigen::VectorXd&) {
      return Eigen::VectorXd::Zero(m_dim).eval();
    };
    model.drift_is_zero = true;
  }
  if (!model.eval_jacobians) {
    // central differences, step 1e-6
    const auto fields = model.eval_fields;
    const auto drift = model.eval_drift;
    const int m_dim = model.dim_m;
    const int ell = model.num_fields_ell;
    model.eval_jacobians = [fields, drift, m_dim, ell](const Eigen::VectorXd& p) {
      const double h = 1e-6;
      std::vector<Eigen::MatrixXd> J(ell + 1, Eigen::MatrixXd::Zero(m_dim, m_dim));
      Eigen::VectorXd pp = p, pm = p;
      for (int c = 0; c < m_dim; ++c) {
        pp[c] = p[c] + h;
        pm[c] = p[c] - h;
        const Eigen::MatrixXd Fp = fields(pp);
        const Eigen::MatrixXd Fm = fields(pm);
        for (int i = 0; i < ell; ++i) J[i].col(c) = (Fp.col(i) - Fm.col(i)) / (2.0 * h);
        J[ell].col(c) = (drift(pp) - drift(pm)) / (2.0 * h);
        pp[c] = p[c];
        pm[c] = p[c];
      }
      return J;
    };
  }
  if (!model.eval_fields_into) {
    const auto fields = model.eval_fields;
    model.eval_fields_into = [fields](const Eigen::VectorXd& p, Eigen::MatrixXd& F) {
      F = fields(p);
    };
  }
  if (!model.eval_drift_into) {
    const auto drift = model.eval_drift;
    model.eval_drift_into = [drift](const Eigen::VectorXd& p, Eigen::VectorXd& v) { v = drift(p); };
  }
}

VectorFieldModel make_model(const std::string& name,
                            const std::map<std::string, std::string>& params) {
  if (name == "heisenberg") return heisenberg_model();
  if (name == "torus_hypo") return torus_model();
  if (name == "custom") return custom_model(params);
  throw std::invalid_argument("unknown model: " + name);
}

Eigen::VectorXd wrap_difference(const VectorFieldModel& model, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& q) {
  Eigen::VectorXd d = p - q;
  for (int c : model.periodic_dims) d[c] = wrap_angle(d[c]);
  return d;
}

double ambient_distance(const VectorFieldModel& model, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& q) {
  return wrap_difference(model, p, q).norm();
}

}  // namespace srlab
