#include "srlab/control.hpp"

#include <cmath>
#include <vector>

namespace srlab {
namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// One RK4 stage bundle at a fixed control slope u: records the stage states,
// field matrices and (for the adjoint) stage Jacobians of f(x) = F(x) u + b(x).
struct StageData {
  Eigen::VectorXd x1, x2, x3, x4;      // stage states
  Eigen::MatrixXd F1, F2, F3, F4;      // m x ell at the stage states
  Eigen::MatrixXd J1, J2, J3, J4;      // df/dx at the stage states
};

Eigen::MatrixXd state_jacobian(const VectorFieldModel& model, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& u, bool include_drift,
                               double drift_scale) {
  const auto J = model.eval_jacobians(p);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(model.dim_m, model.dim_m);
  for (int i = 0; i < model.num_fields_ell; ++i) A.noalias() += u[i] * J[i];
  if (include_drift && !model.drift_is_zero) A.noalias() += drift_scale * J[model.num_fields_ell];
  return A;
}

}  // namespace

Control Control::zero(int K, int ell) {
  Control h;
  h.grid_K = K;
  h.values = Eigen::MatrixXd::Zero(K + 1, ell);
  return h;
}

double h1_norm_sq(const Control& h) {
  const int K = h.grid_K;
  double acc = 0.0;
  for (int k = 0; k < K; ++k) acc += (h.values.row(k + 1) - h.values.row(k)).squaredNorm();
  return K * acc;
}

Path integrate(const VectorFieldModel& model, const Eigen::VectorXd& x0, const Control& h,
               bool include_drift, double drift_scale) {
  const int K = h.grid_K;
  const int m = model.dim_m;
  const double dt = 1.0 / K;
  const bool drift = include_drift && !model.drift_is_zero;

  Path gamma;
  gamma.grid_K = K;
  gamma.points.resize(K + 1, m);
  gamma.points.row(0) = x0.transpose();

  Eigen::MatrixXd F(m, model.num_fields_ell);
  Eigen::VectorXd b(m), x(m), xs(m), k1(m), k2(m), k3(m), k4(m), u(model.num_fields_ell);
  x = x0;

  auto rhs = [&](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    model.eval_fields_into(p, F);
    out.noalias() = F * u;
    if (drift) {
      model.eval_drift_into(p, b);
      out.noalias() += drift_scale * b;
    }
  };

  for (int k = 0; k < K; ++k) {
    u = K * (h.values.row(k + 1) - h.values.row(k)).transpose();
    rhs(x, k1);
    xs = x + 0.5 * dt * k1;
    rhs(xs, k2);
    xs = x + 0.5 * dt * k2;
    rhs(xs, k3);
    xs = x + dt * k3;
    rhs(xs, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!finite(x)) throw IntegrationDiverged(k);
    gamma.points.row(k + 1) = x.transpose();
  }
  return gamma;
}

Eigen::MatrixXd endpoint_gradient(const VectorFieldModel& model, const Eigen::VectorXd& x0,
                                  const Control& h, const Eigen::VectorXd& target,
                                  bool include_drift, double drift_scale) {
  const int K = h.grid_K;
  const int m = model.dim_m;
  const int ell = model.num_fields_ell;
  const double dt = 1.0 / K;
  const bool drift = include_drift && !model.drift_is_zero;

  // Forward sweep, retaining everything the adjoint needs.
  std::vector<StageData> stages(K);
  std::vector<Eigen::VectorXd> slopes(K);
  Eigen::MatrixXd F(m, ell);
  Eigen::VectorXd b(m), x(m), k1(m), k2(m), k3(m), k4(m);
  x = x0;

  auto rhs = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& u, Eigen::VectorXd& out,
                 Eigen::MatrixXd& Fout) {
    model.eval_fields_into(p, Fout);
    out.noalias() = Fout * u;
    if (drift) {
      model.eval_drift_into(p, b);
      out.noalias() += drift_scale * b;
    }
  };

  for (int k = 0; k < K; ++k) {
    StageData& s = stages[k];
    slopes[k] = K * (h.values.row(k + 1) - h.values.row(k)).transpose();
    const Eigen::VectorXd& u = slopes[k];
    s.x1 = x;
    rhs(s.x1, u, k1, s.F1);
    s.x2 = x + 0.5 * dt * k1;
    rhs(s.x2, u, k2, s.F2);
    s.x3 = x + 0.5 * dt * k2;
    rhs(s.x3, u, k3, s.F3);
    s.x4 = x + dt * k3;
    rhs(s.x4, u, k4, s.F4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!finite(x)) throw IntegrationDiverged(k);
    s.J1 = state_jacobian(model, s.x1, u, include_drift, drift_scale);
    s.J2 = state_jacobian(model, s.x2, u, include_drift, drift_scale);
    s.J3 = state_jacobian(model, s.x3, u, include_drift, drift_scale);
    s.J4 = state_jacobian(model, s.x4, u, include_drift, drift_scale);
  }

  // lambda = d(objective)/d(gamma_K); periodic coordinates use the wrapped gap.
  Eigen::VectorXd lambda = wrap_difference(model, x, target);

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(K + 1, ell);
  Eigen::VectorXd g1(m), g2(m), g3(m), g4(m), gu(ell);
  for (int k = K - 1; k >= 0; --k) {
    const StageData& s = stages[k];
    // Reverse the RK4 combination: each stage's weight plus the chain through
    // later stage states.
    g4 = (dt / 6.0) * lambda;
    g3 = (dt / 3.0) * lambda + dt * (s.J4.transpose() * g4);
    g2 = (dt / 3.0) * lambda + 0.5 * dt * (s.J3.transpose() * g3);
    g1 = (dt / 6.0) * lambda + 0.5 * dt * (s.J2.transpose() * g2);

    gu.noalias() = s.F1.transpose() * g1;
    gu.noalias() += s.F2.transpose() * g2;
    gu.noalias() += s.F3.transpose() * g3;
    gu.noalias() += s.F4.transpose() * g4;

    grad.row(k + 1) += K * gu.transpose();
    grad.row(k) -= K * gu.transpose();

    lambda += s.J1.transpose() * g1 + s.J2.transpose() * g2 + s.J3.transpose() * g3 +
              s.J4.transpose() * g4;
  }
  grad.row(0).setZero();
  return grad;
}

}  // namespace srlab
