#pragma once

#include <stdexcept>
#include <string>

#include "srlab/model.hpp"

namespace srlab {

// Piecewise-linear control on the uniform grid t_k = k/K: values.row(k) = h(t_k),
// values.row(0) = 0.  Equivalently, the slope is constant on each step.
struct Control {
  Eigen::MatrixXd values;  // (K+1) x ell
  int grid_K = 0;

  static Control zero(int K, int ell);
  int ell() const { return static_cast<int>(values.cols()); }
};

// Discrete trajectory in chart coordinates on the uniform grid.  Periodic
// coordinates are stored unwrapped so paths stay continuous in the chart.
struct Path {
  Eigen::MatrixXd points;  // (K+1) x m
  int grid_K = 0;

  Eigen::VectorXd endpoint() const { return points.row(points.rows() - 1).transpose(); }
};

struct IntegrationDiverged : std::runtime_error {
  int step;
  explicit IntegrationDiverged(int s)
      : std::runtime_error("integration diverged at step " + std::to_string(s)), step(s) {}
};

// Piecewise-linear Dirichlet energy  K * sum_k |h_{k+1} - h_k|^2.
double h1_norm_sq(const Control& h);

// RK4 integration of  dgamma/dt = F(gamma) hdot  (+ drift_scale * V(gamma) when
// include_drift), with the control slope constant on each step.
Path integrate(const VectorFieldModel& model, const Eigen::VectorXd& x0, const Control& h,
               bool include_drift = false, double drift_scale = 1.0);

// Gradient of 0.5 * |gamma_1 - target|^2 (wrap-aware) with respect to the
// control values, computed by a backward adjoint sweep through the RK4 stages.
// Rows align with h.values; row 0 is zero.
Eigen::MatrixXd endpoint_gradient(const VectorFieldModel& model, const Eigen::VectorXd& x0,
                                  const Control& h, const Eigen::VectorXd& target,
                                  bool include_drift = false, double drift_scale = 1.0);

}  // namespace srlab
