#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "srlab/control.hpp"

namespace srlab {

struct OptimizerOptions {
  int restarts = 8;
  int grid_K = 64;
  double tol_endpoint = 1e-3;
  double penalty_init = 10.0;    // mu_1
  double penalty_factor = 10.0;  // mu_{j+1} = factor * mu_j
  int penalty_stages = 6;
  int max_iterations = 400;  // per penalty stage
  std::uint64_t seed = 1;
  int workers = 1;
  // minimizers with energy within near_rel of the best are recorded as ties
  double near_rel = 0.005;
  // path_energy: per-step residual allowed, relative to the step speed
  double horizontality_tol = 1e-2;
};

struct GeodesicResult {
  Control h_star;
  Path path;
  double energy = std::numeric_limits<double>::infinity();
  double distance_estimate = std::numeric_limits<double>::infinity();
  double endpoint_gap = std::numeric_limits<double>::infinity();
  int restarts_used = 0;
  bool converged = false;
  // distinct minimizers with energy within near_rel of the best (h_star first);
  // more than one entry means the minimizer is not unique at this tolerance.
  std::vector<Control> near_optima;
  bool unique_minimizer = true;
};

// Multi-start penalty-method minimization of 0.5*||h||^2 over controls
// steering x to y; the best control is constant-speed reparametrized so that
// distance_estimate^2 == energy.
GeodesicResult minimize_energy(const VectorFieldModel& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y, const OptimizerOptions& opts = {});

// inf ||h||^2 over controls reproducing gamma, via per-step least-norm slope
// fits against the field matrix; +infinity when some step is not horizontal
// (residual above horizontality_tol * step speed).
double path_energy(const VectorFieldModel& model, const Path& gamma,
                   const OptimizerOptions& opts = {});

// J(gamma) = 0.5 * (path_energy(gamma) - dist_xy^2); discretization can push
// the difference a hair negative, so tiny negatives (relative to the energy
// scale) are clamped to 0; +infinity for non-horizontal paths.
double rate_function(const VectorFieldModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, const Path& gamma, double dist_xy,
                     const OptimizerOptions& opts = {});

// Arc-length reparametrization; preserves the trace of h and makes the
// Cauchy-Schwarz bound ||h||_{H1}^2 >= (total variation)^2 an equality.
Control reparametrize_constant_speed(const Control& h);

}  // namespace srlab
