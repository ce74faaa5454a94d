#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace srlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares of y against x (with intercept).
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Least-squares coefficients for an arbitrary design matrix (rows = observations).
Eigen::VectorXd fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct BatchStats {
  double mean = 0.0;
  double std_error = 0.0;
  int batches = 0;
};

// Mean with a standard error from contiguous index batches (default 20).
// Batching is by index, so the result is independent of thread scheduling.
BatchStats batched_mean(const std::vector<double>& values, int num_batches = 20);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_pvalue(double d, std::size_t n, std::size_t m);

// 95% upper confidence bound for a probability with zero observed events.
inline double rule_of_three(std::size_t n) { return 3.0 / static_cast<double>(n); }

}  // namespace srlab
