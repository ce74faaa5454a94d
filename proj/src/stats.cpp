#include "srlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srlab {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

Eigen::VectorXd fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw std::invalid_argument("fit_least_squares: shape mismatch");
  return X.completeOrthogonalDecomposition().solve(y);
}

BatchStats batched_mean(const std::vector<double>& values, int num_batches) {
  BatchStats s;
  const std::size_t n = values.size();
  if (n == 0) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(n);

  int B = std::min<std::size_t>(static_cast<std::size_t>(num_batches), n);
  if (B < 2) {
    s.batches = static_cast<int>(B);
    return s;
  }
  // contiguous index blocks, sizes differing by at most one
  std::vector<double> bmeans(B, 0.0);
  double var_acc = 0.0;
  std::size_t start = 0;
  for (int b = 0; b < B; ++b) {
    const std::size_t stop = n * (b + 1) / B;
    double acc = 0.0;
    for (std::size_t i = start; i < stop; ++i) acc += values[i];
    bmeans[b] = acc / static_cast<double>(stop - start);
    start = stop;
  }
  for (int b = 0; b < B; ++b) var_acc += (bmeans[b] - s.mean) * (bmeans[b] - s.mean);
  s.std_error = std::sqrt(var_acc / (B * (B - 1.0)));
  s.batches = B;
  return s;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n, std::size_t m) {
  const double ne = static_cast<double>(n) * m / (n + m);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  if (lambda <= 0.04) return 1.0;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 256; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    sign = -sign;
    if (std::fabs(term) < 1e-16 * std::fabs(p)) break;
  }
  p *= 2.0;
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace srlab
