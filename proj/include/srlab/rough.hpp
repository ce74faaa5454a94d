#pragma once

#include <vector>

#include "srlab/control.hpp"

namespace srlab {

// Paths here live on the uniform unit time grid t_k = k/K.  Pairwise sups are
// exact for K <= 4096; above that the grid is coarsened by powers of two and
// the sup is multiplied by the conservative chaining factor (1 + 2^-alpha),
// reported with coarsened = true.

struct HolderStats {
  double alpha = 0.0;
  double full_norm = 0.0;    // sup over all grid pairs of |w_t - w_s| / |t-s|^alpha
  double window_norm = 0.0;  // sup restricted to 0 < t - s <= 1/window_n
  int window_n = 1;
  bool coarsened = false;
};

// alpha outside (1/3, 1/2) is allowed but warned about once on stderr.
HolderStats holder_stats(const Eigen::MatrixXd& points, double alpha, int window_n,
                         const std::vector<int>& periodic_dims = {});
HolderStats holder_stats(const VectorFieldModel& model, const Path& path, double alpha,
                         int window_n);

// Discrete Stratonovich Levy area of a piecewise-linear R^ell path:
//   A^{ij}_{s,t} = 0.5 * sum_{k=s}^{t-1} [(w^i_k - w^i_s) dw^j_k - (w^j_k - w^j_s) dw^i_k],
// evaluated in O(1) per pair from prefix sums; antisymmetric exactly.
class LevyArea {
 public:
  explicit LevyArea(const Eigen::MatrixXd& w);  // (K+1) x ell, ell >= 2
  Eigen::MatrixXd at(int s, int t) const;       // ell x ell, A_{t,s} = -A_{s,t}
  int grid_K() const { return K_; }
  int ell() const { return ell_; }

  // entry (i, j) of A_{s,t} for s <= t (raw accessor used by the norm loops)
  double entry(int s, int t, int i, int j) const;

 private:
  int K_ = 0;
  int ell_ = 0;
  Eigen::MatrixXd w_;
  // prefix_[t](i, j) = sum_{k < t} w^i_k (w^j_{k+1} - w^j_k)
  std::vector<Eigen::MatrixXd> prefix_;
};

LevyArea levy_area(const Eigen::MatrixXd& increments_path);

struct RoughNorm {
  double alpha = 0.0;
  double path_level = 0.0;  // alpha-Holder norm of the path increments
  double area_level = 0.0;  // sup |A_{s,t}|^(1/2) / |t-s|^alpha
  double homogeneous = 0.0;  // max of the two levels
  bool coarsened = false;
};

RoughNorm rough_norm(const Eigen::MatrixXd& w, double alpha);

struct TailCurve {
  std::vector<double> thresholds;  // kept thresholds (enough exceedances)
  std::vector<double> log_survival;
  std::vector<long long> exceedances;
  double slope_vs_k2 = 0.0;  // OLS slope of log-survival against K^2
  double intercept_vs_k2 = 0.0;
  bool slope_valid = false;
  std::size_t sample_size = 0;
  long long min_exceedances = 10;
};

// Empirical log-survival curve; thresholds with fewer than min_exceedances
// exceedances are omitted.  Requires at least 1000 samples.
TailCurve tail_statistics(const std::vector<double>& samples,
                          const std::vector<double>& thresholds, long long min_exceedances = 10);

}  // namespace srlab
