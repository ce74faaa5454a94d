#include "srlab/rough.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "srlab/stats.hpp"

namespace srlab {
namespace {

void warn_alpha_once(double alpha) {
  static bool warned = false;
  if (!warned && (alpha <= 1.0 / 3.0 || alpha >= 0.5)) {
    std::fprintf(stderr,
                 "warning: alpha = %.4f is outside (1/3, 1/2); Brownian rough-path "
                 "statistics are calibrated for that range\n",
                 alpha);
    warned = true;
  }
}

constexpr int kMaxExactK = 4096;

// Coarsen a (K+1)-row grid path by stride 2^j until K <= kMaxExactK.
Eigen::MatrixXd coarsen(const Eigen::MatrixXd& pts, int* stride_out) {
  int K = static_cast<int>(pts.rows()) - 1;
  int stride = 1;
  while (K / stride > kMaxExactK && (K % (2 * stride)) == 0) stride *= 2;
  *stride_out = stride;
  if (stride == 1) return pts;
  const int Kc = K / stride;
  Eigen::MatrixXd out(Kc + 1, pts.cols());
  for (int k = 0; k <= Kc; ++k) out.row(k) = pts.row(k * stride);
  return out;
}

struct HolderSups {
  double full = 0.0;
  double window = 0.0;
};

// Exhaustive pairwise sup of |w_t - w_s| / (t-s)^alpha on the unit grid.
HolderSups holder_sups(const Eigen::MatrixXd& pts, double alpha, int window_n,
                       const std::vector<int>& periodic_dims) {
  const int K = static_cast<int>(pts.rows()) - 1;
  const int m = static_cast<int>(pts.cols());
  const double window_gap = 1.0 / window_n;

  // Precompute 1/(t-s)^alpha per lag.
  std::vector<double> inv_pow(K + 1, 0.0);
  for (int lag = 1; lag <= K; ++lag)
    inv_pow[lag] = std::pow(static_cast<double>(lag) / K, -alpha);

  std::vector<bool> wrap_coord(m, false);
  for (int c : periodic_dims)
    if (c >= 0 && c < m) wrap_coord[c] = true;
  const bool wrap = !periodic_dims.empty();

  HolderSups sup;
  for (int s = 0; s < K; ++s) {
    for (int t = s + 1; t <= K; ++t) {
      double r2 = 0.0;
      if (wrap) {
        for (int c = 0; c < m; ++c) {
          double d = pts(t, c) - pts(s, c);
          if (wrap_coord[c]) d = std::remainder(d, 2.0 * 3.14159265358979323846);
          r2 += d * d;
        }
      } else {
        r2 = (pts.row(t) - pts.row(s)).squaredNorm();
      }
      const double q = std::sqrt(r2) * inv_pow[t - s];
      if (q > sup.full) sup.full = q;
      if (static_cast<double>(t - s) / K <= window_gap + 1e-15 && q > sup.window)
        sup.window = q;
    }
  }
  return sup;
}

}  // namespace

HolderStats holder_stats(const Eigen::MatrixXd& points, double alpha, int window_n,
                         const std::vector<int>& periodic_dims) {
  if (points.rows() < 2) throw std::invalid_argument("holder_stats: need at least two points");
  if (window_n < 1) throw std::invalid_argument("holder_stats: window_n must be >= 1");
  warn_alpha_once(alpha);

  int stride = 1;
  const Eigen::MatrixXd pts = coarsen(points, &stride);
  const double factor = stride == 1 ? 1.0 : 1.0 + std::pow(2.0, -alpha);

  const HolderSups sup = holder_sups(pts, alpha, window_n, periodic_dims);
  HolderStats st;
  st.alpha = alpha;
  st.window_n = window_n;
  st.coarsened = stride != 1;
  st.full_norm = factor * sup.full;
  st.window_norm = factor * sup.window;
  return st;
}

HolderStats holder_stats(const VectorFieldModel& model, const Path& path, double alpha,
                         int window_n) {
  return holder_stats(path.points, alpha, window_n, model.periodic_dims);
}

LevyArea::LevyArea(const Eigen::MatrixXd& w) {
  if (w.cols() < 2) throw std::invalid_argument("LevyArea: need at least two components");
  if (w.rows() < 2) throw std::invalid_argument("LevyArea: need at least two grid points");
  K_ = static_cast<int>(w.rows()) - 1;
  ell_ = static_cast<int>(w.cols());
  w_ = w;
  prefix_.assign(K_ + 1, Eigen::MatrixXd::Zero(ell_, ell_));
  for (int t = 1; t <= K_; ++t) {
    prefix_[t] = prefix_[t - 1];
    for (int i = 0; i < ell_; ++i)
      for (int j = 0; j < ell_; ++j)
        prefix_[t](i, j) += w_(t - 1, i) * (w_(t, j) - w_(t - 1, j));
  }
}

double LevyArea::entry(int s, int t, int i, int j) const {
  // A^{ij}_{s,t} with the left-endpoint sums rebased at s:
  //   0.5 * [(S^{ij}_t - S^{ij}_s) - (S^{ji}_t - S^{ji}_s)
  //          - w^i_s (w^j_t - w^j_s) + w^j_s (w^i_t - w^i_s)]
  const double sij = prefix_[t](i, j) - prefix_[s](i, j);
  const double sji = prefix_[t](j, i) - prefix_[s](j, i);
  return 0.5 * (sij - sji - w_(s, i) * (w_(t, j) - w_(s, j)) + w_(s, j) * (w_(t, i) - w_(s, i)));
}

Eigen::MatrixXd LevyArea::at(int s, int t) const {
  if (s < 0 || t < 0 || s > K_ || t > K_) throw std::out_of_range("LevyArea::at");
  const double sign = s <= t ? 1.0 : -1.0;
  const int lo = std::min(s, t), hi = std::max(s, t);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ell_, ell_);
  for (int i = 0; i < ell_; ++i)
    for (int j = i + 1; j < ell_; ++j) {
      const double a = sign * entry(lo, hi, i, j);
      A(i, j) = a;
      A(j, i) = -a;
    }
  return A;
}

LevyArea levy_area(const Eigen::MatrixXd& increments_path) { return LevyArea(increments_path); }

RoughNorm rough_norm(const Eigen::MatrixXd& w, double alpha) {
  if (w.rows() < 2) throw std::invalid_argument("rough_norm: need at least two points");
  warn_alpha_once(alpha);

  int stride = 1;
  const Eigen::MatrixXd pts = coarsen(w, &stride);
  const double factor = stride == 1 ? 1.0 : 1.0 + std::pow(2.0, -alpha);
  const int K = static_cast<int>(pts.rows()) - 1;
  const int ell = static_cast<int>(pts.cols());

  std::vector<double> inv_pow(K + 1, 0.0), inv_pow2(K + 1, 0.0);
  for (int lag = 1; lag <= K; ++lag) {
    inv_pow[lag] = std::pow(static_cast<double>(lag) / K, -alpha);
    inv_pow2[lag] = std::pow(static_cast<double>(lag) / K, -2.0 * alpha);
  }

  double path_sup = 0.0;
  double area_sup2 = 0.0;  // sup of |A_{s,t}|_F / |t-s|^{2 alpha}
  if (ell >= 2) {
    const LevyArea area(pts);
    for (int s = 0; s < K; ++s)
      for (int t = s + 1; t <= K; ++t) {
        const double q = (pts.row(t) - pts.row(s)).norm() * inv_pow[t - s];
        if (q > path_sup) path_sup = q;
        double a2 = 0.0;
        for (int i = 0; i < ell; ++i)
          for (int j = i + 1; j < ell; ++j) {
            const double a = area.entry(s, t, i, j);
            a2 += 2.0 * a * a;  // both (i,j) and (j,i)
          }
        const double qa = std::sqrt(a2) * inv_pow2[t - s];
        if (qa > area_sup2) area_sup2 = qa;
      }
  } else {
    for (int s = 0; s < K; ++s)
      for (int t = s + 1; t <= K; ++t) {
        const double q = (pts.row(t) - pts.row(s)).norm() * inv_pow[t - s];
        if (q > path_sup) path_sup = q;
      }
  }

  RoughNorm rn;
  rn.alpha = alpha;
  rn.coarsened = stride != 1;
  rn.path_level = factor * path_sup;
  rn.area_level = factor * std::sqrt(area_sup2);
  rn.homogeneous = std::max(rn.path_level, rn.area_level);
  return rn;
}

TailCurve tail_statistics(const std::vector<double>& samples,
                          const std::vector<double>& thresholds, long long min_exceedances) {
  if (samples.size() < 1000)
    throw std::invalid_argument("tail_statistics: need at least 1000 samples");
  if (thresholds.empty()) throw std::invalid_argument("tail_statistics: no thresholds");

  TailCurve out;
  out.sample_size = samples.size();
  out.min_exceedances = min_exceedances;
  const double n = static_cast<double>(samples.size());

  for (double K : thresholds) {
    long long count = 0;
    for (double v : samples)
      if (v > K) ++count;
    if (count < min_exceedances) continue;
    out.thresholds.push_back(K);
    out.exceedances.push_back(count);
    out.log_survival.push_back(std::log(static_cast<double>(count) / n));
  }

  if (out.thresholds.size() >= 2) {
    std::vector<double> k2(out.thresholds.size());
    for (std::size_t i = 0; i < k2.size(); ++i) k2[i] = out.thresholds[i] * out.thresholds[i];
    const LinearFit fit = fit_line(k2, out.log_survival);
    out.slope_vs_k2 = fit.slope;
    out.intercept_vs_k2 = fit.intercept;
    out.slope_valid = true;
  }
  return out;
}

}  // namespace srlab
