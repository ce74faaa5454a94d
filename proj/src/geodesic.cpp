#include "srlab/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "srlab/parallel.hpp"
#include "srlab/rng.hpp"

namespace srlab {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct RestartOutcome {
  Control h;
  double energy = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Gradient of 0.5 * h1_norm_sq: the discrete H1 quadratic form.
void energy_gradient(const Control& h, Eigen::MatrixXd& g) {
  const int K = h.grid_K;
  g.resize(h.values.rows(), h.values.cols());
  for (int k = 1; k < K; ++k)
    g.row(k) = K * (2.0 * h.values.row(k) - h.values.row(k - 1) - h.values.row(k + 1));
  g.row(K) = K * (h.values.row(K) - h.values.row(K - 1));
  g.row(0).setZero();
}

double endpoint_gap_sq(const VectorFieldModel& model, const Eigen::VectorXd& x0, const Control& h,
                       const Eigen::VectorXd& target) {
  const Path gamma = integrate(model, x0, h);
  return wrap_difference(model, gamma.endpoint(), target).squaredNorm();
}

// One penalty stage:  min  0.5*||h||^2 + mu * 0.5*|gamma_1(h) - y|^2
// by Nesterov-accelerated gradient descent with Armijo backtracking.
void penalty_stage(const VectorFieldModel& model, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y, double mu, int max_iterations, Control& h) {
  const int K = h.grid_K;
  const int ell = h.ell();

  auto objective = [&](const Control& c) -> double {
    try {
      return 0.5 * h1_norm_sq(c) + 0.5 * mu * endpoint_gap_sq(model, x, c, y);
    } catch (const IntegrationDiverged&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Eigen::MatrixXd g_energy, g_total(K + 1, ell);
  Control prev = h;     // h_{i-1} for the momentum extrapolation
  Control trial = h;    // extrapolated point
  Control next = h;
  double step = 0.1 / (1.0 + mu);
  double f_curr = objective(h);

  for (int it = 0; it < max_iterations; ++it) {
    const double beta = it == 0 ? 0.0 : static_cast<double>(it - 1) / (it + 2);
    trial.values = h.values + beta * (h.values - prev.values);

    Eigen::MatrixXd g_pen;
    try {
      g_pen = endpoint_gradient(model, x, trial, y);
    } catch (const IntegrationDiverged&) {
      // momentum overshot into a blow-up region: restart from the last iterate
      trial = h;
      g_pen = endpoint_gradient(model, x, trial, y);
    }
    energy_gradient(trial, g_energy);
    g_total = g_energy + mu * g_pen;

    const double gnorm = g_total.norm();
    const double f_trial = objective(trial);
    if (gnorm <= 1e-9 * (1.0 + std::fabs(f_trial))) break;

    // Armijo backtracking from the extrapolated point.
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      next.values = trial.values - step * g_total;
      next.values.row(0).setZero();
      const double f_next = objective(next);
      if (f_next <= f_trial - 0.25 * step * gnorm * gnorm) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow: converged to gradient noise

    prev = h;
    h = next;
    step *= 1.5;
    const double f_new = objective(h);
    if (f_new > f_curr) prev = h;  // kill the momentum after an uphill move
    f_curr = f_new;
  }
}

RestartOutcome run_restart(const VectorFieldModel& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y, const OptimizerOptions& opts, int restart) {
  const int K = opts.grid_K;
  const int ell = model.num_fields_ell;

  // Base guess: the least-norm constant slope solving F(x) u = wrapped gap.
  const Eigen::VectorXd diff = -wrap_difference(model, x, y);  // y - x, wrapped
  const Eigen::MatrixXd F0 = model.eval_fields(x);
  Eigen::VectorXd u0 = F0.completeOrthogonalDecomposition().solve(diff);

  Control h = Control::zero(K, ell);
  if (restart == 0) {
    for (int k = 0; k <= K; ++k) h.values.row(k) = (static_cast<double>(k) / K) * u0.transpose();
  } else {
    const double amp = std::max(1.0, diff.norm());
    RandomStream rng = RandomStream::for_index(opts.seed, static_cast<std::uint64_t>(restart));
    Eigen::VectorXd c(ell);
    for (int i = 0; i < ell; ++i) c[i] = u0[i] + 0.5 * amp * rng.normal();
    Eigen::MatrixXd a(3, ell), b(3, ell);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < ell; ++i) {
        a(j, i) = amp / (j + 1) * rng.normal();
        b(j, i) = amp / (j + 1) * rng.normal();
      }
    for (int k = 0; k <= K; ++k) {
      const double t = static_cast<double>(k) / K;
      Eigen::VectorXd v = t * c;
      for (int j = 0; j < 3; ++j) {
        const double w = 2.0 * kPi * (j + 1);
        v += std::sin(w * t) / w * a.row(j).transpose() +
             (1.0 - std::cos(w * t)) / w * b.row(j).transpose();
      }
      h.values.row(k) = v.transpose();
    }
  }

  RestartOutcome out;
  double mu = opts.penalty_init;
  try {
    for (int stage = 0; stage < opts.penalty_stages; ++stage, mu *= opts.penalty_factor)
      penalty_stage(model, x, y, mu, opts.max_iterations, h);
  } catch (const IntegrationDiverged&) {
    out.h = Control::zero(K, ell);
    return out;
  }
  out.h = h;
  try {
    out.gap = std::sqrt(endpoint_gap_sq(model, x, h, y));
    out.energy = h1_norm_sq(h);
    out.converged = out.gap <= opts.tol_endpoint;
  } catch (const IntegrationDiverged&) {
    out.converged = false;
  }
  return out;
}

// Controls are deemed the same minimizer when their traced paths stay within
// 5% of the problem scale of each other.
bool same_minimizer(const VectorFieldModel& model, const Eigen::VectorXd& x, const Control& ha,
                    const Control& hb, double scale) {
  const Path pa = integrate(model, x, ha);
  const Path pb = integrate(model, x, hb);
  double sup = 0.0;
  for (int k = 0; k <= pa.grid_K; ++k) {
    const Eigen::VectorXd d = wrap_difference(model, pa.points.row(k).transpose(),
                                              pb.points.row(k).transpose());
    sup = std::max(sup, d.norm());
  }
  return sup <= 0.05 * scale;
}

}  // namespace

Control reparametrize_constant_speed(const Control& h) {
  const int K = h.grid_K;
  const int ell = h.ell();
  std::vector<double> cum(K + 1, 0.0);
  for (int k = 0; k < K; ++k)
    cum[k + 1] = cum[k] + (h.values.row(k + 1) - h.values.row(k)).norm();
  const double total = cum[K];
  if (total <= 0.0) return h;

  Control out = Control::zero(K, ell);
  for (int k = 1; k <= K; ++k) {
    const double s = total * k / K;  // target arc length
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    int j = static_cast<int>(it - cum.begin()) - 1;
    j = std::min(j, K - 1);
    const double seg = cum[j + 1] - cum[j];
    const double t = seg > 0.0 ? (s - cum[j]) / seg : 0.0;
    out.values.row(k) = (1.0 - t) * h.values.row(j) + t * h.values.row(j + 1);
  }
  out.values.row(K) = h.values.row(K);
  return out;
}

GeodesicResult minimize_energy(const VectorFieldModel& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y, const OptimizerOptions& opts) {
  GeodesicResult res;
  res.restarts_used = opts.restarts;

  const Eigen::VectorXd gap0 = wrap_difference(model, y, x);
  if (gap0.norm() <= 1e-14) {
    res.h_star = Control::zero(opts.grid_K, model.num_fields_ell);
    res.path = integrate(model, x, res.h_star);
    res.energy = 0.0;
    res.distance_estimate = 0.0;
    res.endpoint_gap = 0.0;
    res.converged = true;
    res.near_optima = {res.h_star};
    return res;
  }

  std::vector<RestartOutcome> outcomes(opts.restarts);
  parallel_for(opts.restarts, opts.workers, [&](std::size_t r) {
    outcomes[r] = run_restart(model, x, y, opts, static_cast<int>(r));
  });

  // Prefer converged restarts by energy; otherwise fall back to smallest gap.
  int best = -1;
  for (int r = 0; r < opts.restarts; ++r) {
    if (!outcomes[r].converged) continue;
    if (best < 0 || outcomes[r].energy < outcomes[best].energy) best = r;
  }
  if (best < 0) {
    best = 0;
    for (int r = 1; r < opts.restarts; ++r)
      if (outcomes[r].gap < outcomes[best].gap) best = r;
  }

  const Control h_best = reparametrize_constant_speed(outcomes[best].h);
  res.h_star = h_best;
  res.path = integrate(model, x, h_best);
  res.energy = h1_norm_sq(h_best);
  res.endpoint_gap = wrap_difference(model, res.path.endpoint(), y).norm();
  res.distance_estimate = std::sqrt(res.energy);
  res.converged = outcomes[best].converged && res.endpoint_gap <= opts.tol_endpoint;

  // Collect distinct near-optimal minimizers among the converged restarts.
  res.near_optima.push_back(res.h_star);
  if (res.converged) {
    const double scale = std::max(1.0, gap0.norm());
    for (int r = 0; r < opts.restarts; ++r) {
      if (!outcomes[r].converged) continue;
      if (outcomes[r].energy > res.energy * (1.0 + opts.near_rel)) continue;
      const Control cand = reparametrize_constant_speed(outcomes[r].h);
      bool dup = false;
      for (const Control& seen : res.near_optima)
        if (same_minimizer(model, x, cand, seen, scale)) {
          dup = true;
          break;
        }
      if (!dup) res.near_optima.push_back(cand);
    }
  }
  res.unique_minimizer = res.near_optima.size() <= 1;
  return res;
}

double path_energy(const VectorFieldModel& model, const Path& gamma,
                   const OptimizerOptions& opts) {
  const int K = gamma.grid_K;
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd a = gamma.points.row(k).transpose();
    const Eigen::VectorXd b = gamma.points.row(k + 1).transpose();
    const Eigen::VectorXd v = K * -wrap_difference(model, a, b);  // K*(b - a), wrapped
    const Eigen::VectorXd mid = a + 0.5 * (-wrap_difference(model, a, b));
    const Eigen::MatrixXd F = model.eval_fields(mid);
    const Eigen::VectorXd u = F.completeOrthogonalDecomposition().solve(v);
    const double resid = (F * u - v).norm();
    if (resid > opts.horizontality_tol * (v.norm() + 1e-12))
      return std::numeric_limits<double>::infinity();
    acc += u.squaredNorm();
  }
  return acc / K;
}

double rate_function(const VectorFieldModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, const Path& gamma, double dist_xy,
                     const OptimizerOptions& opts) {
  (void)x;
  (void)y;
  const double e = path_energy(model, gamma, opts);
  if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
  double j = 0.5 * (e - dist_xy * dist_xy);
  // discretization can push the path energy a hair below dist^2; snap to zero
  if (j < 0.0 && j >= -1e-5 * (1.0 + e)) j = 0.0;
  return j;
}

}  // namespace srlab
