#include "srlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "srlab/rng.hpp"
#include "srlab/stats.hpp"

namespace srlab {
namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void add_model_notes(const VectorFieldModel& model, ExperimentReport& r) {
  if (model.name == "heisenberg")
    r.notes["caveat"] =
        "non-compact chart: kernel values and ball acceptance rates depend on the chart "
        "coordinates, only the eps->0 exponents are intrinsic";
}

long long target_for(const ExperimentConfig& cfg, std::size_t i) {
  if (cfg.target_accepted.empty()) return 400;
  if (i < cfg.target_accepted.size()) return cfg.target_accepted[i];
  return cfg.target_accepted.back();
}

struct DistanceInfo {
  double d = 0.0;
  bool ok = false;
  std::string source;  // oracle | optimizer | coincident
  GeodesicResult geo;
};

DistanceInfo resolve_distance(const VectorFieldModel& model, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, const ExperimentConfig& cfg) {
  DistanceInfo info;
  if (wrap_difference(model, y, x).norm() < 1e-14) {
    info.d = 0.0;
    info.ok = true;
    info.source = "coincident";
    return info;
  }
  if (model.distance_oracle) {
    if (const auto v = model.distance_oracle(x, y)) {
      info.d = *v;
      info.ok = true;
      info.source = "oracle";
      return info;
    }
  }
  OptimizerOptions opt = cfg.opt;
  opt.seed = derive_seed(cfg.seed, 777);
  opt.workers = cfg.workers;
  info.geo = minimize_energy(model, x, y, opt);
  info.d = info.geo.distance_estimate;
  info.ok = info.geo.converged;
  info.source = "optimizer";
  return info;
}

// q_hat with a rule-of-three placeholder when nothing exceeds/lands inside.
EstimateRecord rate_estimate(double eps, const std::vector<double>& indicators) {
  EstimateRecord rec;
  rec.eps = eps;
  rec.sample_size = static_cast<long long>(indicators.size());
  long long hits = 0;
  for (double v : indicators) hits += v > 0.5 ? 1 : 0;
  if (hits == 0) {
    const double q = rule_of_three(indicators.size());
    rec.value = eps * std::log(q);
    rec.std_error = 0.0;
    rec.flagged = true;
    rec.extras["q_hat"] = q;
    rec.extras["hits"] = 0.0;
    return rec;
  }
  const BatchStats bs = batched_mean(indicators);
  rec.value = eps * std::log(bs.mean);
  rec.std_error = eps * bs.std_error / bs.mean;
  rec.extras["q_hat"] = bs.mean;
  rec.extras["hits"] = static_cast<double>(hits);
  return rec;
}

struct EpsLogFits {
  LinearFit linear;
  Eigen::Vector3d prefactor;  // value = c0 + c1*eps + c2*eps*log(eps)
  double max_abs_residual = 0.0;
  bool has_prefactor = false;
};

EpsLogFits fit_eps_log(const std::vector<double>& eps, const std::vector<double>& v) {
  EpsLogFits out;
  out.linear = fit_line(eps, v);
  if (eps.size() >= 3) {
    Eigen::MatrixXd X(eps.size(), 3);
    Eigen::VectorXd Y(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = eps[i];
      X(i, 2) = eps[i] * std::log(eps[i]);
      Y(i) = v[i];
    }
    out.prefactor = fit_least_squares(X, Y);
    out.has_prefactor = true;
    for (std::size_t i = 0; i < eps.size(); ++i)
      out.max_abs_residual =
          std::max(out.max_abs_residual, std::fabs((X.row(i) * out.prefactor)(0) - Y(i)));
  }
  return out;
}

FitRecord choose_fit(const EpsLogFits& fits, const std::string& fit_model, double target) {
  FitRecord f;
  f.target = target;
  if (fit_model == "prefactor" && fits.has_prefactor) {
    f.model = "prefactor";
    f.intercept = fits.prefactor[0];
    f.slope = fits.prefactor[1];
    f.extras["log_coefficient"] = fits.prefactor[2];
    f.extras["linear_intercept"] = fits.linear.intercept;
    f.extras["linear_slope"] = fits.linear.slope;
  } else {
    f.model = "linear";
    f.intercept = fits.linear.intercept;
    f.slope = fits.linear.slope;
    if (fits.has_prefactor) {
      f.extras["prefactor_intercept"] = fits.prefactor[0];
      f.extras["prefactor_slope"] = fits.prefactor[1];
      f.extras["log_coefficient"] = fits.prefactor[2];
    }
  }
  if (fits.has_prefactor) f.extras["max_abs_residual"] = fits.max_abs_residual;
  f.relative_error = target != 0.0 ? std::fabs(f.intercept - target) / std::fabs(target)
                                   : std::fabs(f.intercept);
  return f;
}

ExperimentReport base_report(const std::string& experiment, const VectorFieldModel& model,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const std::vector<double>& eps_grid, const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.experiment = experiment;
  r.model_name = model.name;
  r.x = x;
  r.y = y;
  r.eps_grid = eps_grid;
  r.seed = cfg.seed;
  add_model_notes(model, r);
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] < eps_grid[i - 1]))
      throw std::invalid_argument("eps_grid must be strictly decreasing");
  return r;
}

BridgeEnsemble bridge_for(const VectorFieldModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, double eps, std::uint64_t seed_tag,
                          long long target, const ExperimentConfig& cfg) {
  SimConfig sim;
  sim.epsilon = eps;
  sim.steps_N = cfg.steps_N;
  sim.seed = derive_seed(cfg.seed, seed_tag);
  sim.workers = cfg.workers;
  const double factor = cfg.ball_radius_factor > 0.0 ? cfg.ball_radius_factor : 0.5;
  const double ball = factor * std::sqrt(eps);
  return sample_bridge(model, x, y, sim, ball, cfg.max_proposals, target);
}

}  // namespace

Eigen::MatrixXd resample_path(const Path& gamma, int N) {
  const int K = gamma.grid_K;
  const Eigen::Index m = gamma.points.cols();
  Eigen::MatrixXd out(N + 1, m);
  for (int k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) / N * K;
    const int j = std::min(static_cast<int>(t), K - 1);
    const double s = t - j;
    out.row(k) = (1.0 - s) * gamma.points.row(j) + s * gamma.points.row(j + 1);
  }
  return out;
}

double sup_distance(const VectorFieldModel& model, const Eigen::MatrixXd& a,
                    const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("sup_distance: shape mismatch");
  double sup = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    double r2 = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      double d = a(k, c) - b(k, c);
      if (model.is_periodic(static_cast<int>(c))) d = std::remainder(d, kTwoPi);
      r2 += d * d;
    }
    sup = std::max(sup, std::sqrt(r2));
  }
  return sup;
}

ExperimentReport run_leandre(const VectorFieldModel& model, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y, const std::vector<double>& eps_grid,
                             const ExperimentConfig& cfg) {
  Timer timer;
  ExperimentReport r = base_report("leandre", model, x, y, eps_grid, cfg);

  const DistanceInfo dist = resolve_distance(model, x, y, cfg);
  r.notes["distance_source"] = dist.source;
  if (!dist.ok) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "distance estimate did not converge";
    r.runtime_s = timer.seconds();
    return r;
  }
  const double target = -0.5 * dist.d * dist.d;
  r.metrics["distance"] = dist.d;

  std::vector<double> fit_eps, fit_v;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double eps = eps_grid[i];
    SimConfig sim;
    sim.epsilon = eps;
    sim.steps_N = cfg.steps_N;
    sim.seed = derive_seed(cfg.seed, 1000 + i);
    sim.workers = cfg.workers;

    const KernelEstimate est =
        estimate_heat_kernel_detail(model, x, y, sim, 0.0, cfg.samples_per_eps);
    EstimateRecord rec;
    rec.eps = eps;
    rec.sample_size = cfg.samples_per_eps;
    if (est.underflow || est.value <= 0.0) {
      rec.flagged = true;
      rec.extras["underflow"] = 1.0;
      rec.extras["min_scaled_distance"] = est.min_scaled_distance;
    } else {
      rec.value = eps * std::log(est.value);
      rec.std_error = eps * est.std_error / est.value;
      rec.extras["kernel"] = est.value;
      rec.extras["kernel_stderr"] = est.std_error;
      fit_eps.push_back(eps);
      fit_v.push_back(rec.value);
    }
    r.estimates.push_back(std::move(rec));
  }

  r.metrics["points_used"] = static_cast<double>(fit_eps.size());
  if (fit_eps.size() < 3) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "fewer than three usable kernel estimates";
    r.runtime_s = timer.seconds();
    return r;
  }

  const EpsLogFits fits = fit_eps_log(fit_eps, fit_v);
  FitRecord f = choose_fit(fits, cfg.fit_model, target);
  if (target != 0.0) {
    r.tolerance = cfg.tol_relative;
    r.verdict = f.relative_error <= cfg.tol_relative ? "pass" : "fail";
  } else {
    r.tolerance = cfg.tol_absolute;
    r.notes["tolerance_mode"] = "absolute";
    r.verdict = f.relative_error <= cfg.tol_absolute ? "pass" : "fail";
  }
  r.fit = std::move(f);
  r.runtime_s = timer.seconds();
  return r;
}

ExperimentReport run_tube(const VectorFieldModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, const Path& gamma, double radius,
                          const std::vector<double>& eps_grid, const ExperimentConfig& cfg) {
  Timer timer;
  ExperimentReport r = base_report("tube", model, x, y, eps_grid, cfg);
  r.metrics["tube_radius"] = radius;

  const DistanceInfo dist = resolve_distance(model, x, y, cfg);
  r.notes["distance_source"] = dist.source;
  if (!dist.ok) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "distance estimate did not converge";
    r.runtime_s = timer.seconds();
    return r;
  }
  const double j0 = rate_function(model, x, y, gamma, dist.d, cfg.opt);
  if (!std::isfinite(j0)) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "reference path is not horizontal at the configured tolerance";
    r.runtime_s = timer.seconds();
    return r;
  }
  r.metrics["rate_value"] = j0;
  r.metrics["distance"] = dist.d;

  const Eigen::MatrixXd ref = resample_path(gamma, cfg.steps_N);
  std::vector<double> fit_eps, fit_v;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double eps = eps_grid[i];
    EstimateRecord rec;
    try {
      const BridgeEnsemble ens =
          bridge_for(model, x, y, eps, 2000 + i, target_for(cfg, i), cfg);
      std::vector<double> inside(ens.paths.size());
      for (std::size_t p = 0; p < ens.paths.size(); ++p)
        inside[p] = sup_distance(model, ens.paths[p].points, ref) < radius ? 1.0 : 0.0;
      rec = rate_estimate(eps, inside);
      rec.extras["acceptance_rate"] = ens.acceptance_rate;
      rec.extras["proposals"] = static_cast<double>(ens.num_proposals);
      rec.extras["ball_radius"] = ens.ball_radius;
    } catch (const EmptyEnsemble& e) {
      rec.eps = eps;
      rec.flagged = true;
      rec.extras["empty_ensemble"] = 1.0;
      rec.extras["proposals"] = static_cast<double>(e.num_proposals);
    }
    if (!rec.flagged) {
      fit_eps.push_back(eps);
      fit_v.push_back(rec.value);
    }
    r.estimates.push_back(std::move(rec));
  }

  r.tolerance = cfg.tol_rate;
  if (fit_eps.size() < 2) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "fewer than two usable tube estimates";
    r.runtime_s = timer.seconds();
    return r;
  }
  const LinearFit lin = fit_line(fit_eps, fit_v);
  FitRecord f;
  f.model = "linear";
  f.slope = lin.slope;
  f.intercept = lin.intercept;
  f.target = -j0;
  f.relative_error = f.target != 0.0 ? std::fabs(f.intercept - f.target) / std::fabs(f.target)
                                     : std::fabs(f.intercept);
  r.notes["tolerance_mode"] = "sandwich";
  r.verdict = (f.intercept >= -j0 - cfg.tol_rate && f.intercept <= cfg.tol_rate) ? "pass" : "fail";
  r.fit = std::move(f);
  r.runtime_s = timer.seconds();
  return r;
}

ExperimentReport run_concentration(const VectorFieldModel& model, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y, const std::vector<double>& eps_grid,
                                   double delta, const ExperimentConfig& cfg) {
  Timer timer;
  ExperimentReport r = base_report("concentration", model, x, y, eps_grid, cfg);
  r.metrics["delta"] = delta;
  r.tolerance = cfg.tol_floor;

  OptimizerOptions opt = cfg.opt;
  opt.seed = derive_seed(cfg.seed, 777);
  opt.workers = cfg.workers;
  const GeodesicResult geo = minimize_energy(model, x, y, opt);
  if (!geo.converged) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "energy minimizer did not converge";
    r.runtime_s = timer.seconds();
    return r;
  }
  if (!geo.unique_minimizer) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "energy minimizer is not unique at the resolved tolerance";
    r.metrics["near_optima"] = static_cast<double>(geo.near_optima.size());
    r.runtime_s = timer.seconds();
    return r;
  }
  r.metrics["minimizer_energy"] = geo.energy;

  const Eigen::MatrixXd ref = resample_path(geo.path, cfg.steps_N);
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double eps = eps_grid[i];
    EstimateRecord rec;
    rec.eps = eps;
    try {
      const BridgeEnsemble ens =
          bridge_for(model, x, y, eps, 3000 + i, target_for(cfg, i), cfg);
      std::vector<double> inside(ens.paths.size());
      for (std::size_t p = 0; p < ens.paths.size(); ++p)
        inside[p] = sup_distance(model, ens.paths[p].points, ref) < delta ? 1.0 : 0.0;
      const BatchStats bs = batched_mean(inside);
      rec.value = bs.mean;
      rec.std_error = bs.std_error;
      rec.sample_size = static_cast<long long>(ens.paths.size());
      rec.extras["acceptance_rate"] = ens.acceptance_rate;
      rec.extras["proposals"] = static_cast<double>(ens.num_proposals);
      rec.extras["ball_radius"] = ens.ball_radius;
    } catch (const EmptyEnsemble& e) {
      rec.flagged = true;
      rec.extras["empty_ensemble"] = 1.0;
      rec.extras["proposals"] = static_cast<double>(e.num_proposals);
    }
    r.estimates.push_back(std::move(rec));
  }

  bool usable = true;
  for (const auto& e : r.estimates) usable = usable && !e.flagged;
  if (!usable || r.estimates.empty()) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "empty bridge ensemble at some eps";
    r.runtime_s = timer.seconds();
    return r;
  }

  bool monotone = true;
  for (std::size_t i = 0; i + 1 < r.estimates.size(); ++i) {
    const auto& a = r.estimates[i];
    const auto& b = r.estimates[i + 1];
    const double slack =
        2.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    if (b.value < a.value - slack) monotone = false;
  }
  const double f_final = r.estimates.back().value;
  r.metrics["f_final"] = f_final;
  r.metrics["monotone"] = monotone ? 1.0 : 0.0;
  r.verdict = (monotone && f_final >= cfg.tol_floor) ? "pass" : "fail";
  r.runtime_s = timer.seconds();
  return r;
}

ExperimentReport run_tightness(const VectorFieldModel& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y, const std::vector<double>& eps_grid,
                               double alpha, int window_n, double K_threshold,
                               const ExperimentConfig& cfg) {
  Timer timer;
  ExperimentReport r = base_report("tightness", model, x, y, eps_grid, cfg);
  r.metrics["alpha"] = alpha;
  r.metrics["window_n"] = static_cast<double>(window_n);
  r.metrics["K_threshold"] = K_threshold;

  std::vector<double> Ks = {K_threshold};
  if (cfg.thresholds.empty())
    Ks.push_back(2.0 * K_threshold);
  else
    Ks.insert(Ks.end(), cfg.thresholds.begin(), cfg.thresholds.end());

  // survival per threshold and eps, for the fixed-eps monotonicity check
  std::vector<std::vector<double>> r_hat(eps_grid.size());
  std::vector<std::vector<bool>> r_flag(eps_grid.size());

  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double eps = eps_grid[i];
    EstimateRecord rec;
    rec.eps = eps;
    try {
      const BridgeEnsemble ens =
          bridge_for(model, x, y, eps, 4000 + i, target_for(cfg, i), cfg);
      const std::size_t n = ens.paths.size();
      std::vector<double> norms(n);
      for (std::size_t p = 0; p < n; ++p)
        norms[p] = holder_stats(model, ens.paths[p], alpha, window_n).window_norm;

      rec.sample_size = static_cast<long long>(n);
      rec.extras["acceptance_rate"] = ens.acceptance_rate;
      for (std::size_t kview = 0; kview < Ks.size(); ++kview) {
        const double K = Ks[kview];
        std::vector<double> exceed(n);
        long long count = 0;
        for (std::size_t p = 0; p < n; ++p) {
          exceed[p] = norms[p] > K ? 1.0 : 0.0;
          count += norms[p] > K ? 1 : 0;
        }
        double rate;
        bool flagged = false;
        double se = 0.0;
        if (count == 0) {
          rate = rule_of_three(n);
          flagged = true;
        } else {
          const BatchStats bs = batched_mean(exceed);
          rate = bs.mean;
          se = bs.std_error;
        }
        r_hat[i].push_back(rate);
        r_flag[i].push_back(flagged);

        char key[64];
        std::snprintf(key, sizeof(key), "r_hat_K%g", K);
        rec.extras[key] = rate;
        std::snprintf(key, sizeof(key), "exceed_K%g", K);
        rec.extras[key] = static_cast<double>(count);

        if (kview == 0) {
          rec.value = eps * std::log(rate);
          rec.std_error = count == 0 ? 0.0 : eps * se / rate;
          rec.flagged = flagged;
          rec.extras["r_hat"] = rate;
          rec.extras["exceedances"] = static_cast<double>(count);
        }
      }
    } catch (const EmptyEnsemble& e) {
      rec.flagged = true;
      rec.extras["empty_ensemble"] = 1.0;
      rec.extras["proposals"] = static_cast<double>(e.num_proposals);
      r_hat[i].assign(Ks.size(), 1.0);
      r_flag[i].assign(Ks.size(), true);
    }
    r.estimates.push_back(std::move(rec));
  }

  // Condition 1: eps * log r_hat(K_threshold) decreasing in eps, i.e. strictly
  // increasing along the (decreasing) grid; strict only between unflagged points.
  bool eps_monotone = true;
  for (std::size_t i = 0; i + 1 < r.estimates.size(); ++i) {
    const auto& a = r.estimates[i];
    const auto& b = r.estimates[i + 1];
    const bool strict = !a.flagged && !b.flagged;
    if (strict ? !(a.value < b.value) : !(a.value <= b.value)) eps_monotone = false;
  }

  // Condition 2: at fixed eps, survival non-increasing in the threshold.
  bool k_monotone = true;
  for (std::size_t i = 0; i < eps_grid.size(); ++i)
    for (std::size_t kview = 0; kview + 1 < Ks.size(); ++kview) {
      const bool strict = !r_flag[i][kview] && !r_flag[i][kview + 1];
      const double lo = r_hat[i][kview], hi = r_hat[i][kview + 1];
      if (strict ? !(hi < lo) : !(hi <= lo)) k_monotone = false;
    }

  r.metrics["eps_monotone"] = eps_monotone ? 1.0 : 0.0;
  r.metrics["threshold_monotone"] = k_monotone ? 1.0 : 0.0;
  r.verdict = (eps_monotone && k_monotone) ? "pass" : "fail";
  r.runtime_s = timer.seconds();
  return r;
}

ExperimentReport run_reversal(const VectorFieldModel& model, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, double eps, const ExperimentConfig& cfg) {
  Timer timer;
  const double eps2 = cfg.eps_second > 0.0 ? cfg.eps_second : eps;
  std::vector<double> grid;
  if (eps == eps2)
    grid = {eps};
  else
    grid = {std::max(eps, eps2), std::min(eps, eps2)};
  ExperimentReport r = base_report("reversal", model, x, y, grid, cfg);
  r.tolerance = cfg.p_threshold;

  if (!model.self_adjoint) {
    r.verdict = "inconclusive";
    r.notes["reason"] =
        "generator is not self-adjoint (drift or non-divergence-free fields); time "
        "reversal is not expected to preserve the bridge law";
    r.runtime_s = timer.seconds();
    return r;
  }
  if (eps != eps2) r.notes["control"] = "deliberately mismatched noise scales";

  // A wide acceptance ball breaks the forward/backward symmetry of the *sampler*
  // (exact start vs smeared start); keep it tight by default so the comparison
  // probes the kernel, not the ball.
  ExperimentConfig rcfg = cfg;
  if (rcfg.ball_radius_factor <= 0.0) rcfg.ball_radius_factor = 0.15;

  try {
    const BridgeEnsemble fwd = bridge_for(model, x, y, eps, 11, target_for(rcfg, 0), rcfg);
    BridgeEnsemble bwd;
    {
      SimConfig sim;
      sim.epsilon = eps2;
      sim.steps_N = rcfg.steps_N;
      sim.seed = derive_seed(rcfg.seed, 22);
      sim.workers = rcfg.workers;
      const double ball = rcfg.ball_radius_factor * std::sqrt(eps2);
      bwd = sample_bridge(model, y, x, sim, ball, rcfg.max_proposals,
                          target_for(rcfg, rcfg.target_accepted.size() > 1 ? 1 : 0));
    }
    const BridgeEnsemble rev = reverse_ensemble(fwd);

    const int mid = cfg.steps_N / 2;
    const std::size_t n1 = rev.paths.size();
    const std::size_t n2 = bwd.paths.size();
    r.metrics["n_fwd"] = static_cast<double>(n1);
    r.metrics["n_bwd"] = static_cast<double>(n2);

    double min_p_adj = 1.0;
    bool all_pass = true;
    for (int c = 0; c < model.dim_m; ++c) {
      std::vector<double> a(n1), b(n2);
      const bool periodic = model.is_periodic(c);
      for (std::size_t p = 0; p < n1; ++p) {
        const double v = rev.paths[p].points(mid, c);
        a[p] = periodic ? std::remainder(v, kTwoPi) : v;
      }
      for (std::size_t p = 0; p < n2; ++p) {
        const double v = bwd.paths[p].points(mid, c);
        b[p] = periodic ? std::remainder(v, kTwoPi) : v;
      }
      const double D = ks_statistic(a, b);
      const double p_val = ks_pvalue(D, n1, n2);
      const double p_adj = std::min(1.0, p_val * model.dim_m);
      min_p_adj = std::min(min_p_adj, p_adj);
      all_pass = all_pass && p_adj > cfg.p_threshold;

      EstimateRecord rec;
      rec.eps = eps;
      rec.value = D;
      rec.std_error = std::sqrt(static_cast<double>(n1 + n2) / (4.0 * n1 * n2));
      rec.sample_size = static_cast<long long>(n1 + n2);
      rec.extras["coordinate"] = static_cast<double>(c);
      rec.extras["p_value"] = p_val;
      rec.extras["p_adjusted"] = p_adj;
      rec.extras["n_fwd"] = static_cast<double>(n1);
      rec.extras["n_bwd"] = static_cast<double>(n2);
      r.estimates.push_back(std::move(rec));
    }
    r.metrics["min_p_adjusted"] = min_p_adj;
    r.verdict = all_pass ? "pass" : "fail";
  } catch (const EmptyEnsemble& e) {
    r.verdict = "inconclusive";
    r.notes["reason"] = "empty bridge ensemble";
    r.metrics["proposals"] = static_cast<double>(e.num_proposals);
  }
  r.runtime_s = timer.seconds();
  return r;
}

}  // namespace srlab
