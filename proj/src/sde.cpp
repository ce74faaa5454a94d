#include "srlab/sde.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "srlab/parallel.hpp"
#include "srlab/rng.hpp"
#include "srlab/stats.hpp"

namespace srlab {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Scratch buffers for one trajectory; reused across steps to keep the hot
// loop allocation-free.
struct StepWorkspace {
  Eigen::MatrixXd F0, F1;
  Eigen::VectorXd b0, b1, dw, pred, incr;

  StepWorkspace(int m, int ell)
      : F0(m, ell), F1(m, ell), b0(m), b1(m), dw(ell), pred(m), incr(m) {}
};

// One Euler-Heun step in place.  dw must already hold the increments.
inline void heun_step(const VectorFieldModel& model, Eigen::VectorXd& x, double eps_dt,
                      bool drift, StepWorkspace& ws) {
  model.eval_fields_into(x, ws.F0);
  ws.pred.noalias() = x + ws.F0 * ws.dw;
  if (drift) {
    model.eval_drift_into(x, ws.b0);
    ws.pred.noalias() += eps_dt * ws.b0;
  }
  model.eval_fields_into(ws.pred, ws.F1);
  ws.incr.noalias() = 0.5 * ((ws.F0 + ws.F1) * ws.dw);
  if (drift) {
    model.eval_drift_into(ws.pred, ws.b1);
    ws.incr.noalias() += 0.5 * eps_dt * (ws.b0 + ws.b1);
  }
  x += ws.incr;
}

// Runs one indexed trajectory; invokes record(k, x) after every step when
// record is non-null (k = 1..N).  Shared by all entry points so that the
// arithmetic -- and hence the result -- is identical with or without storage.
template <typename Record>
Eigen::VectorXd run_trajectory(const VectorFieldModel& model, const Eigen::VectorXd& x0,
                               const SimConfig& cfg, std::uint64_t index, Record&& record) {
  if (cfg.scheme != "euler_heun")
    throw std::invalid_argument("unknown scheme: " + cfg.scheme);
  const int N = cfg.steps_N;
  const int m = model.dim_m;
  const int ell = model.num_fields_ell;
  const double sd = std::sqrt(cfg.epsilon / N);
  const double eps_dt = cfg.epsilon / N;
  const bool drift = cfg.drift_on && !model.drift_is_zero;

  RandomStream rng = RandomStream::for_index(cfg.seed, index);
  StepWorkspace ws(m, ell);
  Eigen::VectorXd x = x0;
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < ell; ++i) ws.dw[i] = sd * rng.normal();
    heun_step(model, x, eps_dt, drift, ws);
    if (!x.allFinite()) throw SimulationDiverged(k);
    record(k + 1, x);
  }
  return x;
}

struct NoRecord {
  void operator()(int, const Eigen::VectorXd&) const {}
};

}  // namespace

Path simulate_indexed(const VectorFieldModel& model, const Eigen::VectorXd& x0,
                      const SimConfig& cfg, std::uint64_t index) {
  Path p;
  p.grid_K = cfg.steps_N;
  p.points.resize(cfg.steps_N + 1, model.dim_m);
  p.points.row(0) = x0.transpose();
  run_trajectory(model, x0, cfg, index,
                 [&](int k, const Eigen::VectorXd& x) { p.points.row(k) = x.transpose(); });
  return p;
}

Path simulate(const VectorFieldModel& model, const Eigen::VectorXd& x0, const SimConfig& cfg) {
  return simulate_indexed(model, x0, cfg, 0);
}

Eigen::VectorXd simulate_endpoint(const VectorFieldModel& model, const Eigen::VectorXd& x0,
                                  const SimConfig& cfg, std::uint64_t index) {
  return run_trajectory(model, x0, cfg, index, NoRecord{});
}

BridgeEnsemble sample_bridge(const VectorFieldModel& model, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y, const SimConfig& cfg, double ball_radius,
                             long long max_proposals, long long target_count) {
  // Phase A: scan endpoints in fixed chunks; acceptance is a pure function of
  // the trajectory index, so the accepted set is worker-count independent.
  constexpr long long kChunk = 8192;
  std::vector<long long> accepted;
  long long scanned = 0;
  std::vector<unsigned char> hit(kChunk);

  while (scanned < max_proposals) {
    const long long chunk = std::min(kChunk, max_proposals - scanned);
    parallel_for(static_cast<std::size_t>(chunk), cfg.workers, [&](std::size_t j) {
      const Eigen::VectorXd end =
          simulate_endpoint(model, x, cfg, static_cast<std::uint64_t>(scanned + j));
      hit[j] = ambient_distance(model, end, y) < ball_radius ? 1 : 0;
    });
    // serial in-order scan keeps the accepted list deterministic
    bool reached = false;
    long long used = chunk;
    for (long long j = 0; j < chunk; ++j) {
      if (!hit[j]) continue;
      accepted.push_back(scanned + j);
      if (target_count > 0 && static_cast<long long>(accepted.size()) >= target_count) {
        reached = true;
        used = j + 1;
        break;
      }
    }
    scanned += used;
    if (reached) break;
  }

  if (accepted.empty()) throw EmptyEnsemble(scanned, ball_radius);

  BridgeEnsemble ens;
  ens.x = x;
  ens.y = y;
  ens.epsilon = cfg.epsilon;
  ens.ball_radius = ball_radius;
  ens.num_proposals = scanned;
  ens.seed = cfg.seed;
  ens.steps_N = cfg.steps_N;
  ens.acceptance_rate = static_cast<double>(accepted.size()) / static_cast<double>(scanned);

  // Phase B: re-simulate the accepted indices, now storing full paths.
  ens.paths.resize(accepted.size());
  parallel_for(accepted.size(), cfg.workers, [&](std::size_t i) {
    ens.paths[i] = simulate_indexed(model, x, cfg, static_cast<std::uint64_t>(accepted[i]));
  });
  return ens;
}

BridgeEnsemble reverse_ensemble(const BridgeEnsemble& ens) {
  BridgeEnsemble rev = ens;
  rev.x = ens.y;
  rev.y = ens.x;
  for (std::size_t i = 0; i < ens.paths.size(); ++i)
    rev.paths[i].points = ens.paths[i].points.colwise().reverse().eval();
  return rev;
}

double silverman_bandwidth(long long n, int d, double epsilon) {
  const double factor = std::pow(4.0 / ((d + 2.0) * static_cast<double>(n)), 1.0 / (d + 4.0));
  return factor * std::sqrt(epsilon);
}

namespace {

KernelEstimate kde_at(const VectorFieldModel& model, const Eigen::MatrixXd& endpoints,
                      const Eigen::VectorXd& y, double h) {
  const long long n = endpoints.rows();
  const int d = model.dim_m;
  const double log_norm = -0.5 * d * std::log(2.0 * kPi) - d * std::log(h);

  std::vector<bool> periodic(d, false);
  for (int c : model.periodic_dims)
    if (c >= 0 && c < d) periodic[c] = true;

  std::vector<double> contrib(static_cast<std::size_t>(n));
  double min_r2 = std::numeric_limits<double>::infinity();
  const double inv_h = 1.0 / h;
  for (long long i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
      double diff = endpoints(i, c) - y[c];
      if (periodic[c]) diff = std::remainder(diff, 2.0 * kPi);
      diff *= inv_h;
      r2 += diff * diff;
    }
    min_r2 = std::min(min_r2, r2);
    contrib[static_cast<std::size_t>(i)] = std::exp(log_norm - 0.5 * r2);
  }
  const double min_scaled = std::sqrt(min_r2);

  KernelEstimate est;
  est.min_scaled_distance = min_scaled;
  if (min_scaled > 8.0) {
    est.underflow = true;
    return est;
  }
  const BatchStats bs = batched_mean(contrib);
  est.value = bs.mean;
  est.std_error = bs.std_error;
  return est;
}

}  // namespace

std::vector<KernelEstimate> heat_kernel_at_points(const VectorFieldModel& model,
                                                  const Eigen::VectorXd& x,
                                                  const std::vector<Eigen::VectorXd>& targets,
                                                  const SimConfig& cfg, double bandwidth,
                                                  long long num_samples) {
  const double h =
      bandwidth > 0.0 ? bandwidth : silverman_bandwidth(num_samples, model.dim_m, cfg.epsilon);

  Eigen::MatrixXd endpoints(num_samples, model.dim_m);
  parallel_for(static_cast<std::size_t>(num_samples), cfg.workers, [&](std::size_t i) {
    endpoints.row(static_cast<long long>(i)) =
        simulate_endpoint(model, x, cfg, static_cast<std::uint64_t>(i)).transpose();
  });

  std::vector<KernelEstimate> out(targets.size());
  parallel_for(targets.size(), cfg.workers,
               [&](std::size_t t) { out[t] = kde_at(model, endpoints, targets[t], h); });
  return out;
}

KernelEstimate estimate_heat_kernel_detail(const VectorFieldModel& model,
                                           const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                           const SimConfig& cfg, double bandwidth,
                                           long long num_samples) {
  return heat_kernel_at_points(model, x, {y}, cfg, bandwidth, num_samples)[0];
}

double estimate_heat_kernel(const VectorFieldModel& model, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y, const SimConfig& cfg, double bandwidth,
                            long long num_samples) {
  const KernelEstimate est =
      estimate_heat_kernel_detail(model, x, y, cfg, bandwidth, num_samples);
  if (est.underflow)
    std::fprintf(stderr,
                 "warning: kernel estimate underflow (nearest sample %.2f bandwidths away); "
                 "reporting 0\n",
                 est.min_scaled_distance);
  return est.value;
}

}  // namespace srlab
