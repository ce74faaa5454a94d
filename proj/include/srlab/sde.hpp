#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlab/control.hpp"

namespace srlab {

struct SimConfig {
  double epsilon = 0.1;  // noise scale: the generator is epsilon * L
  int steps_N = 128;
  std::uint64_t seed = 1;
  std::string scheme = "euler_heun";
  bool drift_on = false;
  int workers = 1;
};

struct SimulationDiverged : std::runtime_error {
  int step;
  explicit SimulationDiverged(int s)
      : std::runtime_error("simulation diverged at step " + std::to_string(s)), step(s) {}
};

struct EmptyEnsemble : std::runtime_error {
  long long num_proposals;
  double ball_radius;
  EmptyEnsemble(long long proposals, double radius)
      : std::runtime_error("no accepted bridge proposals out of " + std::to_string(proposals) +
                           " (ball radius " + std::to_string(radius) + ")"),
        num_proposals(proposals),
        ball_radius(radius) {}
};

struct BridgeEnsemble {
  Eigen::VectorXd x, y;
  double epsilon = 0.0;
  std::vector<Path> paths;
  double acceptance_rate = 0.0;
  double ball_radius = 0.0;
  long long num_proposals = 0;
  std::uint64_t seed = 0;
  int steps_N = 0;
};

// Euler-Heun (Stratonovich predictor-corrector) trajectory on N uniform steps;
// per-component Brownian increments are N(0, epsilon/N), drift enters as
// epsilon * V * dt when drift_on.  simulate() is trajectory index 0 of the
// seed's stream; simulate_indexed(i) is trajectory i (bitwise reproducible
// regardless of which thread runs it).
Path simulate(const VectorFieldModel& model, const Eigen::VectorXd& x0, const SimConfig& cfg);
Path simulate_indexed(const VectorFieldModel& model, const Eigen::VectorXd& x0,
                      const SimConfig& cfg, std::uint64_t index);
// Endpoint of simulate_indexed without storing the trajectory (same arithmetic).
Eigen::VectorXd simulate_endpoint(const VectorFieldModel& model, const Eigen::VectorXd& x0,
                                  const SimConfig& cfg, std::uint64_t index);

// Rejection sampler: accepts trajectories whose endpoint lies in the ambient
// ball B(y, ball_radius), scanning trajectory indices in order until
// target_count acceptances (0 = no target) or max_proposals.  The accepted
// index set -- and so every output -- is independent of the worker count.
// Throws EmptyEnsemble when nothing is accepted.
BridgeEnsemble sample_bridge(const VectorFieldModel& model, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y, const SimConfig& cfg, double ball_radius,
                             long long max_proposals, long long target_count = 0);

// Time reversal: every path reversed, x and y swapped, metadata preserved.
BridgeEnsemble reverse_ensemble(const BridgeEnsemble& ens);

struct KernelEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool underflow = false;
  double min_scaled_distance = 0.0;  // min over samples of |endpoint - y| in bandwidth units
};

// Gaussian product-kernel density estimate of the transition density at y
// (wrap-aware on periodic coordinates).  bandwidth > 0: isotropic fixed
// bandwidth; bandwidth <= 0: Silverman's factor (4/((d+2)n))^(1/(d+4)) scaled
// by sqrt(epsilon).  Standard error from 20 index batches.
KernelEstimate estimate_heat_kernel_detail(const VectorFieldModel& model,
                                           const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                           const SimConfig& cfg, double bandwidth,
                                           long long num_samples);

// Headline estimate; returns 0 (with a warning on stderr) when all sampled
// mass is farther than 8 bandwidths from y.
double estimate_heat_kernel(const VectorFieldModel& model, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y, const SimConfig& cfg, double bandwidth,
                            long long num_samples);

// One shared sample of endpoints evaluated at many targets (used for
// normalization checks and grids of query points).
std::vector<KernelEstimate> heat_kernel_at_points(const VectorFieldModel& model,
                                                  const Eigen::VectorXd& x,
                                                  const std::vector<Eigen::VectorXd>& targets,
                                                  const SimConfig& cfg, double bandwidth,
                                                  long long num_samples);

double silverman_bandwidth(long long n, int d, double epsilon);

}  // namespace srlab
