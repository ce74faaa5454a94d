#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srlab/geodesic.hpp"
#include "srlab/rough.hpp"
#include "srlab/sde.hpp"

namespace srlab {

struct EstimateRecord {
  double eps = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  long long sample_size = 0;
  bool flagged = false;  // e.g. underflow or rule-of-three placeholder
  std::map<std::string, double> extras;

  bool operator==(const EstimateRecord&) const = default;
};

struct FitRecord {
  std::string model;  // "linear" or "prefactor"
  double slope = 0.0;
  double intercept = 0.0;
  double target = 0.0;
  double relative_error = 0.0;
  std::map<std::string, double> extras;

  bool operator==(const FitRecord&) const = default;
};

struct ExperimentReport {
  std::string experiment;  // leandre | tube | concentration | tightness | reversal
  std::string model_name;
  Eigen::VectorXd x, y;
  std::vector<double> eps_grid;  // strictly decreasing
  std::vector<EstimateRecord> estimates;
  std::optional<FitRecord> fit;
  std::uint64_t seed = 0;
  double runtime_s = 0.0;  // wall clock; serialized to a sidecar, not report.json
  std::string verdict;     // pass | fail | inconclusive
  double tolerance = 0.0;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> notes;

  bool operator==(const ExperimentReport& o) const;
};

struct ExperimentConfig {
  std::string model_name = "heisenberg";
  std::map<std::string, std::string> model_params;
  Eigen::VectorXd x, y;
  std::vector<double> eps_grid;

  long long samples_per_eps = 100000;         // heat-kernel sampling
  std::vector<long long> target_accepted;     // bridge acceptances per eps (broadcasts)
  long long max_proposals = 50000000;
  int steps_N = 128;
  // Acceptance ball = factor * sqrt(eps); <= 0 picks the per-experiment default
  // (0.5, except reversal which uses 0.15 so the ball does not mask the symmetry).
  double ball_radius_factor = 0.0;

  double alpha = 0.4;
  int window_n = 8;
  double K_threshold = 6.0;
  std::vector<double> thresholds;  // extra tightness thresholds (default {2K})

  double delta = 0.25;      // concentration tube half-width
  double tube_radius = 0.1;
  double eps_second = 0.0;  // reversal: second-ensemble eps (0 = same)

  std::string fit_model = "prefactor";  // extrapolation model for eps*log fits
  double tol_relative = 0.15;
  double tol_rate = 0.2;
  double tol_floor = 0.9;
  double tol_absolute = 0.1;  // used when the fit target is 0
  double p_threshold = 0.01;

  std::uint64_t seed = 1;
  int workers = 1;
  OptimizerOptions opt;
  std::string gamma_csv;  // tube: explicit reference path (default: the minimizer)
};

// Asymptotics of eps*log p_eps(x, y) against -d(x,y)^2/2.  The default
// extrapolation fits {1, eps, eps*log eps}; the plain linear fit is recorded
// alongside in fit.extras.  Distance comes from the model oracle when it
// applies, otherwise from minimize_energy.
ExperimentReport run_leandre(const VectorFieldModel& model, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y, const std::vector<double>& eps_grid,
                             const ExperimentConfig& cfg);

// Bridge tube probabilities around gamma: fitted limit of eps*log q_eps
// checked against the sandwich [-J(gamma) - tol, +tol].
ExperimentReport run_tube(const VectorFieldModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y, const Path& gamma, double radius,
                          const std::vector<double>& eps_grid, const ExperimentConfig& cfg);

// Fraction of bridge paths within sup-distance delta of the energy minimizer;
// requires a converged, unique minimizer (otherwise inconclusive).
ExperimentReport run_concentration(const VectorFieldModel& model, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y, const std::vector<double>& eps_grid,
                                   double delta, const ExperimentConfig& cfg);

// Tail of the window Holder norm over bridge ensembles: eps*log r_eps must
// decrease in eps, and r_eps must be monotone in the threshold at fixed eps.
ExperimentReport run_tightness(const VectorFieldModel& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y, const std::vector<double>& eps_grid,
                               double alpha, int window_n, double K_threshold,
                               const ExperimentConfig& cfg);

// Midpoint-marginal KS tests between the reversed x->y ensemble and a directly
// sampled y->x ensemble (self-adjoint models only).  cfg.eps_second != eps is
// the deliberate negative control.
ExperimentReport run_reversal(const VectorFieldModel& model, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, double eps, const ExperimentConfig& cfg);

// Helpers shared by experiments and tests.
Eigen::MatrixXd resample_path(const Path& gamma, int N);
double sup_distance(const VectorFieldModel& model, const Eigen::MatrixXd& a,
                    const Eigen::MatrixXd& b);

}  // namespace srlab
