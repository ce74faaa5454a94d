// End-to-end acceptance checks for the laboratory. Each check prints one
// [PASS]/[FAIL] line with the measured numbers and pinned tolerances; the
// process exit code is the number of failed checks. The CLI binary under
// test is passed as --srlab-bin <path>.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srlab/experiment.hpp"
#include "srlab/io.hpp"
#include "srlab/rng.hpp"
#include "srlab/stats.hpp"

using namespace srlab;

namespace {

int g_failures = 0;

void verdict_line(int idx, bool ok, const std::string& detail) {
  std::printf("[%s] %d: %s\n", ok ? "PASS" : "FAIL", idx, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

struct CliResult {
  std::string output;
  int exit_code = -1;
  double secs = 0.0;
};

CliResult run_cli(const std::string& cmd) {
  CliResult r;
  const auto t0 = std::chrono::steady_clock::now();
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.secs = seconds_since(t0);
  return r;
}

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Eigen::MatrixXd brownian_points(int K, int ell, double step_sd, std::uint64_t seed) {
  RandomStream rng(seed);
  Eigen::MatrixXd w(K + 1, ell);
  w.row(0).setZero();
  for (int k = 1; k <= K; ++k)
    for (int c = 0; c < ell; ++c) w(k, c) = w(k - 1, c) + step_sd * rng.normal();
  return w;
}

// 1: the CLI resolves both flavors of Carnot-Caratheodory distance.
void check_cli_distance(const std::string& bin) {
  auto probe = [&](const std::string& to, double want, double rel_tol, double* d_out,
                   double* secs) {
    const CliResult r = run_cli(bin + " distance --model heisenberg --from 0,0,0 --to " + to +
                                " --grid 64 --restarts 8 --seed 1 --workers 3");
    *secs = r.secs;
    *d_out = std::numeric_limits<double>::quiet_NaN();
    if (r.exit_code != 0) return false;
    const auto j = nlohmann::json::parse(r.output, nullptr, false);
    if (j.is_discarded() || !j.contains("distance")) return false;
    *d_out = j["distance"].get<double>();
    return std::fabs(*d_out - want) <= rel_tol * want && r.secs < 30.0;
  };
  double d1 = 0, s1 = 0, d2 = 0, s2 = 0;
  const bool ok1 = probe("1,0,0", 1.0, 0.01, &d1, &s1);
  const bool ok2 = probe("0,0,0.3183098861837907", 2.0, 0.02, &d2, &s2);
  verdict_line(1, ok1 && ok2,
               fmt("cli distance: planar d=%.6f (want 1 within 1%%, %.1fs), "
                   "vertical d=%.6f (want 2 within 2%%, %.1fs), budget 30s each",
                   d1, s1, d2, s2));
}

// 2: the adjoint endpoint gradient agrees with central differences.
void check_endpoint_gradient() {
  const auto t0 = std::chrono::steady_clock::now();
  RandomStream rng(424242);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const VectorFieldModel m = make_model(trial % 2 == 0 ? "heisenberg" : "torus_hypo");
    const int K = 10;
    Control h;
    h.grid_K = K;
    h.values.setZero(K + 1, 2);
    for (int k = 1; k <= K; ++k)
      for (int c = 0; c < 2; ++c) h.values(k, c) = 0.5 * rng.normal();
    Eigen::VectorXd x0(m.dim_m), target(m.dim_m);
    for (int c = 0; c < m.dim_m; ++c) {
      x0(c) = 0.3 * rng.normal();
      target(c) = x0(c) + 0.7 * rng.normal();
    }

    const auto objective = [&](const Control& hh) {
      const Eigen::VectorXd e = integrate(m, x0, hh).endpoint();
      double s = 0.0;
      for (int c = 0; c < m.dim_m; ++c) {
        double d = e(c) - target(c);
        if (m.is_periodic(c)) d = std::remainder(d, 2.0 * M_PI);
        s += d * d;
      }
      return 0.5 * s;
    };

    const Eigen::MatrixXd g = endpoint_gradient(m, x0, h, target);
    const double delta = 1e-5;
    Eigen::MatrixXd fd = Eigen::MatrixXd::Zero(K + 1, 2);
    for (int k = 1; k <= K; ++k)
      for (int c = 0; c < 2; ++c) {
        Control hp = h, hm = h;
        hp.values(k, c) += delta;
        hm.values(k, c) -= delta;
        fd(k, c) = (objective(hp) - objective(hm)) / (2.0 * delta);
      }
    const double rel = (g - fd).norm() / std::max(fd.norm(), 1e-12);
    worst = std::max(worst, rel);
  }
  const double secs = seconds_since(t0);
  verdict_line(2, worst < 1e-4 && secs < 10.0,
               fmt("endpoint gradient vs central differences: worst rel %.3e over 50 random "
                   "cases (tol 1e-4), %.1fs (budget 10s)",
                   worst, secs));
}

// 3: the rate function vanishes on minimizers, rejects non-horizontal paths,
//    and prices a detour by its excess Dirichlet energy.
void check_rate_function() {
  const VectorFieldModel m = make_model("heisenberg");
  const Eigen::VectorXd x = vec3(0, 0, 0), y = vec3(1, 0, 0);
  OptimizerOptions opt;
  opt.seed = 5;
  opt.workers = 3;

  const GeodesicResult res = minimize_energy(m, x, y, opt);
  const double j_min = rate_function(m, x, y, res.path, res.distance_estimate, opt);
  const bool ok_min = res.converged && std::fabs(j_min) <= 1e-3;

  Path vertical;
  vertical.grid_K = 64;
  vertical.points.setZero(65, 3);
  for (int k = 0; k <= 64; ++k) vertical.points(k, 2) = 0.3 * k / 64.0;
  const double j_vert =
      rate_function(m, x, vec3(0, 0, 0.3), vertical, 2.0 * std::sqrt(M_PI * 0.3), opt);
  const bool ok_vert = std::isinf(j_vert) && j_vert > 0;

  const int K = 2048;
  Control detour;
  detour.grid_K = K;
  detour.values.setZero(K + 1, 2);
  for (int k = 0; k <= K; ++k) {
    const double t = static_cast<double>(k) / K;
    detour.values(k, 0) = t;
    detour.values(k, 1) = 0.15 * std::sin(2.0 * M_PI * t);
  }
  const double energy = h1_norm_sq(detour);
  const Path gamma = integrate(m, x, detour);
  const double j_detour = rate_function(m, x, y, gamma, 1.0, opt);
  const double want = 0.5 * (energy - 1.0);
  const bool ok_detour = std::fabs(j_detour - want) <= 0.01 * want;

  verdict_line(3, ok_min && ok_vert && ok_detour,
               fmt("rate function: J(minimizer)=%.2e (tol 1e-3), J(vertical)=%s, "
                   "J(detour)=%.6f vs (energy-d^2)/2=%.6f (tol 1%%)",
                   j_min, std::isinf(j_vert) ? "inf" : "finite", j_detour, want));
}

// 4: the small-noise kernel exponent at a planar point extrapolates to -d^2/2.
void check_kernel_exponent() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.samples_per_eps = 100000;
  cfg.steps_N = 128;
  cfg.seed = 8;
  cfg.workers = 3;
  const VectorFieldModel m = make_model("heisenberg");
  const ExperimentReport r =
      run_leandre(m, vec3(0, 0, 0), vec3(1, 0, 0), {0.5, 0.3, 0.2, 0.15, 0.1}, cfg);
  const double secs = seconds_since(t0);
  const double intercept = r.fit ? r.fit->intercept : std::numeric_limits<double>::quiet_NaN();
  const bool ok = r.verdict == "pass" && std::fabs(intercept + 0.5) <= 0.075 && secs < 600.0;
  verdict_line(4, ok,
               fmt("kernel exponent: eps*log p extrapolates to %.4f (want -0.5 within 15%%), "
                   "verdict=%s, %.0fs (budget 600s)",
                   intercept, r.verdict.c_str(), secs));
}

// 5: bridge mass concentrates in a delta-tube around the unique geodesic.
void check_concentration() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.target_accepted = {400, 400, 300, 150};
  cfg.steps_N = 128;
  cfg.seed = 2026;
  cfg.workers = 3;
  cfg.tol_floor = 0.9;
  cfg.max_proposals = 200000000;
  const VectorFieldModel m = make_model("heisenberg");
  const ExperimentReport r =
      run_concentration(m, vec3(0, 0, 0), vec3(1, 0, 0), {0.5, 0.2, 0.1, 0.05}, 0.25, cfg);
  const double secs = seconds_since(t0);

  std::string series;
  for (const auto& e : r.estimates)
    series += fmt("f(%.2f)=%.3f+-%.3f ", e.eps, e.value, e.std_error);
  const bool ok = r.verdict == "pass" && secs < 900.0;
  verdict_line(5, ok,
               fmt("concentration at delta=0.25: %smonotone=%g, floor f(0.05)>=0.9, verdict=%s, "
                   "%.0fs (budget 900s)",
                   series.c_str(), r.metrics.count("monotone") ? r.metrics.at("monotone") : 0.0,
                   r.verdict.c_str(), secs));
}

// 6: window-norm tail bounds tighten along the eps grid and in the threshold.
void check_tightness() {
  ExperimentConfig cfg;
  cfg.target_accepted = {400};
  cfg.steps_N = 64;
  cfg.seed = 11;
  cfg.workers = 3;
  const VectorFieldModel m = make_model("heisenberg");
  const ExperimentReport r =
      run_tightness(m, vec3(0, 0, 0), vec3(0, 0, 0), {0.5, 0.2, 0.1}, 0.4, 8, 6.0, cfg);

  std::string series;
  for (const auto& e : r.estimates)
    series += fmt("v(%.2f)=%.4f%s ", e.eps, e.value, e.flagged ? "*" : "");
  const bool ok = r.verdict == "pass" && r.metrics.at("eps_monotone") == 1.0 &&
                  r.metrics.at("threshold_monotone") == 1.0;
  verdict_line(6, ok,
               fmt("tightness at K=6, alpha=0.4, n=8: %s(* = zero-exceedance upper bound), "
                   "eps_monotone=%g, threshold_monotone=%g, verdict=%s",
                   series.c_str(), r.metrics.at("eps_monotone"),
                   r.metrics.at("threshold_monotone"), r.verdict.c_str()));
}

// 7: the homogeneous rough norm obeys Brownian scaling in law.
void check_brownian_scaling() {
  const int K = 256, n = 1000;
  const double tau = 0.25, alpha = 0.4;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rough_norm(brownian_points(K, 2, std::sqrt(tau / K), derive_seed(701, i)), alpha)
               .homogeneous;
    b[i] = std::sqrt(tau) *
           rough_norm(brownian_points(K, 2, std::sqrt(1.0 / K), derive_seed(702, i)), alpha)
               .homogeneous;
  }
  const double d = ks_statistic(a, b);
  const double p = ks_pvalue(d, n, n);
  verdict_line(7, p > 0.01,
               fmt("brownian scaling: KS(norm on [0,%.2f], sqrt(%.2f)*norm on [0,1]) D=%.4f "
                   "p=%.3f (need p>0.01, n=%d)",
                   tau, tau, d, p, n));
}

// 8: bridge time reversal is invisible to KS at matched noise and glaring at
//    mismatched noise.
void check_reversal() {
  const VectorFieldModel m = make_model("heisenberg");

  // Fine time grid and a tight acceptance ball: the reversed sampler starts from a
  // smeared point while the forward one starts exactly, and Euler chains reverse only
  // to O(dt), so both knobs must be small for the comparison to probe the kernel.
  ExperimentConfig cfg;
  cfg.target_accepted = {1200};
  cfg.steps_N = 256;
  cfg.seed = 17;
  cfg.workers = 3;
  cfg.ball_radius_factor = 0.10;
  const ExperimentReport pass_run = run_reversal(m, vec3(0, 0, 0), vec3(0.4, 0.2, 0), 0.2, cfg);

  ExperimentConfig ctrl;
  ctrl.target_accepted = {400};
  ctrl.steps_N = 128;
  ctrl.seed = 13;
  ctrl.workers = 3;
  ctrl.eps_second = 0.1;
  const ExperimentReport ctrl_run = run_reversal(m, vec3(0, 0, 0), vec3(0, 0, 0), 0.5, ctrl);

  const double p_pass = pass_run.metrics.count("min_p_adjusted")
                            ? pass_run.metrics.at("min_p_adjusted")
                            : 0.0;
  const double p_ctrl = ctrl_run.metrics.count("min_p_adjusted")
                            ? ctrl_run.metrics.at("min_p_adjusted")
                            : 1.0;
  const bool ok = pass_run.verdict == "pass" && p_pass > 0.01 && ctrl_run.verdict == "fail";
  verdict_line(8, ok,
               fmt("bridge reversal: matched-noise min adjusted p=%.3f (need >0.01, verdict=%s); "
                   "mismatched-noise control p=%.1e (verdict=%s, need fail)",
                   p_pass, pass_run.verdict.c_str(), p_ctrl, ctrl_run.verdict.c_str()));
}

// 9: reports are bitwise reproducible across reruns and worker counts.
void check_reproducibility() {
  const VectorFieldModel heis = make_model("heisenberg");
  const std::filesystem::path base =
      std::filesystem::temp_directory_path() / "srlab_acceptance_repro";
  std::filesystem::remove_all(base);

  auto leandre_bytes = [&](int workers, const std::string& tag) {
    ExperimentConfig cfg;
    cfg.samples_per_eps = 4000;
    cfg.steps_N = 48;
    cfg.seed = 31;
    cfg.workers = workers;
    cfg.tol_absolute = 0.5;
    const ExperimentReport r =
        run_leandre(heis, vec3(0, 0, 0), vec3(0, 0, 0), {0.5, 0.35, 0.25}, cfg);
    const std::string dir = (base / tag).string();
    emit_report(r, dir);
    return slurp(base / tag / "report.json");
  };
  auto tightness_bytes = [&](int workers, const std::string& tag) {
    ExperimentConfig cfg;
    cfg.target_accepted = {100};
    cfg.steps_N = 48;
    cfg.seed = 32;
    cfg.workers = workers;
    const ExperimentReport r =
        run_tightness(heis, vec3(0, 0, 0), vec3(0, 0, 0), {0.5, 0.3}, 0.4, 8, 50.0, cfg);
    const std::string dir = (base / tag).string();
    emit_report(r, dir);
    return slurp(base / tag / "report.json");
  };

  const std::string l1 = leandre_bytes(1, "l1");
  const std::string l3 = leandre_bytes(3, "l3");
  const std::string l3b = leandre_bytes(3, "l3b");
  const std::string t1 = tightness_bytes(1, "t1");
  const std::string t3 = tightness_bytes(3, "t3");
  std::filesystem::remove_all(base);

  const bool ok = !l1.empty() && l1 == l3 && l3 == l3b && !t1.empty() && t1 == t3;
  verdict_line(9, ok,
               fmt("reproducibility: report.json identical across reruns and workers 1 vs 3 "
                   "(kernel run %zu bytes %s, bridge run %zu bytes %s)",
                   l1.size(), l1 == l3 && l3 == l3b ? "match" : "MISMATCH", t1.size(),
                   t1 == t3 ? "match" : "MISMATCH"));
}

// 10: the discrete Levy area satisfies Chen's identity to machine precision.
void check_chen_identity() {
  RandomStream rng(31415);
  const int K = 96, ell = 3;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd w(K + 1, ell);
    w.row(0).setZero();
    for (int k = 1; k <= K; ++k)
      for (int c = 0; c < ell; ++c) w(k, c) = w(k - 1, c) + rng.normal() / std::sqrt(K);
    const LevyArea area(w);
    const int u = 1 + static_cast<int>(rng.uniform() * (K - 2));
    const int s = static_cast<int>(rng.uniform() * u);
    const int t = u + 1 + static_cast<int>(rng.uniform() * (K - u - 1));
    const Eigen::VectorXd d1 = (w.row(u) - w.row(s)).transpose();
    const Eigen::VectorXd d2 = (w.row(t) - w.row(u)).transpose();
    const Eigen::MatrixXd rhs =
        area.at(s, u) + area.at(u, t) + 0.5 * (d1 * d2.transpose() - d2 * d1.transpose());
    worst = std::max(worst, (area.at(s, t) - rhs).cwiseAbs().maxCoeff());
  }
  verdict_line(10, worst <= 1e-12,
               fmt("chen additivity: worst deviation %.3e over 100 random triples (tol 1e-12)",
                   worst));
}

}  // namespace

int main(int argc, char** argv) {
  std::string bin;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--srlab-bin") == 0) bin = argv[i + 1];
  if (bin.empty()) {
    std::fprintf(stderr, "usage: %s --srlab-bin <path-to-srlab>\n", argv[0]);
    return 2;
  }

  check_cli_distance(bin);
  check_endpoint_gradient();
  check_rate_function();
  check_kernel_exponent();
  check_concentration();
  check_tightness();
  check_brownian_scaling();
  check_reversal();
  check_reproducibility();
  check_chen_identity();

  std::printf("acceptance: %d/10 passed\n", 10 - g_failures);
  return g_failures;
}
