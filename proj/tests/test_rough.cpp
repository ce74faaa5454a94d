#include <doctest.h>

#include <cmath>
#include <vector>

#include "srlab/model.hpp"
#include "srlab/rng.hpp"
#include "srlab/rough.hpp"
#include "srlab/stats.hpp"

using namespace srlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd brownian_points(int K, int ell, double eps, std::uint64_t seed) {
  RandomStream rng(seed);
  const double sd = std::sqrt(eps / K);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(K + 1, ell);
  for (int k = 1; k <= K; ++k)
    for (int j = 0; j < ell; ++j) w(k, j) = w(k - 1, j) + sd * rng.normal();
  return w;
}

}  // namespace

TEST_CASE("Holder norms of a linear path") {
  const int K = 64;
  Eigen::Vector2d v(3.0, -4.0);  // |v| = 5
  Eigen::MatrixXd pts(K + 1, 2);
  for (int k = 0; k <= K; ++k) pts.row(k) = (static_cast<double>(k) / K) * v.transpose();

  const double alpha = 0.4;
  const HolderStats hs = holder_stats(pts, alpha, 4);
  CHECK(hs.full_norm == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(hs.window_norm == doctest::Approx(5.0 * std::pow(0.25, 1.0 - alpha)).epsilon(1e-12));
  CHECK_FALSE(hs.coarsened);

  // window_n = 1 admits every pair, so both sups agree exactly
  const HolderStats all = holder_stats(pts, alpha, 1);
  CHECK(all.window_norm == all.full_norm);
}

TEST_CASE("constant path has zero norms everywhere") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Constant(17, 3, 1.25);
  const HolderStats hs = holder_stats(pts, 0.4, 4);
  CHECK(hs.full_norm == 0.0);
  CHECK(hs.window_norm == 0.0);
  const RoughNorm rn = rough_norm(Eigen::MatrixXd::Constant(17, 2, -0.5), 0.4);
  CHECK(rn.path_level == 0.0);
  CHECK(rn.area_level == 0.0);
  CHECK(rn.homogeneous == 0.0);
}

TEST_CASE("Holder norm increases with alpha") {
  const Eigen::MatrixXd w = brownian_points(512, 2, 1.0, 99);
  const HolderStats lo = holder_stats(w, 0.35, 8);
  const HolderStats hi = holder_stats(w, 0.45, 8);
  CHECK(hi.full_norm > lo.full_norm);
  CHECK(hi.window_norm > lo.window_norm);
}

TEST_CASE("Holder stats are invariant under time reversal") {
  const Eigen::MatrixXd w = brownian_points(300, 3, 0.7, 5);
  const Eigen::MatrixXd rev = w.colwise().reverse();
  const HolderStats a = holder_stats(w, 0.4, 6);
  const HolderStats b = holder_stats(rev, 0.4, 6);
  CHECK(a.full_norm == b.full_norm);
  CHECK(a.window_norm == b.window_norm);
}

TEST_CASE("model-aware Holder stats wrap periodic coordinates") {
  const VectorFieldModel m = make_model("torus_hypo");
  Path p;
  p.grid_K = 1;
  p.points.resize(2, 2);
  p.points << 6.2, 0.0, 0.08, 0.0;  // short hop across the x cut
  const HolderStats wrapped = holder_stats(m, p, 0.4, 1);
  const double gap = 2.0 * kPi - 6.12;
  CHECK(wrapped.full_norm == doctest::Approx(gap).epsilon(1e-12));
  const HolderStats ambient = holder_stats(p.points, 0.4, 1);
  CHECK(ambient.full_norm == doctest::Approx(6.12).epsilon(1e-12));
}

TEST_CASE("Levy area of a discretized circle approximates pi") {
  const int K = 2048;
  Eigen::MatrixXd w(K + 1, 2);
  for (int k = 0; k <= K; ++k) {
    const double th = 2.0 * kPi * k / K;
    w.row(k) << std::cos(th), std::sin(th);
  }
  const LevyArea area = levy_area(w);
  const double a = area.at(0, K)(0, 1);
  CHECK(a == doctest::Approx(kPi).epsilon(1e-4));
  // the discrete value is the inscribed polygon area exactly
  CHECK(a == doctest::Approx(0.5 * K * std::sin(2.0 * kPi / K)).epsilon(1e-10));
}

TEST_CASE("Levy area antisymmetry is exact") {
  const Eigen::MatrixXd w = brownian_points(256, 3, 1.0, 11);
  const LevyArea area(w);
  RandomStream rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const int s = static_cast<int>(rng.uniform() * 257);
    const int t = static_cast<int>(rng.uniform() * 257);
    const Eigen::MatrixXd fwd = area.at(s, t);
    const Eigen::MatrixXd bwd = area.at(t, s);
    CHECK((fwd + bwd).norm() == 0.0);
    CHECK((fwd + fwd.transpose()).norm() == 0.0);
  }
}

TEST_CASE("Chen additivity holds to machine precision") {
  const int K = 512;
  const Eigen::MatrixXd w = brownian_points(K, 3, 1.0, 21);
  const LevyArea area(w);
  RandomStream rng(22);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int s = static_cast<int>(rng.uniform() * (K + 1));
    int t = static_cast<int>(rng.uniform() * (K + 1));
    int u = static_cast<int>(rng.uniform() * (K + 1));
    if (s > t) std::swap(s, t);
    if (t > u) std::swap(t, u);
    if (s > t) std::swap(s, t);
    const Eigen::RowVectorXd d1 = w.row(t) - w.row(s);
    const Eigen::RowVectorXd d2 = w.row(u) - w.row(t);
    const Eigen::MatrixXd cross =
        0.5 * (d1.transpose() * d2 - d2.transpose() * d1);
    const Eigen::MatrixXd resid = area.at(s, u) - area.at(s, t) - area.at(t, u) - cross;
    worst = std::max(worst, resid.norm());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("zero path has identically zero area") {
  const Eigen::MatrixXd w = Eigen::MatrixXd::Zero(65, 2);
  const LevyArea area(w);
  CHECK(area.at(0, 64).norm() == 0.0);
  CHECK(area.at(10, 37).norm() == 0.0);
}

TEST_CASE("rough norm is homogeneous under path scaling") {
  const Eigen::MatrixXd w = brownian_points(400, 2, 1.0, 31);
  const double c = 2.5;
  const RoughNorm base = rough_norm(w, 0.4);
  const RoughNorm scaled = rough_norm(c * w, 0.4);
  CHECK(scaled.path_level == doctest::Approx(c * base.path_level).epsilon(1e-12));
  CHECK(scaled.area_level == doctest::Approx(c * base.area_level).epsilon(1e-12));
  CHECK(base.homogeneous == std::max(base.path_level, base.area_level));
  CHECK(scaled.homogeneous == std::max(scaled.path_level, scaled.area_level));
}

TEST_CASE("Brownian scaling identity in law for the rough norm") {
  // rough_norm reads paths on the unit grid, so restricting Brownian motion to
  // [0, tau] means shrinking the increment variance by tau; the resulting norm
  // ensemble must match sqrt(tau) times the unit-interval ensemble in law.
  const double tau = 0.25;
  const int n = 400, K = 256;
  std::vector<double> short_paths(n), rescaled(n);
  for (int i = 0; i < n; ++i) {
    short_paths[i] = rough_norm(brownian_points(K, 2, tau, derive_seed(501, i)), 0.4).homogeneous;
    rescaled[i] =
        std::sqrt(tau) *
        rough_norm(brownian_points(K, 2, 1.0, derive_seed(502, i)), 0.4).homogeneous;
  }
  const double d = ks_statistic(short_paths, rescaled);
  const double p = ks_pvalue(d, n, n);
  CHECK(p > 0.01);
}

TEST_CASE("Gaussian tail slope against squared thresholds") {
  RandomStream rng(61);
  std::vector<double> samples(200000);
  for (double& s : samples) s = std::fabs(rng.normal());
  const TailCurve tc = tail_statistics(samples, {2.0, 2.5, 3.0, 3.5});
  REQUIRE(tc.slope_valid);
  REQUIRE(tc.thresholds.size() == 4);
  // deterministic value for these thresholds is about -0.555
  CHECK(tc.slope_vs_k2 > -0.65);
  CHECK(tc.slope_vs_k2 < -0.45);
  for (std::size_t i = 0; i + 1 < tc.log_survival.size(); ++i)
    CHECK(tc.log_survival[i] > tc.log_survival[i + 1]);
}

TEST_CASE("tail curve drops starved thresholds") {
  std::vector<double> samples;
  samples.insert(samples.end(), 947, 0.5);
  samples.insert(samples.end(), 50, 1.5);
  samples.insert(samples.end(), 3, 2.5);
  const TailCurve tc = tail_statistics(samples, {1.0, 2.0}, 10);
  REQUIRE(tc.thresholds.size() == 1);
  CHECK(tc.thresholds[0] == 1.0);
  CHECK(tc.exceedances[0] == 53);
  CHECK(tc.log_survival[0] == doctest::Approx(std::log(53.0 / 1000.0)).epsilon(1e-12));
  CHECK_FALSE(tc.slope_valid);  // one point cannot pin a slope
}

TEST_CASE("tail curve rejects tiny ensembles and degenerate data") {
  std::vector<double> tiny(999, 1.0);
  CHECK_THROWS_AS(tail_statistics(tiny, {0.5}), std::invalid_argument);

  std::vector<double> flat(2000, 1.0);
  const TailCurve tc = tail_statistics(flat, {2.0, 3.0});
  CHECK(tc.thresholds.empty());
  CHECK_FALSE(tc.slope_valid);
}
