#include <doctest.h>

#include <cmath>

#include "srlab/model.hpp"
#include "srlab/rng.hpp"

using namespace srlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// finite-difference Jacobian of column i of eval_fields, independent of the
// model's own eval_jacobians
Eigen::MatrixXd fd_field_jacobian(const VectorFieldModel& m, const Eigen::VectorXd& p, int i) {
  const double h = 1e-6;
  Eigen::MatrixXd J(m.dim_m, m.dim_m);
  Eigen::VectorXd pp = p, pm = p;
  for (int c = 0; c < m.dim_m; ++c) {
    pp[c] += h;
    pm[c] -= h;
    J.col(c) = (m.eval_fields(pp).col(i) - m.eval_fields(pm).col(i)) / (2.0 * h);
    pp[c] = p[c];
    pm[c] = p[c];
  }
  return J;
}

}  // namespace

TEST_CASE("heisenberg fields and structure") {
  const VectorFieldModel m = make_model("heisenberg");
  CHECK(m.dim_m == 3);
  CHECK(m.num_fields_ell == 2);
  CHECK(m.drift_is_zero);
  CHECK(m.self_adjoint);
  CHECK(m.periodic_dims.empty());

  const Eigen::VectorXd p = vec3(0.7, -1.3, 0.4);
  const Eigen::MatrixXd F = m.eval_fields(p);
  CHECK(F(0, 0) == 1.0);
  CHECK(F(1, 0) == 0.0);
  CHECK(F(2, 0) == doctest::Approx(0.65));   // -y/2
  CHECK(F(0, 1) == 0.0);
  CHECK(F(1, 1) == 1.0);
  CHECK(F(2, 1) == doctest::Approx(0.35));   // x/2
  CHECK(m.eval_drift(p).norm() == 0.0);
}

TEST_CASE("analytic jacobians match finite differences") {
  for (const char* name : {"heisenberg", "torus_hypo"}) {
    const VectorFieldModel m = make_model(name);
    RandomStream rng(321);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd p(m.dim_m);
      for (int c = 0; c < m.dim_m; ++c) p[c] = 2.0 * rng.normal();
      const auto J = m.eval_jacobians(p);
      for (int i = 0; i < m.num_fields_ell; ++i)
        CHECK((J[i] - fd_field_jacobian(m, p, i)).norm() < 1e-5);
    }
  }
}

TEST_CASE("heisenberg bracket spans the missing direction everywhere") {
  const VectorFieldModel m = make_model("heisenberg");
  RandomStream rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd p = vec3(3.0 * rng.normal(), 3.0 * rng.normal(), 3.0 * rng.normal());
    const Eigen::MatrixXd F = m.eval_fields(p);
    const auto J = m.eval_jacobians(p);
    // [V1, V2] = dV2 * V1 - dV1 * V2
    const Eigen::VectorXd bracket = J[1] * F.col(0) - J[0] * F.col(1);
    Eigen::MatrixXd span(3, 3);
    span << F.col(0), F.col(1), bracket;
    CHECK(std::fabs(span.determinant()) > 0.9);
  }
}

TEST_CASE("heisenberg distance oracle covers planar and vertical pairs") {
  const VectorFieldModel m = make_model("heisenberg");
  const Eigen::VectorXd o = vec3(0, 0, 0);

  auto d = m.distance_oracle(o, vec3(1, 2, 0));
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(std::sqrt(5.0)));

  d = m.distance_oracle(o, vec3(0, 0, 2));
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(2.0 * std::sqrt(2.0 * kPi)));

  CHECK_FALSE(m.distance_oracle(o, vec3(1, 0, 1)).has_value());

  // left invariance: p * q with planar group displacement q = (0.5, 0.1, 0)
  const Eigen::VectorXd p = vec3(0.3, -0.2, 0.7);
  const Eigen::VectorXd pq = vec3(0.8, -0.1, 0.7 + 0.5 * (0.3 * 0.1 - (-0.2) * 0.5));
  d = m.distance_oracle(p, pq);
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(std::hypot(0.5, 0.1)));
}

TEST_CASE("torus model wraps and exposes the x-axis oracle") {
  const VectorFieldModel m = make_model("torus_hypo");
  CHECK(m.dim_m == 2);
  CHECK(m.is_periodic(0));
  CHECK(m.is_periodic(1));
  CHECK(m.self_adjoint);

  const Eigen::MatrixXd F = m.eval_fields(vec2(kPi / 2.0, 5.0));
  CHECK(F(1, 1) == doctest::Approx(1.0));  // sin(pi/2)

  auto d = m.distance_oracle(vec2(0, 0), vec2(0.2 + 2.0 * kPi, 0));
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(0.2));
  CHECK_FALSE(m.distance_oracle(vec2(0, 0), vec2(1, 1)).has_value());

  CHECK(ambient_distance(m, vec2(0, 0), vec2(2.0 * kPi - 0.1, 0)) == doctest::Approx(0.1));
  const Eigen::VectorXd w = wrap_difference(m, vec2(0.05, 0), vec2(2.0 * kPi - 0.05, 0));
  CHECK(w[0] == doctest::Approx(0.1));
}

TEST_CASE("wrap_difference is antisymmetric away from the cut") {
  const VectorFieldModel m = make_model("torus_hypo");
  RandomStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd p = vec2(2.0 * rng.normal(), 2.0 * rng.normal());
    const Eigen::VectorXd q = vec2(2.0 * rng.normal(), 2.0 * rng.normal());
    const Eigen::VectorXd d1 = wrap_difference(m, p, q);
    const Eigen::VectorXd d2 = wrap_difference(m, q, p);
    CHECK(d1.cwiseAbs().maxCoeff() <= kPi + 1e-12);
    if ((d1.cwiseAbs().array() < kPi - 1e-9).all())
      CHECK((d1 + d2).norm() < 1e-12);
  }
}

TEST_CASE("custom model evaluates expression fields") {
  const VectorFieldModel m =
      make_model("custom", {{"fields", "V1=(1,0);V2=(0,x0)"}});
  CHECK(m.dim_m == 2);
  CHECK(m.num_fields_ell == 2);
  const Eigen::MatrixXd F = m.eval_fields(vec2(2.0, 5.0));
  CHECK(F(0, 0) == 1.0);
  CHECK(F(1, 0) == 0.0);
  CHECK(F(0, 1) == 0.0);
  CHECK(F(1, 1) == 2.0);
  CHECK(m.drift_is_zero);
  CHECK(m.self_adjoint);  // both fields divergence-free

  // finite-difference jacobian fallback
  const auto J = m.eval_jacobians(vec2(2.0, 5.0));
  CHECK(J[1](1, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("custom model with expressions and drift classifies the generator") {
  const VectorFieldModel m = make_model(
      "custom",
      {{"fields", "V1=(1+0.8*sin(3*x0),0);V2=(0,cos(x0*x1))"}, {"drift", "(0.2*x1,-0.1*x0)"}});
  CHECK_FALSE(m.drift_is_zero);
  CHECK_FALSE(m.self_adjoint);
  const Eigen::VectorXd p = vec2(0.4, -0.7);
  CHECK(m.eval_fields(p)(0, 0) == doctest::Approx(1.0 + 0.8 * std::sin(1.2)));
  CHECK(m.eval_fields(p)(1, 1) == doctest::Approx(std::cos(-0.28)));
  CHECK(m.eval_drift(p)[0] == doctest::Approx(-0.14));
  CHECK(m.eval_drift(p)[1] == doctest::Approx(-0.04));
}

TEST_CASE("custom model with non-divergence-free fields is not self-adjoint") {
  const VectorFieldModel m = make_model("custom", {{"fields", "V1=(x0,0);V2=(0,1)"}});
  CHECK(m.drift_is_zero);
  CHECK_FALSE(m.self_adjoint);
}

TEST_CASE("model construction rejects bad input") {
  CHECK_THROWS_AS((void)make_model("nosuch"), std::invalid_argument);
  CHECK_THROWS((void)make_model("custom", {}));                                    // no fields
  CHECK_THROWS((void)make_model("custom", {{"fields", "V1=(1,0);V2=(0,x5)"}}));    // bad index
  CHECK_THROWS((void)make_model("custom", {{"fields", "V1=1,0;V2=(0,1)"}}));       // no tuple
  CHECK_THROWS((void)make_model("custom", {{"fields", "V1=(1,0);V2=(1)"}}));       // arity
  CHECK_THROWS((void)make_model("custom", {{"fields", "V1=(1,0);V2=(0,sin())"}})); // syntax
  CHECK_THROWS((void)make_model("custom", {{"fields", "V1=(1,0);V3=(0,1)"}}));     // gap
}

TEST_CASE("expression grammar covers functions, powers, and pi") {
  const VectorFieldModel m = make_model(
      "custom", {{"fields", "V1=(x0^2+1,exp(-x1)/2);V2=(sqrt(abs(x1)),pi*x0)"}});
  const Eigen::VectorXd p = vec2(2.0, -1.0);
  const Eigen::MatrixXd F = m.eval_fields(p);
  CHECK(F(0, 0) == doctest::Approx(5.0));
  CHECK(F(1, 0) == doctest::Approx(std::exp(1.0) / 2.0));
  CHECK(F(0, 1) == doctest::Approx(1.0));
  CHECK(F(1, 1) == doctest::Approx(2.0 * kPi));
}
