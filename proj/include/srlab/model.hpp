#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace srlab {

// A chart model of hypoelliptic dynamics: ell driving fields V_1..V_ell and a
// drift field V on R^m.  eval_fields returns the m x ell matrix whose columns
// are V_i(p), so controlled dynamics read  dgamma = F(gamma) dh.
//
// Models are immutable after construction and safe to share across threads.
struct VectorFieldModel {
  std::string name;
  int dim_m = 0;
  int num_fields_ell = 0;

  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eval_fields;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval_drift;
  // entries 0..ell-1: dV_i/dx; entry ell: dV/dx (each m x m, column c = d/dx_c).
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> eval_jacobians;

  // Allocation-free variants used by the inner simulation loops; filled in by
  // finalize_model when a model supplies only the allocating closures.
  std::function<void(const Eigen::VectorXd&, Eigen::MatrixXd&)> eval_fields_into;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> eval_drift_into;

  std::vector<int> periodic_dims;  // coordinates with period 2*pi

  bool drift_is_zero = true;
  // true when the drift vanishes and all fields are divergence-free, in which
  // case the generator is self-adjoint and time reversal maps bridges to
  // bridges of the same diffusion.
  bool self_adjoint = true;

  // Closed-form distance for special point pairs when the model has one;
  // nullopt for pairs outside the known class.
  std::function<std::optional<double>(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      distance_oracle;

  bool is_periodic(int coord) const;
};

// Catalog: "heisenberg" (m=3, ell=2), "torus_hypo" (m=2, ell=2, both
// coordinates 2*pi-periodic), or "custom" with params supplying component
// expressions, e.g. {"fields", "V1=(1,0);V2=(0,x0)"} and optionally
// {"drift", "(...)"}, {"periodic", "0,1"}.
VectorFieldModel make_model(const std::string& name,
                            const std::map<std::string, std::string>& params = {});

// Builds a model from host-language closures; Jacobians fall back to central
// differences (step 1e-6) when absent.  finalize_model fills derived members.
void finalize_model(VectorFieldModel& model);

// p - q with periodic coordinates reduced to their minimal representative.
Eigen::VectorXd wrap_difference(const VectorFieldModel& model, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& q);

// Euclidean norm of wrap_difference (flat chart metric).
double ambient_distance(const VectorFieldModel& model, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& q);

}  // namespace srlab
