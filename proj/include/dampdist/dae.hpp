// SPDX-License-Identifier: Apache-2.0
//
// Differential-algebraic model of the multimachine system. One evaluator
// produces state derivatives, network residuals and analytic Jacobians;
// steady-state checks, linearization and time stepping all share it.

#pragma once

#include <Eigen/Dense>

#include "dampdist/sysdata.hpp"

namespace dampdist {

/// Layout of the differential state vector. Groups are ordered
/// [delta | omega | eq | ed | exciter | washout | lead-lag], machine-major
/// inside each group. Slots hold -1 when a machine lacks that state.
struct StateIndex {
  int ng = 0;  ///< machine count
  int n = 0;   ///< bus count
  int ns = 0;  ///< differential state count
  std::vector<int> delta, omega, eq, ed, efd, vtr, xw, xll;
  std::vector<std::string> names;

  int nz() const { return ns - 2 * ng; }
  int z_begin() const { return 2 * ng; }
};

StateIndex build_state_index(const SystemSpec& sys);

/// Bus injections implied by the network alone: p_i = sum_k v_i v_k
/// (g_ik cos + b_ik sin), q_i = sum_k v_i v_k (g_ik sin - b_ik cos) with
/// angles theta_i - theta_k. Jacobian blocks are filled when non-null.
void network_injections(const Eigen::MatrixXd& g, const Eigen::MatrixXd& b,
                        const Eigen::VectorXd& theta, const Eigen::VectorXd& vm,
                        Eigen::VectorXd& p, Eigen::VectorXd& q,
                        Eigen::MatrixXd* dp_dth = nullptr,
                        Eigen::MatrixXd* dp_dv = nullptr,
                        Eigen::MatrixXd* dq_dth = nullptr,
                        Eigen::MatrixXd* dq_dv = nullptr);

/// Exogenous inputs held constant by the model equations.
struct DaeInputs {
  Eigen::VectorXd tm;         ///< mechanical torque per machine
  Eigen::VectorXd efd_const;  ///< applied field voltage for manual machines
  Eigen::VectorXd vref;       ///< regulator reference for excited machines
  Eigen::VectorXd efd_extra;  ///< additive field-voltage disturbance per machine
};

struct DaeEval {
  Eigen::VectorXd f;   ///< dx/dt
  Eigen::VectorXd g;   ///< algebraic residuals, [active; reactive] per bus
  Eigen::VectorXd te;  ///< air-gap torque per machine
  Eigen::VectorXd pe;  ///< active injection per machine
  Eigen::VectorXd qe;  ///< reactive injection per machine
  Eigen::VectorXd efd; ///< applied field voltage per machine (incl. algebraic)
  Eigen::MatrixXd dfdx, dfdy, dgdx, dgdy;  ///< filled when requested
};

class DaeModel {
 public:
  DaeModel(SystemSpec sys, const Eigen::MatrixXcd& ybus);

  const SystemSpec& sys() const { return sys_; }
  const StateIndex& idx() const { return idx_; }
  const Eigen::MatrixXcd& ybus() const { return ybus_; }

  /// Swaps the network matrix (fault application and clearing).
  void set_ybus(const Eigen::MatrixXcd& ybus);

  /// Evaluates derivatives and residuals at (x, y) where y = [theta; vmag].
  /// Jacobians are analytic; `want_jac` skips them when not needed.
  DaeEval eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
               const DaeInputs& u, bool want_jac) const;

  DaeInputs zero_inputs() const;

 private:
  SystemSpec sys_;
  StateIndex idx_;
  Eigen::MatrixXcd ybus_;
  Eigen::MatrixXd gmat_, bmat_;
};

}  // namespace dampdist
