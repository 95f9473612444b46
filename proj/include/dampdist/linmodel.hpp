// SPDX-License-Identifier: Apache-2.0
//
// Linearization around a solved operating point and elimination of the
// network algebraic variables, exposing the block structure used by the
// energy identities.

#pragma once

#include <Eigen/Dense>

#include "dampdist/steady.hpp"

namespace dampdist {

/// Raised when the algebraic Jacobian cannot be eliminated reliably.
class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& what)
      : std::runtime_error(what) {}
};

struct LinearModel {
  StateIndex idx;
  double omega_s = 0.0;
  bool simplified = false;  ///< third-order machines, constant field everywhere

  // State-space Jacobians. Algebraic columns are ordered [angles; v/v0],
  // the voltage columns being scaled by the operating magnitudes so the
  // algebraic block is symmetric on lossless networks.
  Eigen::MatrixXd M, N, C, D;
  Eigen::MatrixXd A;  ///< reduced state matrix

  // Blocks of A in the [delta | omega | z] partition.
  Eigen::MatrixXd A21, A23, A31, A32, A33;

  Eigen::VectorXd hvec;  ///< machine inertias
  Eigen::VectorXd pvec;  ///< field winding weights tdo_p / (xd - xd_p)

  // Input columns for mechanical torque and field-voltage disturbances.
  Eigen::MatrixXd b_tm, b_efd;

  double d_rcond = 0.0;       ///< reciprocal condition estimate of D
  double reduce_residual = 0.0;

  OperatingPoint op;
  SystemSpec sys;

  int ng() const { return idx.ng; }
  int nz() const { return idx.nz(); }
};

/// Builds the reduced linear model. Throws SingularityError when the
/// algebraic Jacobian is singular or ill-conditioned.
LinearModel build_linear_model(const SystemSpec& sys,
                               const Eigen::MatrixXcd& ybus,
                               const OperatingPoint& op);

}  // namespace dampdist
