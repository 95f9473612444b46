// SPDX-License-Identifier: Apache-2.0
//
// Modal energy accounting: the speed-to-torque transfer matrix, per-machine
// damping powers, per-winding dissipation powers, the system-wide balance
// between them, the factors that distribute winding dissipation over
// machines, and the structural identities all of it rests on.

#pragma once

#include <complex>
#include <random>

#include "dampdist/modal.hpp"

namespace dampdist {

struct TorqueTransfer {
  double omega = 0.0;           ///< evaluation frequency, rad/s
  Eigen::MatrixXcd k;           ///< torque produced per unit speed amplitude
  Eigen::MatrixXd re_k_closed;  ///< algebraic real part (constant-field model)
  double min_pole_distance = 0.0;
};

/// Evaluates the transfer matrix at jw. Throws when jw collides with the
/// winding subsystem spectrum (distance reported in the message). The closed
/// algebraic real part is filled only for the constant-field model.
TorqueTransfer torque_transfer(const LinearModel& lin, double omega);

struct DampingPowers {
  Eigen::VectorXd wd;  ///< cycle-averaged damping power per machine
  Eigen::VectorXd kd;  ///< damping torque coefficient per machine
  Eigen::VectorXd ks;  ///< synchronizing torque coefficient per machine
  double total = 0.0;
};

/// Damping powers of one mode from its speed amplitudes. Also stores the
/// torque amplitudes into the phasor set for reconstruction and checks.
DampingPowers damping_powers(const TorqueTransfer& tt, PhasorSet& ph);

/// Quadrature average of reconstructed torque times speed over one period
/// centered on t0. Independent check of the product formula.
double cycle_average_power(const PhasorSet& ph, int machine, double t0);

struct DissipationPowers {
  Eigen::VectorXd wf;  ///< field winding dissipation per machine
  Eigen::VectorXd wg;  ///< damper winding dissipation per machine
  double total = 0.0;
};

/// Per-winding dissipation powers of one mode from its internal-voltage and
/// field-voltage amplitudes.
DissipationPowers dissipation_powers(const LinearModel& lin,
                                     const PhasorSet& ph);

struct BalanceReport {
  double wd_total = 0.0;
  double dissipation_total = 0.0;
  double rel_residual = 0.0;
  double zeta = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Checks that total damping power equals total winding dissipation within
/// kappa * zeta of either total.
BalanceReport balance_check(const DampingPowers& dp,
                            const DissipationPowers& ds, const Mode& mode,
                            double kappa = 3.0);

struct DistributionFactors {
  Eigen::MatrixXcd q;     ///< speed amplitude per unit field-voltage amplitude
  Eigen::MatrixXcd beta;  ///< complex share of machine i's speed from winding j
  Eigen::MatrixXd alpha;  ///< converts winding dissipation to machine damping
  Eigen::MatrixXd f;      ///< row-normalized damping source fractions
  Eigen::VectorXd row_residual;  ///< |sum_j alpha_ij wf_j - wd_i| / |wd_i|
  std::vector<std::string> flags;
};

/// Distribution factors linking machine damping powers to field winding
/// dissipation for one mode of the constant-field model.
DistributionFactors distribution_factors(const LinearModel& lin,
                                         const Mode& mode, const PhasorSet& ph,
                                         const DampingPowers& dp,
                                         const DissipationPowers& ds);

struct ClaimsReport {
  double winding_similarity = 0.0;   ///< field weights relate A33 to its transpose
  double coupling_reciprocity = 0.0; ///< A31/A23 pairing through the weights
  double acceleration_symmetry = 0.0;///< inertia-weighted A21 symmetry
  double quadratic_form = 0.0;       ///< worst real-part factoring residual
  double max_residual = 0.0;
  bool pass = false;
};

/// Verifies the structural identities of the constant-field model at the
/// given frequencies; random vectors for the quadratic-form check are drawn
/// from the seeded generator. Throws on models with regulators.
ClaimsReport verify_claims(const LinearModel& lin,
                           const std::vector<double>& omegas,
                           std::uint64_t seed = 20260819ULL,
                           double tol = 1e-8);

}  // namespace dampdist
