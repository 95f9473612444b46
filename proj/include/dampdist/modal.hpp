// SPDX-License-Identifier: Apache-2.0
//
// Eigenanalysis of the reduced model: oscillatory mode extraction, rotor
// mode selection, and complex amplitude bookkeeping for individual modes.

#pragma once

#include <complex>

#include <Eigen/Dense>

#include "dampdist/linmodel.hpp"

namespace dampdist {

struct Mode {
  std::complex<double> lambda;
  double freq_hz = 0.0;
  double zeta = 0.0;
  Eigen::VectorXcd psi;  ///< right eigenvector
  Eigen::VectorXcd phi;  ///< left eigenvector, phi.transpose() * psi == 1
  double rotor_share = 0.0;   ///< participation carried by angle/speed states
  double right_residual = 0.0;
  double left_residual = 0.0;
  bool unstable = false;
};

struct ModalDecomposition {
  Eigen::VectorXcd eigenvalues;      ///< full spectrum
  std::vector<Mode> oscillatory;     ///< one entry per positive-frequency pair
};

/// Full eigendecomposition with per-mode left vectors refined by inverse
/// iteration and scaled to biorthonormality.
ModalDecomposition eig_modes(const LinearModel& lin);

struct ModeFilter {
  double f_lo = 0.1;          ///< Hz
  double f_hi = 3.0;          ///< Hz
  double zeta_max = 0.10;
  double min_rotor_share = 0.2;
};

/// Indices into `oscillatory` that pass the band, damping and rotor
/// participation screens. Unstable modes in band are kept and flagged.
std::vector<int> select_em_modes(const ModalDecomposition& md,
                                 const ModeFilter& filter = {});

/// Tracks a mode across consecutive parameter points by shape correlation.
/// Returns the index whose speed-entry alignment with `reference_psi_omega`
/// is highest, or -1 when nothing reaches `min_mac`.
int match_mode(const ModalDecomposition& md, const std::vector<int>& candidates,
               const Eigen::VectorXcd& reference_psi_omega,
               const LinearModel& lin, double min_mac = 0.8);

enum class PhasorNorm {
  UnitCoeff,         ///< amplitudes are raw eigenvector entries
  ReferenceMachine,  ///< speed amplitude of a chosen machine is 1 at angle 0
  InitialCondition,  ///< amplitudes reproduce a given initial state
};

/// Complex amplitudes of one mode's contribution to each physical signal:
/// signal(t) ~ Re{ amp * exp(sigma (t - t0)) * exp(j omega_d t) }.
struct PhasorSet {
  std::complex<double> lambda;
  std::complex<double> chat;  ///< modal coefficient folded into the amplitudes
  double t0 = 0.0;
  Eigen::VectorXcd full;  ///< per state
  Eigen::VectorXcd delta, omega, eq, ed, efd;  ///< per machine (zero if absent)
  Eigen::VectorXcd torque;  ///< filled by the damping power computation
};

/// Builds the per-signal amplitudes for one mode. `ref_machine` selects the
/// ReferenceMachine scaling; `x0` supplies the InitialCondition state. Field
/// voltage amplitudes of regulated machines are reconstructed from the
/// exciter chain.
PhasorSet make_phasors(const LinearModel& lin, const Mode& mode,
                       PhasorNorm norm, int ref_machine = 0,
                       const Eigen::VectorXd* x0 = nullptr, double t0 = 0.0);

/// Evaluates the single-mode reconstruction of the given per-machine
/// amplitude vector on a time grid (one row per sample).
Eigen::MatrixXd reconstruct(const PhasorSet& ph, const Eigen::VectorXcd& amps,
                            const Eigen::VectorXd& tgrid);

}  // namespace dampdist
