// SPDX-License-Identifier: Apache-2.0
//
// Nonlinear ringdown simulation and measurement-style mode estimation:
// trapezoidal integration of the full model through switching events,
// linear-prediction frequency fitting, and energy accounting from fitted
// amplitudes alone.

#pragma once

#include "dampdist/energetics.hpp"
#include "dampdist/steady.hpp"

namespace dampdist {

struct Disturbance {
  enum class Kind { BusFault, FieldPulse };
  Kind kind = Kind::FieldPulse;
  double t_start = 1.0;
  double duration = 0.2;
  int bus = 0;            ///< faulted bus (BusFault)
  double shunt_b = -1e3;  ///< fault shunt susceptance, pu (BusFault)
  int machine = -1;       ///< pulsed machine, -1 for all (FieldPulse)
  double magnitude = 0.05;///< field-voltage pulse height, pu (FieldPulse)
};

struct SimOptions {
  double t_end = 15.0;
  double dt = 0.005;
  double newton_tol = 1e-10;
  int max_newton = 30;
};

struct Trajectory {
  Eigen::VectorXd t;
  Eigen::MatrixXd x;      ///< rows: samples, cols: differential states
  Eigen::MatrixXd theta, vmag;              ///< per bus
  Eigen::MatrixXd omega, delta, eq, ed, efd, te;  ///< per machine
  StateIndex idx;
  double omega_s = 0.0;
};

/// Integrates the full model from the initialized operating point through
/// the disturbance. Steps land exactly on switching instants and the
/// algebraic variables are re-solved consistently after each switch.
Trajectory simulate(const SystemSpec& sys, const Eigen::MatrixXcd& ybus,
                    const OperatingPoint& op, const Disturbance& dist,
                    const SimOptions& opt = {});

/// Removes the least-squares affine trend from each column in place.
void detrend(Eigen::MatrixXd& signals, const Eigen::VectorXd& t);

struct ModeEstimate {
  std::complex<double> lambda;
  double freq_hz = 0.0;
  double zeta = 0.0;
  /// Fitted amplitudes, normalized so the reference machine speed is 1 at
  /// angle 0. Zero where a machine lacks the signal.
  Eigen::VectorXcd omega, te, eq, ed, efd;
  int ref_machine = 0;
  double fit_residual = 0.0;  ///< relative rms misfit on the reference signal
  std::vector<std::complex<double>> all_roots;  ///< oscillatory roots kept
};

struct EstimateOptions {
  int ar_order = 12;
  double guess_band = 0.2;    ///< acceptable relative distance from f_guess
  double min_window_periods = 2.0;
};

/// Fits one oscillatory mode to the recorded ringdown over [t_lo, t_hi]:
/// linear prediction on the reference machine speed for the exponent, then a
/// fixed-exponent least-squares fit of every channel for the amplitudes.
ModeEstimate estimate_mode(const Trajectory& traj, double t_lo, double t_hi,
                           double f_guess, int ref_machine,
                           const EstimateOptions& opt = {});

struct EnergyReport {
  Eigen::VectorXd wd, kd, ks, wf, wg;
  double wd_total = 0.0;
  double dissipation_total = 0.0;
  double balance_residual = 0.0;
};

/// Energy accounting from the linear model for one mode, amplitudes scaled
/// to the reference machine so rows compare against measured results.
EnergyReport model_energetics(const LinearModel& lin, const Mode& mode,
                              int ref_machine);

/// Energy accounting from fitted ringdown amplitudes alone; the model only
/// contributes machine constants.
EnergyReport measured_energetics(const SystemSpec& sys,
                                 const ModeEstimate& est);

}  // namespace dampdist
