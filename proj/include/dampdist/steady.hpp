// SPDX-License-Identifier: Apache-2.0
//
// Operating point computation: network power flow, machine initialization
// and dispatch sweeps.

#pragma once

#include <Eigen/Dense>

#include "dampdist/dae.hpp"
#include "dampdist/sysdata.hpp"

namespace dampdist {

/// Raised when an iterative solve fails; carries the mismatch history.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), mismatch_history(std::move(history)) {}
  std::vector<double> mismatch_history;
};

struct OperatingPoint {
  Eigen::VectorXd theta;  ///< bus angles, rad (slack at 0)
  Eigen::VectorXd vmag;   ///< bus voltage magnitudes, pu
  Eigen::VectorXd pg;     ///< machine active output, pu
  Eigen::VectorXd qg;     ///< machine reactive output, pu
  // Machine internal quantities, filled by init_machines.
  Eigen::VectorXd delta0, eq0, ed0, efd0, tm0, vref0;
  int iterations = 0;
  double max_mismatch = 0.0;
};

struct PowerflowOptions {
  double tol = 1e-11;  ///< infinity norm of the power mismatch
  int max_iter = 60;
  int max_halvings = 8;
};

/// Newton power flow with step halving. Machine buses hold scheduled voltage,
/// the slack machine absorbs the active mismatch. Throws ConvergenceError on
/// failure with the per-iteration mismatch history attached.
OperatingPoint solve_powerflow(const SystemSpec& sys,
                               const Eigen::MatrixXcd& ybus,
                               const PowerflowOptions& opt = {},
                               const OperatingPoint* warm = nullptr);

/// Index of the slack machine (dispatch choice, or largest inertia).
int slack_machine(const SystemSpec& sys);

/// Computes rotor angles, winding voltages, field voltages and torques that
/// hold the solved network state in equilibrium, then verifies the full
/// model residual. Throws if the residual check fails.
void init_machines(const SystemSpec& sys, const Eigen::MatrixXcd& ybus,
                   OperatingPoint& op);

/// Packs an initialized operating point into model state/algebraic vectors
/// and the constant inputs that hold it.
void pack_equilibrium(const DaeModel& model, const OperatingPoint& op,
                      Eigen::VectorXd& x0, Eigen::VectorXd& y0, DaeInputs& u0);

/// Sending-end active power summed over every branch joining the bus pair.
double tie_flow(const SystemSpec& sys, const OperatingPoint& op, int from_bus,
                int to_bus);

enum class SweepKind { TieFlow, LoadScale };

struct SweepPlan {
  SweepKind kind = SweepKind::TieFlow;
  std::vector<double> values;  ///< target tie transfer (pu) or load scale factors
  int tie_from = 0, tie_to = 0;
};

struct SweepPoint {
  double target = 0.0;
  double realized = 0.0;  ///< achieved tie transfer (pu) or load scale
  SystemSpec sys;         ///< redispatched description for this point
  OperatingPoint op;
  bool solved = true;     ///< false when this point's operating point failed
  std::string error;      ///< failure reason when !solved
};

/// Solves the operating point across a dispatch or loading sweep. Points are
/// chained as warm starts in order. Tie targets move generation between the
/// two areas separated by the tie cutset, scaling each side proportionally;
/// load scaling multiplies every load and every machine schedule alike.
/// A point whose solve fails is returned with solved=false and skipped as a
/// warm start; the remaining points still run.
std::vector<SweepPoint> run_sweep(const SystemSpec& sys, const SweepPlan& plan,
                                  const PowerflowOptions& opt = {});

}  // namespace dampdist
