// SPDX-License-Identifier: Apache-2.0
//
// System data model for multimachine small-signal studies: bus, branch,
// machine and exciter records, plus loading and bus admittance assembly.

#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dampdist {

/// Raised when a system description file is malformed or violates a
/// modeling assumption. The message names the offending record.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

enum class BusKind { Generator, Load };

struct BusSpec {
  int id = 0;  ///< external bus number (1-based, generators first)
  BusKind kind = BusKind::Load;
  double p_load = 0.0;  ///< active load, pu on system base (consumption > 0)
  double q_load = 0.0;  ///< reactive load, pu on system base
  double base_kv = 0.0;
};

struct BranchSpec {
  int from = 0;
  int to = 0;
  double r = 0.0;    ///< series resistance, pu (must be 0; kept for negative controls)
  double x = 0.0;    ///< series reactance, pu (> 0)
  double b_sh = 0.0; ///< total line charging susceptance, pu (>= 0, split half per end)
};

enum class MachineOrder { Third, Fourth };

struct MachineSpec {
  int bus = 0;
  MachineOrder order = MachineOrder::Third;
  double h = 0.0;      ///< inertia constant, s (system base)
  double xd = 0.0;     ///< d-axis synchronous reactance, pu
  double xd_p = 0.0;   ///< d-axis transient reactance, pu
  double xq = 0.0;     ///< q-axis synchronous reactance, pu
  double xq_p = 0.0;   ///< q-axis transient reactance, pu (fourth order only)
  double tdo_p = 0.0;  ///< d-axis open-circuit transient time constant, s
  double tqo_p = 0.0;  ///< q-axis open-circuit transient time constant, s (fourth order)

  /// Field resistance in the normalization used by the energy identities.
  double r_field() const { return (xd - xd_p) / tdo_p; }
};

enum class ExciterKind {
  Manual,            ///< constant field voltage input
  StaticFirstOrder,  ///< one-state voltage regulator
  St1aPss            ///< static exciter with washout + lead-lag speed stabilizer
};

struct ExciterSpec {
  ExciterKind kind = ExciterKind::Manual;
  double ka = 0.0;    ///< regulator gain
  double tr = 0.0;    ///< transducer / regulator time constant, s
  double k_pss = 0.0; ///< stabilizer gain on per-unit speed deviation
  double t_w = 0.0;   ///< washout time constant, s
  double t1 = 0.0;    ///< lead time constant, s
  double t2 = 0.0;    ///< lag time constant, s
};

struct Dispatch {
  std::vector<double> pg;      ///< scheduled active generation, pu, one per machine
  std::vector<double> vsched;  ///< scheduled terminal voltage, pu, one per machine
  int slack_bus = -1;          ///< bus absorbing the mismatch (defaults to largest H)
};

struct SystemSpec {
  std::string name;
  double s_base_mva = 100.0;
  double f_base_hz = 60.0;
  std::vector<BusSpec> buses;
  std::vector<BranchSpec> branches;
  std::vector<MachineSpec> machines;
  std::map<int, ExciterSpec> exciters;  ///< keyed by machine bus; absent = manual
  Dispatch dispatch;

  int n_bus() const { return static_cast<int>(buses.size()); }
  int n_gen() const { return static_cast<int>(machines.size()); }
  double omega_s() const { return 2.0 * M_PI * f_base_hz; }

  const ExciterSpec& exciter_at(int bus) const;
  bool has_exciters() const;
};

/// Collapses the description to the reduced study model: every machine is
/// forced to third order and all field voltages are held constant.
SystemSpec as_simplified(const SystemSpec& sys);

/// Parses and validates a system description file (JSON). Throws DataError
/// with the offending record named on any violation.
SystemSpec load_system(const std::filesystem::path& path);

/// Validates an in-memory description; load_system calls this.
void validate_system(const SystemSpec& sys);

/// Assembles the dense complex bus admittance matrix from branch data.
/// Bus shunt effects enter only through line charging; series r must be 0
/// unless `allow_resistance` (used by negative-control experiments).
Eigen::MatrixXcd build_ybus(const SystemSpec& sys, bool allow_resistance = false);

}  // namespace dampdist
