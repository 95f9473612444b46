// SPDX-License-Identifier: Apache-2.0
//
// Batch front end for the damping/dissipation toolkit. Four subcommands:
//   analyze   modes, per-machine energetics, distribution factors, balance
//   sweep     the same across a dispatch or loading sweep, plus plot data
//   simulate  nonlinear ringdown, measured modeshape and energetics
//   verify    structural identity suite for the constant-field model
// Every run writes deterministic CSV files and a manifest into --out.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dampdist/dae.hpp"
#include "dampdist/energetics.hpp"
#include "dampdist/linmodel.hpp"
#include "dampdist/modal.hpp"
#include "dampdist/report.hpp"
#include "dampdist/ringdown.hpp"
#include "dampdist/steady.hpp"
#include "dampdist/sysdata.hpp"

namespace fs = std::filesystem;
using namespace dampdist;

namespace {

struct Options {
  std::string input;
  std::string model = "detailed";
  std::string mode_freq = "0.1:1.08";
  double zeta_max = 0.10;
  double min_rotor_share = 0.2;
  std::string out_dir;
  std::uint64_t seed = 20260819ULL;
  int jobs = 0;
  int ref_machine = 0;  // 1-based, 0 = largest speed amplitude
  bool dump_matrices = false;

  double tol_identity = 1e-8;
  double tol_jacobian = 1e-6;
  double tol_distribution = 1e-6;
  double balance_kappa = 3.0;

  std::vector<std::string> sweep_args;  // kind, lo:hi:n
  std::string tie_pair;                 // from:to

  std::string disturbance = "pulse";
  int bus = 0;
  int machine = 0;  // 1-based, 0 = all machines
  double t_start = 1.0;
  double duration = 0.2;
  double magnitude = 0.05;
  double shunt_b = -1e3;
  double t_end = 15.0;
  double dt = 0.005;
  std::string fit_window;  // lo:hi

  double inject_resistance = 0.0;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_range(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  int n = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1)
    throw ConfigError("range must be lo:hi:count, got '" + text + "'");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

std::pair<double, double> parse_band(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  if (std::sscanf(text.c_str(), "%lf:%lf", &lo, &hi) != 2 || lo < 0 || hi <= lo)
    throw ConfigError("band must be lo:hi with 0 <= lo < hi, got '" + text + "'");
  return {lo, hi};
}

std::pair<int, int> parse_bus_pair(const std::string& text) {
  int a = 0, b = 0;
  if (std::sscanf(text.c_str(), "%d:%d", &a, &b) != 2 || a < 1 || b < 1 || a == b)
    throw ConfigError("bus pair must be from:to, got '" + text + "'");
  return {a, b};
}

std::string glabel(int machine) { return "G" + std::to_string(machine + 1); }

/// Per-machine speed amplitudes of a mode's right eigenvector.
Eigen::VectorXcd speed_shape(const LinearModel& lin, const Mode& mode) {
  Eigen::VectorXcd w(lin.ng());
  for (int i = 0; i < lin.ng(); ++i) w(i) = mode.psi(lin.idx.omega[i]);
  return w;
}

int pick_reference(const LinearModel& lin, const Mode& mode, int requested) {
  if (requested > 0) {
    if (requested > lin.ng())
      throw ConfigError("reference machine G" + std::to_string(requested) +
                        " exceeds machine count");
    return requested - 1;
  }
  Eigen::VectorXcd w = speed_shape(lin, mode);
  int best = 0;
  for (int i = 1; i < lin.ng(); ++i)
    if (std::abs(w(i)) > std::abs(w(best))) best = i;
  return best;
}

/// Runs named pipeline stages, recording wall time and failure point.
class StageRunner {
 public:
  explicit StageRunner(RunManifest& man) : man_(man) {}

  template <class F>
  auto operator()(const std::string& name, F&& fn) {
    current_ = name;
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
      fn();
      push(name, t0);
    } else {
      auto r = fn();
      push(name, t0);
      return r;
    }
  }

  void mark_failed(const std::string& why) {
    man_.steps.push_back({current_, "FAIL", 0.0});
    man_.options["error_at_" + current_] = why;
  }

 private:
  void push(const std::string& name, std::chrono::steady_clock::time_point t0) {
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    man_.steps.push_back({name, "PASS", ms});
  }

  RunManifest& man_;
  std::string current_ = "setup";
};

void add_check(RunManifest& man, const std::string& name, double residual,
               double threshold) {
  man.checks.push_back({name, residual, threshold, residual <= threshold});
}

void write_csv(RunManifest& man, const CsvTable& table, const fs::path& path) {
  table.write(path);
  man.outputs.push_back(path.filename().string());
}

fs::path resolve_out_dir(const Options& opt, const std::string& command) {
  fs::path dir = opt.out_dir.empty() ? fs::path("dampdist_out") / command
                                     : fs::path(opt.out_dir);
  fs::create_directories(dir);
  return dir;
}

void record_common_options(RunManifest& man, const Options& opt) {
  man.options["model"] = opt.model;
  man.options["mode_freq"] = opt.mode_freq;
  man.options["zeta_max"] = fmt_num(opt.zeta_max);
  man.options["min_rotor_share"] = fmt_num(opt.min_rotor_share);
  man.options["seed"] = std::to_string(opt.seed);
  man.options["balance_kappa"] = fmt_num(opt.balance_kappa);
  man.options["tol_identity"] = fmt_num(opt.tol_identity);
  man.options["tol_jacobian"] = fmt_num(opt.tol_jacobian);
  man.options["tol_distribution"] = fmt_num(opt.tol_distribution);
}

ModeFilter make_filter(const Options& opt) {
  const auto [lo, hi] = parse_band(opt.mode_freq);
  ModeFilter f;
  f.f_lo = lo;
  f.f_hi = hi;
  f.zeta_max = opt.zeta_max;
  f.min_rotor_share = opt.min_rotor_share;
  return f;
}

SystemSpec load_model(const Options& opt) {
  SystemSpec sys = load_system(opt.input);
  if (opt.model == "simplified") sys = as_simplified(sys);
  return sys;
}

struct SolvedCase {
  SystemSpec sys;
  Eigen::MatrixXcd ybus;
  OperatingPoint op;
  LinearModel lin;
  ModalDecomposition md;
  std::vector<int> selected;  // ascending frequency
};

SolvedCase solve_case(SystemSpec sys, const ModeFilter& filter) {
  SolvedCase c;
  c.sys = std::move(sys);
  c.ybus = build_ybus(c.sys);
  c.op = solve_powerflow(c.sys, c.ybus);
  init_machines(c.sys, c.ybus, c.op);
  c.lin = build_linear_model(c.sys, c.ybus, c.op);
  c.md = eig_modes(c.lin);
  c.selected = select_em_modes(c.md, filter);
  std::sort(c.selected.begin(), c.selected.end(), [&](int a, int b) {
    return c.md.oscillatory[a].freq_hz < c.md.oscillatory[b].freq_hz;
  });
  return c;
}

/// Everything the reports need about one mode at one operating point.
struct ModeAnalysis {
  int ref = 0;
  PhasorSet ph;
  DampingPowers dp;
  DissipationPowers ds;
  BalanceReport br;
  bool has_df = false;
  DistributionFactors df;
};

ModeAnalysis analyze_mode(const LinearModel& lin, const Mode& mode,
                          int requested_ref, double kappa) {
  ModeAnalysis a;
  a.ref = pick_reference(lin, mode, requested_ref);
  a.ph = make_phasors(lin, mode, PhasorNorm::ReferenceMachine, a.ref);
  TorqueTransfer tt = torque_transfer(lin, mode.lambda.imag());
  a.dp = damping_powers(tt, a.ph);
  a.ds = dissipation_powers(lin, a.ph);
  a.br = balance_check(a.dp, a.ds, mode, kappa);
  if (lin.simplified) {
    a.df = distribution_factors(lin, mode, a.ph, a.dp, a.ds);
    a.has_df = true;
  }
  return a;
}

void print_mode_table(const LinearModel& lin, const ModalDecomposition& md,
                      const std::vector<int>& selected) {
  std::printf("%-5s %9s %8s %9s %6s %5s\n", "mode", "freq_hz", "zeta",
              "sigma", "share", "ref");
  for (std::size_t r = 0; r < selected.size(); ++r) {
    const Mode& m = md.oscillatory[selected[r]];
    std::printf("M%-4zu %9.4f %8.4f %9.4f %6.2f %5s\n", r + 1, m.freq_hz,
                m.zeta, m.lambda.real(), m.rotor_share,
                glabel(pick_reference(lin, m, 0)).c_str());
  }
}

void print_balance_line(std::size_t rank, const Mode& mode,
                        const BalanceReport& br) {
  std::printf(
      "M%-4zu f %7.4f  wd_total %11.4e  wdiss_total %11.4e  residual %9.3e  "
      "bound %9.3e  %s\n",
      rank + 1, mode.freq_hz, br.wd_total, br.dissipation_total,
      br.rel_residual, br.bound, br.pass ? "PASS" : "FAIL");
}

// ---------------------------------------------------------------- analyze

void emit_mode_reports(RunManifest& man, const fs::path& out,
                       const LinearModel& lin, const ModalDecomposition& md,
                       const std::vector<int>& selected,
                       const std::vector<ModeAnalysis>& analyses,
                       double tol_distribution) {
  const int ng = lin.ng();

  CsvTable modes;
  modes.header = {"mode", "freq_hz", "zeta", "sigma", "omega_rad",
                  "rotor_share", "ref_machine"};
  CsvTable energy;
  energy.header = {"mode", "machine", "wd", "kd", "ks", "wf", "wg",
                   "wf_over_wd"};
  CsvTable balance;
  balance.header = {"mode",        "freq_hz", "zeta",  "wd_total",
                    "wdiss_total", "residual", "bound", "status"};
  CsvTable dist;
  dist.header = {"mode", "kind", "machine"};
  for (int j = 0; j < ng; ++j) dist.header.push_back(glabel(j));

  nlohmann::ordered_json jmodes = nlohmann::ordered_json::array();

  for (std::size_t r = 0; r < selected.size(); ++r) {
    const Mode& m = md.oscillatory[selected[r]];
    const ModeAnalysis& a = analyses[r];
    const std::string id = "M" + std::to_string(r + 1);

    modes.add_row({id, fmt_num(m.freq_hz), fmt_num(m.zeta),
                   fmt_num(m.lambda.real()), fmt_num(m.lambda.imag()),
                   fmt_num(m.rotor_share), glabel(a.ref)});

    nlohmann::ordered_json jm;
    jm["mode"] = id;
    jm["freq_hz"] = m.freq_hz;
    jm["zeta"] = m.zeta;
    jm["ref_machine"] = glabel(a.ref);
    jm["machines"] = nlohmann::ordered_json::array();
    for (int i = 0; i < ng; ++i) {
      const double ratio =
          std::abs(a.dp.wd(i)) > 1e-300 ? a.ds.wf(i) / a.dp.wd(i) : 0.0;
      energy.add_row({id, glabel(i), fmt_num(a.dp.wd(i)), fmt_num(a.dp.kd(i)),
                      fmt_num(a.dp.ks(i)), fmt_num(a.ds.wf(i)),
                      fmt_num(a.ds.wg(i)), fmt_num(ratio)});
      jm["machines"].push_back({{"machine", glabel(i)},
                                {"wd", a.dp.wd(i)},
                                {"kd", a.dp.kd(i)},
                                {"ks", a.dp.ks(i)},
                                {"wf", a.ds.wf(i)},
                                {"wg", a.ds.wg(i)}});
    }
    jm["wd_total"] = a.br.wd_total;
    jm["dissipation_total"] = a.br.dissipation_total;
    jm["balance_residual"] = a.br.rel_residual;
    jm["balance_bound"] = a.br.bound;
    jm["balance_pass"] = a.br.pass;
    jmodes.push_back(jm);

    balance.add_row({id, fmt_num(m.freq_hz), fmt_num(m.zeta),
                     fmt_num(a.br.wd_total), fmt_num(a.br.dissipation_total),
                     fmt_num(a.br.rel_residual), fmt_num(a.br.bound),
                     a.br.pass ? "PASS" : "FAIL"});
    add_check(man, "balance_" + id, a.br.rel_residual, a.br.bound);

    if (a.has_df) {
      for (int i = 0; i < ng; ++i) {
        std::vector<std::string> ra = {id, "alpha", glabel(i)};
        std::vector<std::string> rf = {id, "fraction", glabel(i)};
        for (int j = 0; j < ng; ++j) {
          ra.push_back(fmt_num(a.df.alpha(i, j)));
          rf.push_back(fmt_num(a.df.f(i, j)));
        }
        dist.add_row(std::move(ra));
        dist.add_row(std::move(rf));
      }
      add_check(man, "distribution_rows_" + id,
                a.df.row_residual.maxCoeff(), tol_distribution);
      double fsum_res = 0.0;
      for (int i = 0; i < ng; ++i)
        fsum_res = std::max(fsum_res, std::abs(a.df.f.row(i).sum() - 1.0));
      add_check(man, "distribution_fraction_sum_" + id, fsum_res,
                tol_distribution);
    }
  }

  write_csv(man, modes, out / "modes.csv");
  write_csv(man, energy, out / "energetics.csv");
  write_csv(man, balance, out / "balance.csv");
  if (!dist.rows.empty()) write_csv(man, dist, out / "distribution.csv");

  nlohmann::ordered_json jroot;
  jroot["system"] = lin.sys.name;
  jroot["model"] = lin.simplified ? "simplified" : "detailed";
  jroot["modes"] = jmodes;
  std::ofstream jf(out / "energetics.json");
  jf << jroot.dump(2) << "\n";
  man.outputs.push_back("energetics.json");
}

void dump_matrices(RunManifest& man, const fs::path& out,
                   const LinearModel& lin) {
  const fs::path dir = out / "matrices";
  fs::create_directories(dir);
  auto dump = [&](const std::string& name, const Eigen::MatrixXd& mat) {
    CsvTable t;
    for (int j = 0; j < mat.cols(); ++j)
      t.header.push_back("c" + std::to_string(j));
    for (int i = 0; i < mat.rows(); ++i) {
      std::vector<std::string> row(mat.cols());
      for (int j = 0; j < mat.cols(); ++j) row[j] = fmt_num(mat(i, j));
      t.add_row(std::move(row));
    }
    t.write(dir / (name + ".csv"));
    man.outputs.push_back("matrices/" + name + ".csv");
  };
  dump("A", lin.A);
  dump("M", lin.M);
  dump("N", lin.N);
  dump("C", lin.C);
  dump("D", lin.D);
  dump("A21", lin.A21);
  dump("A23", lin.A23);
  dump("A31", lin.A31);
  dump("A33", lin.A33);
}

int cmd_analyze(const Options& opt) {
  const fs::path out = resolve_out_dir(opt, "analyze");
  RunManifest man;
  man.command = "analyze";
  man.input_path = opt.input;
  record_common_options(man, opt);
  StageRunner stage(man);
  int rc = 0;
  try {
    man.input_digest = fnv1a_digest(opt.input);
    const ModeFilter filter = make_filter(opt);
    SolvedCase c =
        stage("ingest_and_solve", [&] { return solve_case(load_model(opt), filter); });
    add_check(man, "powerflow_mismatch", c.op.max_mismatch, 1e-9);

    std::vector<ModeAnalysis> analyses;
    stage("mode_energetics", [&] {
      for (int k : c.selected)
        analyses.push_back(analyze_mode(c.lin, c.md.oscillatory[k],
                                        opt.ref_machine, opt.balance_kappa));
    });

    stage("reports", [&] {
      emit_mode_reports(man, out, c.lin, c.md, c.selected, analyses,
                        opt.tol_distribution);
      if (opt.dump_matrices) dump_matrices(man, out, c.lin);
    });

    std::printf("%s [%s]  %zu modes selected in band %s, zeta <= %s\n",
                c.sys.name.c_str(), opt.model.c_str(), c.selected.size(),
                opt.mode_freq.c_str(), fmt_num(opt.zeta_max).c_str());
    print_mode_table(c.lin, c.md, c.selected);
    for (std::size_t r = 0; r < c.selected.size(); ++r)
      print_balance_line(r, c.md.oscillatory[c.selected[r]], analyses[r].br);
    rc = man.all_pass() ? 0 : 1;
  } catch (const std::exception& ex) {
    stage.mark_failed(ex.what());
    std::fprintf(stderr, "analyze: %s\n", ex.what());
    rc = 3;
  }
  man.write(out / "manifest.json");
  if (rc != 0) std::printf("analyze: FAIL (exit %d)\n", rc);
  return rc;
}

// ------------------------------------------------------------------ sweep

struct SweepSetup {
  SweepPlan plan;
  std::string kind;
};

SweepSetup make_sweep_plan(const Options& opt) {
  if (opt.sweep_args.size() != 2)
    throw ConfigError("--sweep requires a kind (tie|load) and a lo:hi:count range");
  SweepSetup s;
  s.kind = opt.sweep_args[0];
  s.plan.values = parse_range(opt.sweep_args[1]);
  if (s.kind == "tie") {
    s.plan.kind = SweepKind::TieFlow;
    if (opt.tie_pair.empty())
      throw ConfigError("tie sweeps need --tie from:to bus pair");
    std::tie(s.plan.tie_from, s.plan.tie_to) = parse_bus_pair(opt.tie_pair);
  } else if (s.kind == "load") {
    s.plan.kind = SweepKind::LoadScale;
  } else {
    throw ConfigError("sweep kind must be tie or load, got '" + s.kind + "'");
  }
  return s;
}

int worker_count(const Options& opt, std::size_t n_items) {
  int n = opt.jobs > 0 ? opt.jobs
                       : static_cast<int>(std::thread::hardware_concurrency());
  n = std::clamp(n, 1, 8);
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(n_items, 1)));
}

/// Runs fn(i) for i in [0, n) on a bounded pool, any exception rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::string> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (const std::exception& ex) {
          if (errors[w].empty()) errors[w] = ex.what();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
}

struct PointAnalysis {
  bool solved = false;
  std::string error;
  double target = 0.0, realized = 0.0;
  LinearModel lin;
  ModalDecomposition md;
  std::vector<int> candidates;
};

int cmd_sweep(const Options& opt) {
  const fs::path out = resolve_out_dir(opt, "sweep");
  RunManifest man;
  man.command = "sweep";
  man.input_path = opt.input;
  record_common_options(man, opt);
  StageRunner stage(man);
  int rc = 0;
  try {
    man.input_digest = fnv1a_digest(opt.input);
    const SweepSetup setup = make_sweep_plan(opt);
    man.options["sweep_kind"] = setup.kind;
    man.options["sweep_range"] = opt.sweep_args[1];
    if (!opt.tie_pair.empty()) man.options["tie"] = opt.tie_pair;
    const ModeFilter filter = make_filter(opt);

    SystemSpec base = stage("ingest", [&] { return load_model(opt); });
    std::vector<SweepPoint> points =
        stage("operating_points", [&] { return run_sweep(base, setup.plan); });

    const int np = static_cast<int>(points.size());
    std::vector<PointAnalysis> pa(points.size());
    stage("linearize_points", [&] {
      parallel_for(np, worker_count(opt, points.size()), [&](int i) {
        PointAnalysis& p = pa[i];
        p.target = points[i].target;
        p.realized = points[i].realized;
        p.solved = points[i].solved;
        p.error = points[i].error;
        if (!p.solved) return;
        const Eigen::MatrixXcd ybus = build_ybus(points[i].sys);
        p.lin = build_linear_model(points[i].sys, ybus, points[i].op);
        p.md = eig_modes(p.lin);
        p.candidates = select_em_modes(p.md, filter);
      });
    });

    // Mode identity across points: ranks fixed at the first solved point,
    // then chained shape matching.
    CsvTable pts;
    pts.header = {"point", "target", "realized", "solved", "error"};
    CsvTable bal;
    bal.header = {"point", "x",        "mode",        "freq_hz",
                  "zeta",  "wd_total", "wdiss_total", "residual",
                  "bound", "status"};
    CsvTable ratios;
    ratios.header = {"point", "x",  "mode", "machine",
                     "wd",    "wf", "wf_over_wd"};
    CsvTable distf;
    distf.header = {"point", "x",     "mode",    "machine_i",
                    "machine_j", "alpha", "fraction"};
    CsvTable colsum;
    colsum.header = {"point", "x", "mode", "machine_j", "alpha_colsum"};

    stage("mode_energetics", [&] {
      std::vector<Eigen::VectorXcd> tracked;  // shape per rank, updated
      bool seeded = false;
      for (int i = 0; i < np; ++i) {
        const PointAnalysis& p = pa[i];
        pts.add_row({std::to_string(i), fmt_num(p.target), fmt_num(p.realized),
                     p.solved ? "1" : "0", p.error});
        if (!p.solved) {
          man.checks.push_back({"point_" + std::to_string(i) + "_solve", 1.0,
                                0.5, false});
          continue;
        }
        std::vector<int> ranked;
        if (!seeded) {
          ranked = p.candidates;
          std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
            return p.md.oscillatory[a].freq_hz < p.md.oscillatory[b].freq_hz;
          });
          tracked.resize(ranked.size());
          seeded = true;
        } else {
          ranked.assign(tracked.size(), -1);
          for (std::size_t r = 0; r < tracked.size(); ++r)
            ranked[r] = match_mode(p.md, p.candidates, tracked[r], p.lin);
        }
        const fs::path pdir =
            out / "points" / ("p" + std::to_string(i));
        fs::create_directories(pdir);
        RunManifest pman;  // per-point file set mirrors cmd_analyze
        pman.command = "sweep_point";
        pman.input_path = opt.input;
        std::vector<int> present;
        std::vector<ModeAnalysis> analyses;
        for (std::size_t r = 0; r < ranked.size(); ++r) {
          if (ranked[r] < 0) continue;
          const Mode& m = p.md.oscillatory[ranked[r]];
          tracked[r] = speed_shape(p.lin, m);
          ModeAnalysis a = analyze_mode(p.lin, m, opt.ref_machine,
                                        opt.balance_kappa);
          const std::string id = "M" + std::to_string(r + 1);
          const std::string px = std::to_string(i);
          bal.add_row({px, fmt_num(p.realized), id, fmt_num(m.freq_hz),
                       fmt_num(m.zeta), fmt_num(a.br.wd_total),
                       fmt_num(a.br.dissipation_total),
                       fmt_num(a.br.rel_residual), fmt_num(a.br.bound),
                       a.br.pass ? "PASS" : "FAIL"});
          add_check(man, "balance_p" + px + "_" + id, a.br.rel_residual,
                    a.br.bound);
          for (int g = 0; g < p.lin.ng(); ++g) {
            const double ratio = std::abs(a.dp.wd(g)) > 1e-300
                                     ? a.ds.wf(g) / a.dp.wd(g)
                                     : 0.0;
            ratios.add_row({px, fmt_num(p.realized), id, glabel(g),
                            fmt_num(a.dp.wd(g)), fmt_num(a.ds.wf(g)),
                            fmt_num(ratio)});
          }
          if (a.has_df) {
            for (int gi = 0; gi < p.lin.ng(); ++gi)
              for (int gj = 0; gj < p.lin.ng(); ++gj)
                distf.add_row({px, fmt_num(p.realized), id, glabel(gi),
                               glabel(gj), fmt_num(a.df.alpha(gi, gj)),
                               fmt_num(a.df.f(gi, gj))});
            const Eigen::VectorXd cs = a.df.alpha.colwise().sum();
            for (int gj = 0; gj < p.lin.ng(); ++gj)
              colsum.add_row({px, fmt_num(p.realized), id, glabel(gj),
                              fmt_num(cs(gj))});
            add_check(man, "distribution_rows_p" + px + "_" + id,
                      a.df.row_residual.maxCoeff(), opt.tol_distribution);
          }
          present.push_back(ranked[r]);
          analyses.push_back(std::move(a));
        }
        emit_mode_reports(pman, pdir, p.lin, p.md, present, analyses,
                          opt.tol_distribution);
      }
    });

    stage("reports", [&] {
      write_csv(man, pts, out / "sweep_points.csv");
      write_csv(man, bal, out / "balance_sweep.csv");
      write_csv(man, ratios, out / "ratios_sweep.csv");
      if (!distf.rows.empty()) {
        write_csv(man, distf, out / "distribution_sweep.csv");
        write_csv(man, colsum, out / "alpha_colsums_sweep.csv");
      }
      nlohmann::ordered_json plots;
      plots["x_axis"] = setup.kind == "tie" ? "tie transfer (pu)"
                                            : "load scale factor";
      plots["plots"] = nlohmann::ordered_json::array();
      plots["plots"].push_back(
          {{"file", "balance_sweep.csv"},
           {"x", "x"},
           {"series", "mode"},
           {"y", {"wd_total", "wdiss_total"}},
           {"what", "total damping power and total dissipation power"}});
      plots["plots"].push_back(
          {{"file", "ratios_sweep.csv"},
           {"x", "x"},
           {"series", "mode,machine"},
           {"y", {"wf_over_wd"}},
           {"what", "field dissipation share of each machine's damping power"}});
      plots["plots"].push_back(
          {{"file", "distribution_sweep.csv"},
           {"x", "x"},
           {"series", "mode,machine_i,machine_j"},
           {"y", {"fraction"}},
           {"what", "row-normalized damping source fractions"}});
      plots["plots"].push_back(
          {{"file", "alpha_colsums_sweep.csv"},
           {"x", "x"},
           {"series", "mode,machine_j"},
           {"y", {"alpha_colsum"}},
           {"what", "distribution factor column sums"}});
      std::ofstream pf(out / "plot_manifest.json");
      pf << plots.dump(2) << "\n";
      man.outputs.push_back("plot_manifest.json");
    });

    int solved = 0;
    for (const auto& p : pa) solved += p.solved ? 1 : 0;
    std::printf("sweep %s over %zu points (%d solved), results in %s\n",
                setup.kind.c_str(), pa.size(), solved, out.string().c_str());
    rc = man.all_pass() ? 0 : 1;
  } catch (const std::exception& ex) {
    stage.mark_failed(ex.what());
    std::fprintf(stderr, "sweep: %s\n", ex.what());
    rc = 3;
  }
  man.write(out / "manifest.json");
  if (rc != 0) std::printf("sweep: FAIL (exit %d)\n", rc);
  return rc;
}

// --------------------------------------------------------------- simulate

int cmd_simulate(const Options& opt) {
  const fs::path out = resolve_out_dir(opt, "simulate");
  RunManifest man;
  man.command = "simulate";
  man.input_path = opt.input;
  record_common_options(man, opt);
  man.options["disturbance"] = opt.disturbance;
  man.options["t_start"] = fmt_num(opt.t_start);
  man.options["duration"] = fmt_num(opt.duration);
  man.options["t_end"] = fmt_num(opt.t_end);
  man.options["dt"] = fmt_num(opt.dt);
  StageRunner stage(man);
  int rc = 0;
  try {
    if (opt.t_start < 0.0)
      throw ConfigError("disturbance must not start before t = 0");
    if (opt.duration <= 0.0)
      throw ConfigError("disturbance duration must be positive");
    if (opt.t_start + opt.duration >= opt.t_end)
      throw ConfigError("disturbance must end before t_end");

    Disturbance dist;
    if (opt.disturbance == "fault") {
      dist.kind = Disturbance::Kind::BusFault;
      if (opt.bus < 1) throw ConfigError("fault disturbances need --bus");
      dist.bus = opt.bus;
      dist.shunt_b = opt.shunt_b;
    } else if (opt.disturbance == "pulse") {
      dist.kind = Disturbance::Kind::FieldPulse;
      dist.machine = opt.machine - 1;  // 0 means every machine
      dist.magnitude = opt.magnitude;
    } else {
      throw ConfigError("disturbance must be fault or pulse, got '" +
                        opt.disturbance + "'");
    }
    dist.t_start = opt.t_start;
    dist.duration = opt.duration;

    man.input_digest = fnv1a_digest(opt.input);
    const ModeFilter filter = make_filter(opt);
    SolvedCase c =
        stage("ingest_and_solve", [&] { return solve_case(load_model(opt), filter); });

    SimOptions sim;
    sim.t_end = opt.t_end;
    sim.dt = opt.dt;
    Trajectory traj =
        stage("simulate", [&] { return simulate(c.sys, c.ybus, c.op, dist, sim); });

    double fit_lo = opt.t_start + opt.duration + 0.5;
    double fit_hi = opt.t_end;
    if (!opt.fit_window.empty())
      std::tie(fit_lo, fit_hi) = parse_band(opt.fit_window);

    const int ng = c.lin.ng();
    CsvTable est_table;
    est_table.header = {"mode",    "freq_hz_fit", "zeta_fit",  "freq_hz_model",
                        "zeta_model", "ref_machine", "fit_residual"};
    CsvTable shape_table;
    shape_table.header = {"mode",     "machine",   "amp_meas", "phase_deg_meas",
                          "amp_model", "phase_deg_model"};
    CsvTable cmp_table;
    cmp_table.header = {"mode", "machine", "wd_model", "wd_meas", "wf_model",
                        "wf_meas", "wf_over_wd_model", "wf_over_wd_meas"};
    CsvTable tot_table;
    tot_table.header = {"mode", "quantity", "model", "measured"};

    stage("estimate_and_compare", [&] {
      for (std::size_t r = 0; r < c.selected.size(); ++r) {
        const Mode& m = c.md.oscillatory[c.selected[r]];
        const std::string id = "M" + std::to_string(r + 1);
        const int ref = pick_reference(c.lin, m, opt.ref_machine);
        ModeEstimate est =
            estimate_mode(traj, fit_lo, fit_hi, m.freq_hz, ref);
        EnergyReport ss = model_energetics(c.lin, m, ref);
        EnergyReport meas = measured_energetics(c.sys, est);
        PhasorSet ph = make_phasors(c.lin, m, PhasorNorm::ReferenceMachine, ref);

        est_table.add_row({id, fmt_num(est.freq_hz), fmt_num(est.zeta),
                           fmt_num(m.freq_hz), fmt_num(m.zeta), glabel(ref),
                           fmt_num(est.fit_residual)});
        add_check(man, "fit_residual_" + id, est.fit_residual, 0.25);
        add_check(man, "fit_freq_" + id,
                  std::abs(est.freq_hz / m.freq_hz - 1.0), 0.1);

        std::printf("%s  fitted f %.4f Hz zeta %.4f (model %.4f/%.4f), "
                    "ref %s, residual %.3e\n",
                    id.c_str(), est.freq_hz, est.zeta, m.freq_hz, m.zeta,
                    glabel(ref).c_str(), est.fit_residual);
        std::printf("  %-5s %12s %12s %12s %12s\n", "mach", "amp_meas",
                    "phase_meas", "amp_model", "phase_model");
        for (int g = 0; g < ng; ++g) {
          const std::complex<double> wm = est.omega(g);
          const std::complex<double> ws = ph.omega(g);
          shape_table.add_row(
              {id, glabel(g), fmt_num(std::abs(wm)),
               fmt_num(std::arg(wm) * 180.0 / M_PI), fmt_num(std::abs(ws)),
               fmt_num(std::arg(ws) * 180.0 / M_PI)});
          std::printf("  %-5s %12.5f %12.2f %12.5f %12.2f\n",
                      glabel(g).c_str(), std::abs(wm),
                      std::arg(wm) * 180.0 / M_PI, std::abs(ws),
                      std::arg(ws) * 180.0 / M_PI);
          const double rm = std::abs(meas.wd(g)) > 1e-300
                                ? meas.wf(g) / meas.wd(g)
                                : 0.0;
          const double rs = std::abs(ss.wd(g)) > 1e-300
                                ? ss.wf(g) / ss.wd(g)
                                : 0.0;
          cmp_table.add_row({id, glabel(g), fmt_num(ss.wd(g)),
                             fmt_num(meas.wd(g)), fmt_num(ss.wf(g)),
                             fmt_num(meas.wf(g)), fmt_num(rs), fmt_num(rm)});
        }
        tot_table.add_row({id, "wd_total", fmt_num(ss.wd_total),
                           fmt_num(meas.wd_total)});
        tot_table.add_row({id, "dissipation_total",
                           fmt_num(ss.dissipation_total),
                           fmt_num(meas.dissipation_total)});
        tot_table.add_row({id, "balance_residual",
                           fmt_num(ss.balance_residual),
                           fmt_num(meas.balance_residual)});
        std::printf("  totals: wd %.5e/%.5e  wdiss %.5e/%.5e  "
                    "balance residual %.3e/%.3e (model/measured)\n",
                    ss.wd_total, meas.wd_total, ss.dissipation_total,
                    meas.dissipation_total, ss.balance_residual,
                    meas.balance_residual);
      }
    });

    stage("reports", [&] {
      CsvTable tm;
      tm.header = {"t"};
      for (int g = 0; g < ng; ++g)
        for (const char* q : {"omega", "delta", "te", "eq", "efd"})
          tm.header.push_back(std::string(q) + "_" + glabel(g));
      for (int k = 0; k < traj.t.size(); ++k) {
        std::vector<std::string> row;
        row.push_back(fmt_num(traj.t(k)));
        for (int g = 0; g < ng; ++g) {
          row.push_back(fmt_num(traj.omega(k, g)));
          row.push_back(fmt_num(traj.delta(k, g)));
          row.push_back(fmt_num(traj.te(k, g)));
          row.push_back(fmt_num(traj.eq(k, g)));
          row.push_back(fmt_num(traj.efd(k, g)));
        }
        tm.add_row(std::move(row));
      }
      write_csv(man, tm, out / "trajectory_machines.csv");

      CsvTable tb;
      tb.header = {"t"};
      for (int b = 0; b < c.sys.n_bus(); ++b) {
        tb.header.push_back("theta_" + std::to_string(c.sys.buses[b].id));
        tb.header.push_back("v_" + std::to_string(c.sys.buses[b].id));
      }
      for (int k = 0; k < traj.t.size(); ++k) {
        std::vector<std::string> row;
        row.push_back(fmt_num(traj.t(k)));
        for (int b = 0; b < c.sys.n_bus(); ++b) {
          row.push_back(fmt_num(traj.theta(k, b)));
          row.push_back(fmt_num(traj.vmag(k, b)));
        }
        tb.add_row(std::move(row));
      }
      write_csv(man, tb, out / "trajectory_buses.csv");
      write_csv(man, est_table, out / "estimates.csv");
      write_csv(man, shape_table, out / "modeshape.csv");
      write_csv(man, cmp_table, out / "comparison.csv");
      write_csv(man, tot_table, out / "comparison_totals.csv");
    });
    rc = man.all_pass() ? 0 : 1;
  } catch (const ConfigError& ex) {
    stage.mark_failed(ex.what());
    std::fprintf(stderr, "simulate: %s\n", ex.what());
    rc = 2;
  } catch (const std::exception& ex) {
    stage.mark_failed(ex.what());
    std::fprintf(stderr, "simulate: %s\n", ex.what());
    rc = 3;
  }
  man.write(out / "manifest.json");
  if (rc != 0) std::printf("simulate: FAIL (exit %d)\n", rc);
  return rc;
}

// ----------------------------------------------------------------- verify

/// Central finite differences of the model equations against the analytic
/// Jacobian blocks. Returns the worst relative error over significant
/// entries per block, keyed by block name.
std::map<std::string, double> fd_jacobian_check(const SystemSpec& sys,
                                                const Eigen::MatrixXcd& ybus,
                                                const OperatingPoint& op) {
  DaeModel model(sys, ybus);
  Eigen::VectorXd x0, y0;
  DaeInputs u0;
  pack_equilibrium(model, op, x0, y0, u0);
  DaeEval an = model.eval(x0, y0, u0, true);

  const int ns = static_cast<int>(x0.size());
  const int ny = static_cast<int>(y0.size());
  Eigen::MatrixXd fd_fx(ns, ns), fd_fy(ns, ny), fd_gx(ny, ns), fd_gy(ny, ny);
  auto column = [&](Eigen::VectorXd x, Eigen::VectorXd y, int j, bool in_x) {
    const double h = 1e-6 * std::max(1.0, std::abs(in_x ? x(j) : y(j)));
    if (in_x) x(j) += h; else y(j) += h;
    DaeEval up = model.eval(x, y, u0, false);
    if (in_x) x(j) -= 2 * h; else y(j) -= 2 * h;
    DaeEval dn = model.eval(x, y, u0, false);
    return std::make_pair(
        Eigen::VectorXd((up.f - dn.f) / (2 * h)),
        Eigen::VectorXd((up.g - dn.g) / (2 * h)));
  };
  for (int j = 0; j < ns; ++j) {
    auto [df, dg] = column(x0, y0, j, true);
    fd_fx.col(j) = df;
    fd_gx.col(j) = dg;
  }
  for (int j = 0; j < ny; ++j) {
    auto [df, dg] = column(x0, y0, j, false);
    fd_fy.col(j) = df;
    fd_gy.col(j) = dg;
  }

  auto worst = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double w = 0.0;
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) {
        const double ref = std::abs(a(i, j));
        const double err = std::abs(a(i, j) - b(i, j));
        if (ref > 1e-8) w = std::max(w, err / ref);
        else w = std::max(w, err > 1e-6 ? err : 0.0);
      }
    return w;
  };
  return {{"jacobian_dfdx", worst(an.dfdx, fd_fx)},
          {"jacobian_dfdy", worst(an.dfdy, fd_fy)},
          {"jacobian_dgdx", worst(an.dgdx, fd_gx)},
          {"jacobian_dgdy", worst(an.dgdy, fd_gy)}};
}

void verify_one_point(const Options& opt, const std::string& tag,
                      SystemSpec sys, RunManifest& man) {
  if (opt.inject_resistance > 0.0)
    for (auto& br : sys.branches) br.r = opt.inject_resistance * std::abs(br.x);
  const Eigen::MatrixXcd ybus = build_ybus(sys, opt.inject_resistance > 0.0);
  OperatingPoint op = solve_powerflow(sys, ybus);
  init_machines(sys, ybus, op);
  const LinearModel lin = build_linear_model(sys, ybus, op);

  auto check = [&](const std::string& name, double residual, double tol) {
    add_check(man, tag + name, residual, tol);
    std::printf("  %-28s %12.4e  tol %8.1e  %s\n", name.c_str(), residual,
                tol, residual <= tol ? "PASS" : "FAIL");
  };

  const ModalDecomposition md = eig_modes(lin);
  std::vector<int> sel = select_em_modes(md, make_filter(opt));
  std::sort(sel.begin(), sel.end(), [&](int a, int b) {
    return md.oscillatory[a].freq_hz < md.oscillatory[b].freq_hz;
  });
  std::vector<double> omegas;
  for (int k : sel) omegas.push_back(md.oscillatory[k].lambda.imag());
  if (omegas.empty()) omegas.push_back(2.0 * M_PI * 0.5);

  const ClaimsReport claims =
      verify_claims(lin, omegas, opt.seed, opt.tol_identity);
  check("claim1_winding_similarity", claims.winding_similarity,
        opt.tol_identity);
  check("claim2_coupling_reciprocity", claims.coupling_reciprocity,
        opt.tol_identity);
  check("claim3_acceleration_symmetry", claims.acceleration_symmetry,
        opt.tol_identity);
  check("claim4_quadratic_form", claims.quadratic_form, opt.tol_identity);

  for (const auto& [name, residual] : fd_jacobian_check(sys, ybus, op))
    check(name, residual, opt.tol_jacobian);

  const double dnorm = lin.D.cwiseAbs().maxCoeff();
  check("d_block_symmetry",
        (lin.D - lin.D.transpose()).cwiseAbs().maxCoeff() /
            std::max(dnorm, 1e-300),
        1e-12);

  double ksym = 0.0, wr3_matrix = 0.0, wr3_total = 0.0;
  for (double w : omegas) {
    const TorqueTransfer tt = torque_transfer(lin, w);
    const double kscale = tt.k.cwiseAbs().maxCoeff();
    ksym = std::max(
        ksym, (tt.k - tt.k.transpose()).cwiseAbs().maxCoeff() / kscale);
    wr3_matrix = std::max(
        wr3_matrix, (tt.k.real() - tt.re_k_closed).cwiseAbs().maxCoeff() /
                        std::max(tt.re_k_closed.cwiseAbs().maxCoeff(), 1e-300));
  }
  check("k_symmetry", ksym, opt.tol_identity);
  check("re_k_closed_form", wr3_matrix, opt.tol_identity);

  double row_worst = 0.0;
  for (int k : sel) {
    const Mode& m = md.oscillatory[k];
    ModeAnalysis a = analyze_mode(lin, m, opt.ref_machine, opt.balance_kappa);
    const TorqueTransfer tt = torque_transfer(lin, m.lambda.imag());
    const double closed =
        (a.ph.omega.adjoint() * tt.re_k_closed.cast<std::complex<double>>() *
         a.ph.omega)(0)
            .real();
    wr3_total = std::max(wr3_total,
                         std::abs(closed - a.dp.total) /
                             std::max(std::abs(a.dp.total), 1e-300));
    if (a.has_df) row_worst = std::max(row_worst, a.df.row_residual.maxCoeff());
  }
  check("wd_total_closed_form", wr3_total, opt.tol_identity);
  check("distribution_row_identity", row_worst, opt.tol_distribution);
}

int cmd_verify(const Options& opt) {
  const fs::path out = resolve_out_dir(opt, "verify");
  RunManifest man;
  man.command = "verify";
  man.input_path = opt.input;
  record_common_options(man, opt);
  if (opt.inject_resistance > 0.0)
    man.options["inject_resistance"] = fmt_num(opt.inject_resistance);
  StageRunner stage(man);
  int rc = 0;
  try {
    if (opt.model == "detailed")
      throw ConfigError(
          "identity checks hold for the constant-field reduced model; "
          "regulator dynamics break the winding symmetry, rerun with "
          "--model simplified");
    man.input_digest = fnv1a_digest(opt.input);
    SystemSpec base =
        stage("ingest", [&] { return as_simplified(load_system(opt.input)); });

    if (opt.sweep_args.empty()) {
      stage("identity_suite", [&] { verify_one_point(opt, "", base, man); });
    } else {
      const SweepSetup setup = make_sweep_plan(opt);
      man.options["sweep_kind"] = setup.kind;
      man.options["sweep_range"] = opt.sweep_args[1];
      std::vector<SweepPoint> points =
          stage("operating_points", [&] { return run_sweep(base, setup.plan); });
      stage("identity_suite", [&] {
        for (std::size_t i = 0; i < points.size(); ++i) {
          std::printf("point %zu  %s %s:\n", i, setup.kind.c_str(),
                      fmt_num(points[i].target).c_str());
          if (!points[i].solved) {
            man.checks.push_back({"point_" + std::to_string(i) + "_solve",
                                  1.0, 0.5, false});
            std::printf("  operating point failed: %s\n",
                        points[i].error.c_str());
            continue;
          }
          verify_one_point(opt, "p" + std::to_string(i) + "_", points[i].sys,
                           man);
        }
      });
    }

    CsvTable table;
    table.header = {"check", "residual", "threshold", "status"};
    for (const auto& c : man.checks)
      table.add_row({c.name, fmt_num(c.residual), fmt_num(c.threshold),
                     c.pass ? "PASS" : "FAIL"});
    write_csv(man, table, out / "verify.csv");
    rc = man.all_pass() ? 0 : 1;
    std::printf("verify: %s\n", rc == 0 ? "all identities PASS" : "FAIL");
  } catch (const ConfigError& ex) {
    stage.mark_failed(ex.what());
    std::fprintf(stderr, "verify: %s\n", ex.what());
    rc = 2;
  } catch (const std::exception& ex) {
    stage.mark_failed(ex.what());
    std::fprintf(stderr, "verify: %s\n", ex.what());
    rc = 3;
  }
  man.write(out / "manifest.json");
  return rc;
}

void add_common_flags(CLI::App* sub, Options& opt) {
  sub->add_option("input", opt.input, "system description JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--model", opt.model, "simplified or detailed")
      ->check(CLI::IsMember({"simplified", "detailed"}));
  sub->add_option("--mode-freq", opt.mode_freq,
                  "mode selection band, lo:hi Hz");
  sub->add_option("--zeta-max", opt.zeta_max,
                  "damping ratio ceiling for mode selection");
  sub->add_option("--min-rotor-share", opt.min_rotor_share,
                  "rotor participation floor for mode selection");
  sub->add_option("--out", opt.out_dir, "output directory")
      ->envname("DAMPDIST_OUT");
  sub->add_option("--seed", opt.seed, "random draw seed");
  sub->add_option("--jobs", opt.jobs, "worker pool bound (0 = hardware)");
  sub->add_option("--ref-machine", opt.ref_machine,
                  "reference machine number (0 = largest amplitude)");
  sub->add_option("--kappa", opt.balance_kappa,
                  "balance bound multiplier on zeta");
  sub->add_option("--tol-identity", opt.tol_identity,
                  "identity residual tolerance");
  sub->add_option("--tol-jacobian", opt.tol_jacobian,
                  "finite difference Jacobian tolerance");
  sub->add_option("--tol-distribution", opt.tol_distribution,
                  "distribution row identity tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "damping and dissipation analysis for multimachine power systems"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* a = app.add_subcommand(
      "analyze", "modes, energetics, distribution factors, balance");
  add_common_flags(a, opt);
  a->add_flag("--dump-matrices", opt.dump_matrices,
              "write linearization matrices as CSV");

  CLI::App* s = app.add_subcommand(
      "sweep", "mode energetics across a dispatch or loading sweep");
  add_common_flags(s, opt);
  s->add_option("--sweep", opt.sweep_args,
                "sweep kind and range: tie|load lo:hi:count")
      ->expected(2)
      ->required();
  s->add_option("--tie", opt.tie_pair, "tie cutset bus pair from:to");

  CLI::App* m = app.add_subcommand(
      "simulate", "nonlinear ringdown with measured mode energetics");
  add_common_flags(m, opt);
  m->add_option("--disturbance", opt.disturbance, "fault or pulse");
  m->add_option("--bus", opt.bus, "faulted bus number");
  m->add_option("--machine", opt.machine,
                "pulsed machine number (0 = all machines)");
  m->add_option("--t-start", opt.t_start, "disturbance start time, s");
  m->add_option("--duration", opt.duration, "disturbance duration, s");
  m->add_option("--magnitude", opt.magnitude, "field pulse height, pu");
  m->add_option("--shunt-b", opt.shunt_b, "fault shunt susceptance, pu");
  m->add_option("--t-end", opt.t_end, "simulation end time, s");
  m->add_option("--dt", opt.dt, "integration step, s");
  m->add_option("--fit-window", opt.fit_window,
                "estimation window lo:hi, s (default: after clearing)");

  CLI::App* v = app.add_subcommand(
      "verify", "structural identity suite for the constant-field model");
  add_common_flags(v, opt);
  v->add_option("--sweep", opt.sweep_args,
                "repeat the suite across a sweep: tie|load lo:hi:count")
      ->expected(2);
  v->add_option("--tie", opt.tie_pair, "tie cutset bus pair from:to");
  v->add_option("--inject-resistance", opt.inject_resistance,
                "add r = value * |x| to every branch (negative control)");

  CLI11_PARSE(app, argc, argv);
  if (v->parsed() && v->count("--model") == 0) opt.model = "simplified";

  try {
    if (a->parsed()) return cmd_analyze(opt);
    if (s->parsed()) return cmd_sweep(opt);
    if (m->parsed()) return cmd_simulate(opt);
    if (v->parsed()) return cmd_verify(opt);
  } catch (const ConfigError& ex) {
    std::fprintf(stderr, "%s\n", ex.what());
    return 2;
  }
  return 2;
}
