// SPDX-License-Identifier: Apache-2.0

#include "dampdist/ringdown.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dampdist {

namespace {

// Solves g(x, y) = 0 for y with x frozen. Used for consistent restarts after
// switching events; a shunt that collapses the voltage is approached through
// intermediate admittances when the direct solve stalls.
void solve_algebraic(DaeModel& model, const Eigen::VectorXd& x,
                     Eigen::VectorXd& y, const DaeInputs& u, double tol,
                     int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    DaeEval ev = model.eval(x, y, u, true);
    const double norm = ev.g.lpNorm<Eigen::Infinity>();
    if (norm <= tol) return;
    Eigen::VectorXd step = ev.dgdy.partialPivLu().solve(ev.g);
    double scale = 1.0;
    for (int h = 0; h < 8; ++h) {
      Eigen::VectorXd y_new = y - scale * step;
      const int n = model.idx().n;
      if (y_new.tail(n).minCoeff() > 1e-6) {
        const double nn =
            model.eval(x, y_new, u, false).g.lpNorm<Eigen::Infinity>();
        if (nn < norm || h == 7) {
          y = y_new;
          break;
        }
      }
      scale *= 0.5;
    }
  }
  DaeEval ev = model.eval(x, y, u, false);
  if (ev.g.lpNorm<Eigen::Infinity>() > 1e-6)
    throw ConvergenceError("algebraic restart failed after a switching event",
                           {ev.g.lpNorm<Eigen::Infinity>()});
}

void algebraic_restart(DaeModel& model, const Eigen::MatrixXcd& y_target,
                       const Eigen::VectorXd& x, Eigen::VectorXd& y,
                       const DaeInputs& u, double tol, int max_iter) {
  const Eigen::MatrixXcd y_from = model.ybus();
  try {
    model.set_ybus(y_target);
    solve_algebraic(model, x, y, u, tol, max_iter);
    return;
  } catch (const ConvergenceError&) {
    // Walk the admittance over in stages.
  }
  const int stages = 8;
  for (int s = 1; s <= stages; ++s) {
    const double a = static_cast<double>(s) / stages;
    model.set_ybus(y_from + a * (y_target - y_from));
    solve_algebraic(model, x, y, u, tol, max_iter);
  }
}

struct StepResult {
  bool ok = false;
  int iterations = 0;
};

StepResult trapezoid_step(DaeModel& model, const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& y0, const DaeEval& ev0,
                          double h, const DaeInputs& u, Eigen::VectorXd& x1,
                          Eigen::VectorXd& y1, DaeEval& ev1,
                          const SimOptions& opt) {
  const int ns = static_cast<int>(x0.size());
  const int na = static_cast<int>(y0.size());
  x1 = x0 + h * ev0.f;  // explicit predictor
  y1 = y0;

  for (int it = 0; it < opt.max_newton; ++it) {
    ev1 = model.eval(x1, y1, u, true);
    Eigen::VectorXd res(ns + na);
    res.head(ns) = x1 - x0 - 0.5 * h * (ev0.f + ev1.f);
    res.tail(na) = ev1.g;
    if (res.lpNorm<Eigen::Infinity>() <= opt.newton_tol)
      return {true, it};

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(ns + na, ns + na);
    jac.topLeftCorner(ns, ns) =
        Eigen::MatrixXd::Identity(ns, ns) - 0.5 * h * ev1.dfdx;
    jac.topRightCorner(ns, na) = -0.5 * h * ev1.dfdy;
    jac.bottomLeftCorner(na, ns) = ev1.dgdx;
    jac.bottomRightCorner(na, na) = ev1.dgdy;

    const Eigen::VectorXd step = jac.partialPivLu().solve(res);
    x1 -= step.head(ns);
    y1 -= step.tail(na);
  }
  ev1 = model.eval(x1, y1, u, true);
  Eigen::VectorXd res(ns + na);
  res.head(ns) = x1 - x0 - 0.5 * h * (ev0.f + ev1.f);
  res.tail(na) = ev1.g;
  return {res.lpNorm<Eigen::Infinity>() <= opt.newton_tol * 100.0,
          opt.max_newton};
}

}  // namespace

Trajectory simulate(const SystemSpec& sys, const Eigen::MatrixXcd& ybus,
                    const OperatingPoint& op, const Disturbance& dist,
                    const SimOptions& opt) {
  DaeModel model(sys, ybus);
  const auto& ix = model.idx();
  const int ns = ix.ns;
  const int n = ix.n;
  const int ng = ix.ng;

  if (dist.kind == Disturbance::Kind::BusFault &&
      (dist.bus < 1 || dist.bus > n))
    throw DataError("fault bus " + std::to_string(dist.bus) +
                    " is not a known bus");
  if (dist.kind == Disturbance::Kind::FieldPulse && dist.machine >= ng)
    throw DataError("pulsed machine " + std::to_string(dist.machine + 1) +
                    " does not exist");
  if (dist.t_start < 0.0 || dist.duration <= 0.0 ||
      dist.t_start + dist.duration >= opt.t_end)
    throw DataError("disturbance window must lie inside the simulation span");

  Eigen::VectorXd x, y;
  DaeInputs u;
  pack_equilibrium(model, op, x, y, u);

  Eigen::MatrixXcd y_faulted = ybus;
  if (dist.kind == Disturbance::Kind::BusFault)
    y_faulted(dist.bus - 1, dist.bus - 1) +=
        std::complex<double>(0.0, dist.shunt_b);

  DaeInputs u_on = u;
  if (dist.kind == Disturbance::Kind::FieldPulse) {
    if (dist.machine < 0)
      u_on.efd_extra.setConstant(dist.magnitude);
    else
      u_on.efd_extra(dist.machine) = dist.magnitude;
  }

  const double t_on = dist.t_start;
  const double t_off = dist.t_start + dist.duration;

  // Assemble the step schedule so switching instants are step boundaries.
  std::vector<double> times;
  times.push_back(0.0);
  double t = 0.0;
  while (t < opt.t_end - 1e-12) {
    double next = t + opt.dt;
    for (double event : {t_on, t_off})
      if (t < event - 1e-12 && next > event - 1e-12) next = event;
    if (next > opt.t_end) next = opt.t_end;
    times.push_back(next);
    t = next;
  }

  const int nt = static_cast<int>(times.size());
  Trajectory traj;
  traj.idx = ix;
  traj.omega_s = sys.omega_s();
  traj.t.resize(nt);
  traj.x.resize(nt, ns);
  traj.theta.resize(nt, n);
  traj.vmag.resize(nt, n);
  traj.omega.resize(nt, ng);
  traj.delta.resize(nt, ng);
  traj.eq.resize(nt, ng);
  traj.ed.setZero(nt, ng);
  traj.efd.resize(nt, ng);
  traj.te.resize(nt, ng);

  bool fault_applied = false;
  const DaeInputs* u_now = &u;
  DaeEval ev = model.eval(x, y, *u_now, true);

  auto record = [&](int k) {
    traj.t(k) = times[k];
    traj.x.row(k) = x.transpose();
    traj.theta.row(k) = y.head(n).transpose();
    traj.vmag.row(k) = y.tail(n).transpose();
    for (int i = 0; i < ng; ++i) {
      traj.delta(k, i) = x(ix.delta[i]);
      traj.omega(k, i) = x(ix.omega[i]);
      traj.eq(k, i) = x(ix.eq[i]);
      if (ix.ed[i] >= 0) traj.ed(k, i) = x(ix.ed[i]);
      traj.efd(k, i) = ev.efd(i);
      traj.te(k, i) = ev.te(i);
    }
  };
  record(0);

  for (int k = 1; k < nt; ++k) {
    const double t0 = times[k - 1];
    const double h = times[k] - t0;

    // Apply switching that takes effect at the start of this step.
    const bool in_window = t0 >= t_on - 1e-12 && t0 < t_off - 1e-12;
    if (dist.kind == Disturbance::Kind::BusFault) {
      if (in_window && !fault_applied) {
        algebraic_restart(model, y_faulted, x, y, *u_now, opt.newton_tol,
                          opt.max_newton);
        fault_applied = true;
        ev = model.eval(x, y, *u_now, true);
      } else if (!in_window && fault_applied && t0 >= t_off - 1e-12) {
        algebraic_restart(model, ybus, x, y, *u_now, opt.newton_tol,
                          opt.max_newton);
        fault_applied = false;
        ev = model.eval(x, y, *u_now, true);
      }
    } else {
      const DaeInputs* u_next = in_window ? &u_on : &u;
      if (u_next != u_now) {
        u_now = u_next;
        ev = model.eval(x, y, *u_now, true);
      }
    }

    Eigen::VectorXd x1, y1;
    DaeEval ev1;
    StepResult sr =
        trapezoid_step(model, x, y, ev, h, *u_now, x1, y1, ev1, opt);
    if (!sr.ok) {
      std::ostringstream os;
      os << "time step at t=" << t0 << " failed to converge";
      throw ConvergenceError(os.str(), {});
    }
    x = x1;
    y = y1;
    ev = ev1;
    record(k);
  }
  return traj;
}

void detrend(Eigen::MatrixXd& signals, const Eigen::VectorXd& t) {
  const int nt = static_cast<int>(t.size());
  Eigen::MatrixXd basis(nt, 2);
  basis.col(0).setOnes();
  basis.col(1) = t;
  const Eigen::MatrixXd coef =
      basis.colPivHouseholderQr().solve(signals);
  signals -= basis * coef;
}

namespace {

// Least-squares linear prediction roots of a uniformly sampled signal.
std::vector<std::complex<double>> prediction_roots(const Eigen::VectorXd& s,
                                                   int order, double dt) {
  const int nt = static_cast<int>(s.size());
  if (nt < 2 * order + 2)
    throw std::invalid_argument("window too short for the prediction order");
  const int rows = nt - order;
  Eigen::MatrixXd xmat(rows, order);
  Eigen::VectorXd b(rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < order; ++c) xmat(r, c) = s(r + order - 1 - c);
    b(r) = s(r + order);
  }
  const Eigen::VectorXd a = xmat.colPivHouseholderQr().solve(b);

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(order, order);
  comp.row(0) = a.transpose();
  comp.block(1, 0, order - 1, order - 1).setIdentity();
  const Eigen::VectorXcd z = comp.eigenvalues();

  std::vector<std::complex<double>> roots;
  for (int i = 0; i < z.size(); ++i) {
    if (z(i).imag() <= 1e-9) continue;        // one per conjugate pair
    if (std::abs(z(i)) > 1.05) continue;      // growing faster than plausible
    if (std::abs(z(i)) < 0.5) continue;       // fit debris
    roots.push_back(std::log(z(i)) / dt);
  }
  return roots;
}

}  // namespace

ModeEstimate estimate_mode(const Trajectory& traj, double t_lo, double t_hi,
                           double f_guess, int ref_machine,
                           const EstimateOptions& opt) {
  const int ng = traj.idx.ng;
  if (ref_machine < 0 || ref_machine >= ng)
    throw std::invalid_argument("reference machine out of range");
  if (!(f_guess > 0.0))
    throw std::invalid_argument("frequency guess must be positive");

  std::vector<int> rows;
  for (int k = 0; k < traj.t.size(); ++k)
    if (traj.t(k) >= t_lo - 1e-12 && traj.t(k) <= t_hi + 1e-12)
      rows.push_back(k);
  const int nt = static_cast<int>(rows.size());
  if (nt < 8)
    throw std::invalid_argument("analysis window contains too few samples");
  const double window = traj.t(rows.back()) - traj.t(rows.front());
  if (window < opt.min_window_periods / f_guess) {
    std::ostringstream os;
    os << "analysis window " << window << " s is shorter than "
       << opt.min_window_periods << " periods at the guessed frequency";
    throw std::invalid_argument(os.str());
  }
  const double dt = traj.t(rows[1]) - traj.t(rows[0]);
  for (int k = 1; k < nt; ++k)
    if (std::abs(traj.t(rows[k]) - traj.t(rows[k - 1]) - dt) > 1e-9)
      throw std::invalid_argument("analysis window is not uniformly sampled");

  Eigen::VectorXd twin(nt);
  for (int k = 0; k < nt; ++k) twin(k) = traj.t(rows[k]) - traj.t(rows[0]);

  auto window_channel = [&](const Eigen::MatrixXd& src) {
    Eigen::MatrixXd out(nt, src.cols());
    for (int k = 0; k < nt; ++k) out.row(k) = src.row(rows[k]);
    return out;
  };

  Eigen::MatrixXd w_sig = window_channel(traj.omega);
  w_sig.array() -= traj.omega_s;
  Eigen::MatrixXd te_sig = window_channel(traj.te);
  Eigen::MatrixXd eq_sig = window_channel(traj.eq);
  Eigen::MatrixXd ed_sig = window_channel(traj.ed);
  Eigen::MatrixXd efd_sig = window_channel(traj.efd);
  detrend(w_sig, twin);
  detrend(te_sig, twin);
  detrend(eq_sig, twin);
  detrend(ed_sig, twin);
  detrend(efd_sig, twin);

  const Eigen::VectorXd ref = w_sig.col(ref_machine);
  const auto roots = prediction_roots(ref, opt.ar_order, dt);
  if (roots.empty())
    throw std::runtime_error("no oscillatory content found in the window");

  int pick = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(roots.size()); ++i) {
    const double f = roots[i].imag() / (2.0 * M_PI);
    const double d = std::abs(f - f_guess);
    if (d < best) {
      best = d;
      pick = i;
    }
  }
  const double f_found = roots[pick].imag() / (2.0 * M_PI);
  if (std::abs(f_found - f_guess) > opt.guess_band * f_guess) {
    std::ostringstream os;
    os << "nearest fitted frequency " << f_found << " Hz is outside "
       << opt.guess_band * 100.0 << "% of the guess " << f_guess << " Hz";
    throw std::runtime_error(os.str());
  }

  ModeEstimate est;
  est.lambda = roots[pick];
  est.freq_hz = f_found;
  est.zeta = -est.lambda.real() / std::abs(est.lambda);
  est.ref_machine = ref_machine;
  est.all_roots = roots;

  // Fixed-exponent amplitude fit. Every kept root contributes a cos/sin
  // column pair so neighbouring modes do not leak into the target one.
  const int nr = static_cast<int>(roots.size());
  Eigen::MatrixXd design(nt, 2 * nr + 2);
  for (int i = 0; i < nr; ++i) {
    const double sg = roots[i].real(), om = roots[i].imag();
    for (int k = 0; k < nt; ++k) {
      const double env = std::exp(sg * twin(k));
      design(k, 2 * i) = env * std::cos(om * twin(k));
      design(k, 2 * i + 1) = env * std::sin(om * twin(k));
    }
  }
  design.col(2 * nr).setOnes();
  design.col(2 * nr + 1) = twin;

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  auto fit_amp = [&](const Eigen::VectorXd& sig) {
    const Eigen::VectorXd c = qr.solve(sig);
    return std::complex<double>(c(2 * pick), -c(2 * pick + 1));
  };

  est.omega.resize(ng);
  est.te.resize(ng);
  est.eq.resize(ng);
  est.ed.resize(ng);
  est.efd.resize(ng);
  for (int i = 0; i < ng; ++i) {
    est.omega(i) = fit_amp(w_sig.col(i));
    est.te(i) = fit_amp(te_sig.col(i));
    est.eq(i) = fit_amp(eq_sig.col(i));
    est.ed(i) = fit_amp(ed_sig.col(i));
    est.efd(i) = fit_amp(efd_sig.col(i));
  }

  const Eigen::VectorXd ref_fit = design * qr.solve(ref);
  est.fit_residual = (ref - ref_fit).norm() / std::max(1e-300, ref.norm());

  const std::complex<double> wref = est.omega(ref_machine);
  if (std::abs(wref) < 1e-300)
    throw std::runtime_error("reference machine amplitude fitted as zero");
  const std::complex<double> scale = 1.0 / wref;
  est.omega *= scale;
  est.te *= scale;
  est.eq *= scale;
  est.ed *= scale;
  est.efd *= scale;
  return est;
}

EnergyReport model_energetics(const LinearModel& lin, const Mode& mode,
                              int ref_machine) {
  PhasorSet ph =
      make_phasors(lin, mode, PhasorNorm::ReferenceMachine, ref_machine);
  const TorqueTransfer tt = torque_transfer(lin, mode.lambda.imag());
  const DampingPowers dp = damping_powers(tt, ph);
  const DissipationPowers ds = dissipation_powers(lin, ph);
  const BalanceReport br = balance_check(dp, ds, mode);

  EnergyReport rep;
  rep.wd = dp.wd;
  rep.kd = dp.kd;
  rep.ks = dp.ks;
  rep.wf = ds.wf;
  rep.wg = ds.wg;
  rep.wd_total = dp.total;
  rep.dissipation_total = ds.total;
  rep.balance_residual = br.rel_residual;
  return rep;
}

EnergyReport measured_energetics(const SystemSpec& sys,
                                 const ModeEstimate& est) {
  const int ng = sys.n_gen();
  const double w = est.lambda.imag();
  const std::complex<double> jw(0.0, w);

  EnergyReport rep;
  rep.wd.resize(ng);
  rep.kd.setZero(ng);
  rep.ks.setZero(ng);
  rep.wf.resize(ng);
  rep.wg.setZero(ng);
  for (int i = 0; i < ng; ++i) {
    const auto& m = sys.machines[i];
    rep.wd(i) = (est.te(i) * std::conj(est.omega(i))).real();
    if (std::norm(est.omega(i)) > 1e-24) {
      const std::complex<double> coeff = est.te(i) / est.omega(i);
      rep.kd(i) = coeff.real();
      rep.ks(i) = coeff.imag();
    }
    rep.wf(i) =
        m.tdo_p / (m.xd - m.xd_p) * w * w * std::norm(est.eq(i));
    if (sys.exciter_at(i + 1).kind != ExciterKind::Manual)
      rep.wf(i) -=
          (jw * est.eq(i) * std::conj(est.efd(i))).real() / (m.xd - m.xd_p);
    if (m.order == MachineOrder::Fourth)
      rep.wg(i) = m.tqo_p / (m.xq - m.xq_p) * w * w * std::norm(est.ed(i));
  }
  rep.wd_total = rep.wd.sum();
  rep.dissipation_total = rep.wf.sum() + rep.wg.sum();
  const double scale =
      std::max(std::abs(rep.wd_total), std::abs(rep.dissipation_total));
  rep.balance_residual =
      scale > 0.0 ? std::abs(rep.wd_total - rep.dissipation_total) / scale
                  : 0.0;
  return rep;
}

}  // namespace dampdist
