// SPDX-License-Identifier: Apache-2.0

#include "dampdist/steady.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dampdist {

int slack_machine(const SystemSpec& sys) {
  if (sys.dispatch.slack_bus > 0) return sys.dispatch.slack_bus - 1;
  int best = 0;
  for (int i = 1; i < sys.n_gen(); ++i)
    if (sys.machines[i].h > sys.machines[best].h) best = i;
  return best;
}

OperatingPoint solve_powerflow(const SystemSpec& sys,
                               const Eigen::MatrixXcd& ybus,
                               const PowerflowOptions& opt,
                               const OperatingPoint* warm) {
  const int n = sys.n_bus();
  const int ng = sys.n_gen();
  const int slack = slack_machine(sys);
  const Eigen::MatrixXd g = ybus.real();
  const Eigen::MatrixXd b = ybus.imag();

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd vm = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < ng; ++i) vm(i) = sys.dispatch.vsched[i];
  if (warm && warm->theta.size() == n) {
    theta = warm->theta;
    vm.tail(n - ng) = warm->vmag.tail(n - ng);
  }

  // Unknowns: theta at every bus but the slack, vmag at load buses.
  const int nth = n - 1;
  const int nv = n - ng;
  auto th_col = [&](int bus) { return bus < slack ? bus : bus - 1; };

  Eigen::VectorXd pspec(n), qspec(n);
  for (int i = 0; i < n; ++i) {
    pspec(i) = -sys.buses[i].p_load;
    qspec(i) = -sys.buses[i].q_load;
  }
  for (int i = 0; i < ng; ++i) pspec(i) += sys.dispatch.pg[i];

  std::vector<double> history;
  Eigen::VectorXd pnet, qnet;
  Eigen::MatrixXd dp_dth, dp_dv, dq_dth, dq_dv;

  auto mismatch = [&](const Eigen::VectorXd& th, const Eigen::VectorXd& v,
                      bool want_jac) {
    network_injections(g, b, th, v, pnet, qnet, want_jac ? &dp_dth : nullptr,
                       want_jac ? &dp_dv : nullptr, want_jac ? &dq_dth : nullptr,
                       want_jac ? &dq_dv : nullptr);
    Eigen::VectorXd mm(nth + nv);
    int r = 0;
    for (int i = 0; i < n; ++i)
      if (i != slack) mm(r++) = pspec(i) - pnet(i);
    for (int i = ng; i < n; ++i) mm(r++) = qspec(i) - qnet(i);
    return mm;
  };

  Eigen::VectorXd mm = mismatch(theta, vm, false);
  double norm = mm.lpNorm<Eigen::Infinity>();
  history.push_back(norm);

  int iter = 0;
  while (norm > opt.tol) {
    if (iter >= opt.max_iter) {
      std::ostringstream os;
      os << "power flow failed to converge in " << opt.max_iter
         << " iterations (mismatch " << norm << ")";
      throw ConvergenceError(os.str(), history);
    }
    mm = mismatch(theta, vm, true);

    Eigen::MatrixXd jac(nth + nv, nth + nv);
    int r = 0;
    for (int i = 0; i < n; ++i) {
      if (i == slack) continue;
      for (int k = 0; k < n; ++k)
        if (k != slack) jac(r, th_col(k)) = dp_dth(i, k);
      for (int k = ng; k < n; ++k) jac(r, nth + k - ng) = dp_dv(i, k);
      ++r;
    }
    for (int i = ng; i < n; ++i) {
      for (int k = 0; k < n; ++k)
        if (k != slack) jac(r, th_col(k)) = dq_dth(i, k);
      for (int k = ng; k < n; ++k) jac(r, nth + k - ng) = dq_dv(i, k);
      ++r;
    }

    Eigen::VectorXd step = jac.partialPivLu().solve(mm);

    double scale = 1.0;
    double new_norm = norm;
    Eigen::VectorXd th_new, vm_new;
    for (int h = 0;; ++h) {
      th_new = theta;
      vm_new = vm;
      int c = 0;
      for (int k = 0; k < n; ++k)
        if (k != slack) th_new(k) += scale * step(c++);
      for (int k = ng; k < n; ++k) vm_new(k) += scale * step(c++);
      const bool feasible = vm_new.minCoeff() > 0.0;
      if (feasible)
        new_norm = mismatch(th_new, vm_new, false).lpNorm<Eigen::Infinity>();
      if (feasible && new_norm < norm) break;
      if (h >= opt.max_halvings) {
        if (!feasible)
          throw ConvergenceError(
              "power flow step drove a voltage magnitude nonpositive", history);
        break;  // accept a non-decreasing step; the iteration cap rules
      }
      scale *= 0.5;
    }
    theta = th_new;
    vm = vm_new;
    norm = new_norm;
    history.push_back(norm);
    ++iter;
  }

  // Reference the solution to the slack bus angle.
  theta.array() -= theta(slack);

  network_injections(g, b, theta, vm, pnet, qnet);
  OperatingPoint op;
  op.theta = theta;
  op.vmag = vm;
  op.pg = Eigen::VectorXd::Zero(ng);
  op.qg = Eigen::VectorXd::Zero(ng);
  for (int i = 0; i < ng; ++i) {
    op.pg(i) = pnet(i) + sys.buses[i].p_load;
    op.qg(i) = qnet(i) + sys.buses[i].q_load;
  }
  op.iterations = iter;
  op.max_mismatch = norm;
  return op;
}

void init_machines(const SystemSpec& sys, const Eigen::MatrixXcd& ybus,
                   OperatingPoint& op) {
  const int ng = sys.n_gen();
  op.delta0.resize(ng);
  op.eq0.resize(ng);
  op.ed0.setZero(ng);
  op.efd0.resize(ng);
  op.tm0.resize(ng);
  op.vref0.setZero(ng);

  for (int i = 0; i < ng; ++i) {
    const auto& m = sys.machines[i];
    const std::complex<double> vt =
        std::polar(op.vmag(i), op.theta(i));
    const std::complex<double> s(op.pg(i), op.qg(i));
    const std::complex<double> it = std::conj(s / vt);

    // The rotor angle aligns the q axis with the voltage behind xq.
    const std::complex<double> eqd = vt + std::complex<double>(0.0, m.xq) * it;
    const double delta = std::arg(eqd);

    const double vd = op.vmag(i) * std::sin(delta - op.theta(i));
    const double vq = op.vmag(i) * std::cos(delta - op.theta(i));
    const double imag_i = std::abs(it), phi = std::arg(it);
    const double id = imag_i * std::sin(delta - phi);
    const double iq = imag_i * std::cos(delta - phi);

    const bool fourth = m.order == MachineOrder::Fourth;
    const double xqe = fourth ? m.xq_p : m.xq;
    op.delta0(i) = delta;
    op.eq0(i) = vq + m.xd_p * id;
    op.ed0(i) = fourth ? vd - m.xq_p * iq : 0.0;
    op.efd0(i) = op.eq0(i) + (m.xd - m.xd_p) * id;
    op.tm0(i) = op.ed0(i) * id + op.eq0(i) * iq + (xqe - m.xd_p) * id * iq;

    const auto& ex = sys.exciter_at(i + 1);
    if (ex.kind != ExciterKind::Manual)
      op.vref0(i) = op.vmag(i) + op.efd0(i) / ex.ka;
  }

  // The assembled equilibrium must sit on the model manifold.
  DaeModel model(sys, ybus);
  Eigen::VectorXd x0, y0;
  DaeInputs u0;
  pack_equilibrium(model, op, x0, y0, u0);
  DaeEval ev = model.eval(x0, y0, u0, false);
  const double fres = ev.f.lpNorm<Eigen::Infinity>();
  const double gres = ev.g.lpNorm<Eigen::Infinity>();
  const double gtol = std::max(1e-10, 100.0 * op.max_mismatch);
  if (fres > 1e-10 || gres > gtol) {
    std::ostringstream os;
    os << "machine initialization left a residual (state " << fres
       << ", network " << gres << ")";
    throw std::runtime_error(os.str());
  }
}

void pack_equilibrium(const DaeModel& model, const OperatingPoint& op,
                      Eigen::VectorXd& x0, Eigen::VectorXd& y0, DaeInputs& u0) {
  const auto& sys = model.sys();
  const auto& ix = model.idx();
  const int ng = ix.ng;
  const int n = ix.n;
  const double ws = sys.omega_s();

  x0.setZero(ix.ns);
  y0.resize(2 * n);
  y0.head(n) = op.theta;
  y0.tail(n) = op.vmag;
  u0 = model.zero_inputs();
  u0.tm = op.tm0;

  for (int i = 0; i < ng; ++i) {
    x0(ix.delta[i]) = op.delta0(i);
    x0(ix.omega[i]) = ws;
    x0(ix.eq[i]) = op.eq0(i);
    if (ix.ed[i] >= 0) x0(ix.ed[i]) = op.ed0(i);
    const auto& ex = sys.exciter_at(i + 1);
    switch (ex.kind) {
      case ExciterKind::Manual:
        u0.efd_const(i) = op.efd0(i);
        break;
      case ExciterKind::StaticFirstOrder:
        x0(ix.efd[i]) = op.efd0(i);
        u0.vref(i) = op.vref0(i);
        break;
      case ExciterKind::St1aPss:
        x0(ix.vtr[i]) = op.vmag(i);
        x0(ix.xw[i]) = 0.0;
        x0(ix.xll[i]) = 0.0;
        u0.vref(i) = op.vref0(i);
        break;
    }
  }
}

double tie_flow(const SystemSpec& sys, const OperatingPoint& op, int from_bus,
                int to_bus) {
  double total = 0.0;
  bool found = false;
  for (const auto& br : sys.branches) {
    int a = -1, b = -1;
    if (br.from == from_bus && br.to == to_bus) { a = br.from; b = br.to; }
    if (br.from == to_bus && br.to == from_bus) { a = br.to; b = br.from; }
    if (a < 0) continue;
    found = true;
    const double va = op.vmag(a - 1), vb = op.vmag(b - 1);
    const double th = op.theta(a - 1) - op.theta(b - 1);
    total += va * vb * std::sin(th) / br.x;
  }
  if (!found)
    throw DataError("tie " + std::to_string(from_bus) + "-" +
                    std::to_string(to_bus) + ": no branch joins these buses");
  return total;
}

namespace {

// Buses on the `from` side of the cutset once the tie branches are removed.
std::vector<bool> sending_side(const SystemSpec& sys, int from_bus, int to_bus) {
  const int n = sys.n_bus();
  std::vector<bool> in(n, false);
  std::vector<int> stack = {from_bus - 1};
  in[from_bus - 1] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (const auto& br : sys.branches) {
      const bool is_tie = (br.from == from_bus && br.to == to_bus) ||
                          (br.from == to_bus && br.to == from_bus);
      if (is_tie) continue;
      int a = br.from - 1, b = br.to - 1;
      if (a == u && !in[b]) { in[b] = true; stack.push_back(b); }
      if (b == u && !in[a]) { in[a] = true; stack.push_back(a); }
    }
  }
  if (in[to_bus - 1])
    throw DataError("tie " + std::to_string(from_bus) + "-" +
                    std::to_string(to_bus) +
                    ": removing the tie does not split the network");
  return in;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const SystemSpec& sys, const SweepPlan& plan,
                                  const PowerflowOptions& opt) {
  std::vector<SweepPoint> points;
  points.reserve(plan.values.size());
  const OperatingPoint* warm = nullptr;

  for (double value : plan.values) {
    SweepPoint pt;
    pt.target = value;
    pt.sys = sys;

    if (plan.kind == SweepKind::TieFlow) {
      const auto side = sending_side(sys, plan.tie_from, plan.tie_to);
      double load_send = 0.0, load_recv = 0.0;
      for (const auto& b : sys.buses)
        (side[b.id - 1] ? load_send : load_recv) += b.p_load;
      double gen_send = 0.0, gen_recv = 0.0;
      for (int i = 0; i < sys.n_gen(); ++i)
        (side[sys.machines[i].bus - 1] ? gen_send : gen_recv) +=
            sys.dispatch.pg[i];
      if (gen_send <= 0.0 || gen_recv <= 0.0)
        throw DataError("tie sweep requires generation on both sides of the cutset");
      const double want_send = load_send + value;
      const double want_recv = load_recv - value;
      for (int i = 0; i < sys.n_gen(); ++i) {
        const bool send = side[sys.machines[i].bus - 1];
        const double f = send ? want_send / gen_send : want_recv / gen_recv;
        pt.sys.dispatch.pg[i] = sys.dispatch.pg[i] * f;
      }
    } else {
      for (auto& b : pt.sys.buses) {
        b.p_load *= value;
        b.q_load *= value;
      }
      for (auto& pg : pt.sys.dispatch.pg) pg *= value;
    }

    try {
      const Eigen::MatrixXcd ybus = build_ybus(pt.sys);
      pt.op = solve_powerflow(pt.sys, ybus, opt, warm);
      init_machines(pt.sys, ybus, pt.op);
      pt.realized = plan.kind == SweepKind::TieFlow
                        ? tie_flow(pt.sys, pt.op, plan.tie_from, plan.tie_to)
                        : value;
    } catch (const std::exception& ex) {
      pt.solved = false;
      pt.error = ex.what();
    }
    points.push_back(std::move(pt));
    if (points.back().solved) warm = &points.back().op;
  }
  return points;
}

}  // namespace dampdist
