// SPDX-License-Identifier: Apache-2.0

#include "dampdist/dae.hpp"

namespace dampdist {

void network_injections(const Eigen::MatrixXd& g, const Eigen::MatrixXd& b,
                        const Eigen::VectorXd& theta, const Eigen::VectorXd& vm,
                        Eigen::VectorXd& p, Eigen::VectorXd& q,
                        Eigen::MatrixXd* dp_dth, Eigen::MatrixXd* dp_dv,
                        Eigen::MatrixXd* dq_dth, Eigen::MatrixXd* dq_dv) {
  const int n = static_cast<int>(theta.size());
  p.setZero(n);
  q.setZero(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double gik = g(i, k), bik = b(i, k);
      if (gik == 0.0 && bik == 0.0) continue;
      const double th = theta(i) - theta(k);
      p(i) += vm(i) * vm(k) * (gik * std::cos(th) + bik * std::sin(th));
      q(i) += vm(i) * vm(k) * (gik * std::sin(th) - bik * std::cos(th));
    }
  }
  if (!dp_dth) return;
  dp_dth->setZero(n, n);
  dp_dv->setZero(n, n);
  dq_dth->setZero(n, n);
  dq_dv->setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const double gik = g(i, k), bik = b(i, k);
      if (gik == 0.0 && bik == 0.0) continue;
      const double th = theta(i) - theta(k);
      const double ct = std::cos(th), st = std::sin(th);
      (*dp_dth)(i, k) = vm(i) * vm(k) * (gik * st - bik * ct);
      (*dq_dth)(i, k) = -vm(i) * vm(k) * (gik * ct + bik * st);
      (*dp_dv)(i, k) = vm(i) * (gik * ct + bik * st);
      (*dq_dv)(i, k) = vm(i) * (gik * st - bik * ct);
    }
    (*dp_dth)(i, i) = -q(i) - vm(i) * vm(i) * b(i, i);
    (*dq_dth)(i, i) = p(i) - vm(i) * vm(i) * g(i, i);
    (*dp_dv)(i, i) = p(i) / vm(i) + vm(i) * g(i, i);
    (*dq_dv)(i, i) = q(i) / vm(i) - vm(i) * b(i, i);
  }
}

StateIndex build_state_index(const SystemSpec& sys) {
  StateIndex ix;
  ix.ng = sys.n_gen();
  ix.n = sys.n_bus();
  const int ng = ix.ng;
  ix.delta.assign(ng, -1);
  ix.omega.assign(ng, -1);
  ix.eq.assign(ng, -1);
  ix.ed.assign(ng, -1);
  ix.efd.assign(ng, -1);
  ix.vtr.assign(ng, -1);
  ix.xw.assign(ng, -1);
  ix.xll.assign(ng, -1);

  auto tag = [&](const char* base, int i) {
    return std::string(base) + "[" + std::to_string(i + 1) + "]";
  };
  int k = 0;
  for (int i = 0; i < ng; ++i) { ix.delta[i] = k++; ix.names.push_back(tag("delta", i)); }
  for (int i = 0; i < ng; ++i) { ix.omega[i] = k++; ix.names.push_back(tag("omega", i)); }
  for (int i = 0; i < ng; ++i) { ix.eq[i] = k++; ix.names.push_back(tag("eq", i)); }
  for (int i = 0; i < ng; ++i) {
    if (sys.machines[i].order == MachineOrder::Fourth) {
      ix.ed[i] = k++;
      ix.names.push_back(tag("ed", i));
    }
  }
  for (int i = 0; i < ng; ++i) {
    const auto& e = sys.exciter_at(i + 1);
    if (e.kind == ExciterKind::StaticFirstOrder) {
      ix.efd[i] = k++;
      ix.names.push_back(tag("efd", i));
    } else if (e.kind == ExciterKind::St1aPss) {
      ix.vtr[i] = k++;
      ix.names.push_back(tag("vtr", i));
    }
  }
  for (int i = 0; i < ng; ++i) {
    if (sys.exciter_at(i + 1).kind == ExciterKind::St1aPss) {
      ix.xw[i] = k++;
      ix.names.push_back(tag("xw", i));
    }
  }
  for (int i = 0; i < ng; ++i) {
    if (sys.exciter_at(i + 1).kind == ExciterKind::St1aPss) {
      ix.xll[i] = k++;
      ix.names.push_back(tag("xll", i));
    }
  }
  ix.ns = k;
  return ix;
}

DaeModel::DaeModel(SystemSpec sys, const Eigen::MatrixXcd& ybus)
    : sys_(std::move(sys)), idx_(build_state_index(sys_)) {
  set_ybus(ybus);
}

void DaeModel::set_ybus(const Eigen::MatrixXcd& ybus) {
  ybus_ = ybus;
  gmat_ = ybus.real();
  bmat_ = ybus.imag();
}

DaeInputs DaeModel::zero_inputs() const {
  DaeInputs u;
  const int ng = idx_.ng;
  u.tm = Eigen::VectorXd::Zero(ng);
  u.efd_const = Eigen::VectorXd::Zero(ng);
  u.vref = Eigen::VectorXd::Zero(ng);
  u.efd_extra = Eigen::VectorXd::Zero(ng);
  return u;
}

DaeEval DaeModel::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                       const DaeInputs& u, bool want_jac) const {
  const int ng = idx_.ng;
  const int n = idx_.n;
  const int ns = idx_.ns;
  const double ws = sys_.omega_s();

  DaeEval out;
  out.f = Eigen::VectorXd::Zero(ns);
  out.g = Eigen::VectorXd::Zero(2 * n);
  out.te = Eigen::VectorXd::Zero(ng);
  out.pe = Eigen::VectorXd::Zero(ng);
  out.qe = Eigen::VectorXd::Zero(ng);
  out.efd = Eigen::VectorXd::Zero(ng);
  if (want_jac) {
    out.dfdx = Eigen::MatrixXd::Zero(ns, ns);
    out.dfdy = Eigen::MatrixXd::Zero(ns, 2 * n);
    out.dgdx = Eigen::MatrixXd::Zero(2 * n, ns);
    out.dgdy = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  }

  const auto theta = y.head(n);
  const auto vm = y.tail(n);

  // Network injections and their derivatives.
  Eigen::VectorXd pnet, qnet;
  Eigen::MatrixXd dp_dth, dp_dv, dq_dth, dq_dv;
  if (want_jac) {
    network_injections(gmat_, bmat_, theta, vm, pnet, qnet, &dp_dth, &dp_dv,
                       &dq_dth, &dq_dv);
    out.dgdy.topLeftCorner(n, n) = -dp_dth;
    out.dgdy.topRightCorner(n, n) = -dp_dv;
    out.dgdy.bottomLeftCorner(n, n) = -dq_dth;
    out.dgdy.bottomRightCorner(n, n) = -dq_dv;
  } else {
    network_injections(gmat_, bmat_, theta, vm, pnet, qnet);
  }

  for (int i = 0; i < n; ++i) {
    out.g(i) = -sys_.buses[i].p_load - pnet(i);
    out.g(n + i) = -sys_.buses[i].q_load - qnet(i);
  }

  // Machines. Machine i sits at bus i by the ordering invariant.
  for (int i = 0; i < ng; ++i) {
    const auto& m = sys_.machines[i];
    const auto& ex = sys_.exciter_at(i + 1);
    const int b = i;
    const bool fourth = m.order == MachineOrder::Fourth;
    const double xqe = fourth ? m.xq_p : m.xq;

    const double di = x(idx_.delta[i]);
    const double wi = x(idx_.omega[i]);
    const double eq = x(idx_.eq[i]);
    const double ed = fourth ? x(idx_.ed[i]) : 0.0;
    const double vb = vm(b);
    const double s = std::sin(di - theta(b));
    const double c = std::cos(di - theta(b));
    const double vd = vb * s;
    const double vq = vb * c;
    const double id = (eq - vq) / m.xd_p;
    const double iq = (vd - ed) / xqe;
    const double te = ed * id + eq * iq + (xqe - m.xd_p) * id * iq;
    const double pe = te;
    const double qe = vq * id - vd * iq;

    out.te(i) = te;
    out.pe(i) = pe;
    out.qe(i) = qe;
    out.g(b) += pe;
    out.g(n + b) += qe;

    // Field voltage seen by the d-axis winding.
    double efd = 0.0;
    double defd_dvtr = 0.0, defd_dxw = 0.0, defd_dxll = 0.0, defd_dw = 0.0;
    bool efd_is_state = false;
    switch (ex.kind) {
      case ExciterKind::Manual:
        efd = u.efd_const(i) + u.efd_extra(i);
        break;
      case ExciterKind::StaticFirstOrder:
        efd = x(idx_.efd[i]);
        efd_is_state = true;
        break;
      case ExciterKind::St1aPss: {
        const double vtr = x(idx_.vtr[i]);
        const double xw = x(idx_.xw[i]);
        const double xll = x(idx_.xll[i]);
        const double yw = ex.k_pss * (wi - ws) / ws - xw;
        const double vpss = xll + (ex.t1 / ex.t2) * (yw - xll);
        efd = ex.ka * (u.vref(i) + u.efd_extra(i) / ex.ka + vpss - vtr);
        defd_dvtr = -ex.ka;
        defd_dw = ex.ka * (ex.t1 / ex.t2) * ex.k_pss / ws;
        defd_dxw = -ex.ka * (ex.t1 / ex.t2);
        defd_dxll = ex.ka * (1.0 - ex.t1 / ex.t2);
        break;
      }
    }
    out.efd(i) = efd;

    const int rd = idx_.delta[i];
    const int rw = idx_.omega[i];
    const int rq = idx_.eq[i];
    out.f(rd) = wi - ws;
    out.f(rw) = ws / (2.0 * m.h) * (u.tm(i) - te);
    out.f(rq) = (efd - eq - (m.xd - m.xd_p) * id) / m.tdo_p;
    if (fourth)
      out.f(idx_.ed[i]) = (-ed + (m.xq - m.xq_p) * iq) / m.tqo_p;

    if (ex.kind == ExciterKind::StaticFirstOrder) {
      out.f(idx_.efd[i]) =
          (ex.ka * (u.vref(i) + u.efd_extra(i) / ex.ka - vb) - x(idx_.efd[i])) /
          ex.tr;
    } else if (ex.kind == ExciterKind::St1aPss) {
      const double yw = ex.k_pss * (wi - ws) / ws - x(idx_.xw[i]);
      out.f(idx_.vtr[i]) = (vb - x(idx_.vtr[i])) / ex.tr;
      out.f(idx_.xw[i]) = yw / ex.t_w;
      out.f(idx_.xll[i]) = (yw - x(idx_.xll[i])) / ex.t2;
    }

    if (!want_jac) continue;

    // Stator current and torque sensitivities. Only (delta - theta_b), vmag_b,
    // eq and ed enter, so theta derivatives are the negated delta ones.
    const double did_deq = 1.0 / m.xd_p;
    const double did_dd = vd / m.xd_p;       // via vq
    const double did_dv = -c / m.xd_p;
    const double diq_ded = -1.0 / xqe;
    const double diq_dd = vq / xqe;          // via vd
    const double diq_dv = s / xqe;
    const double tid = ed + (xqe - m.xd_p) * iq;  // dTe/d(id)
    const double tiq = eq + (xqe - m.xd_p) * id;  // dTe/d(iq)

    const double dte_dd = tid * did_dd + tiq * diq_dd;
    const double dte_dv = tid * did_dv + tiq * diq_dv;
    const double dte_deq = iq + tid * did_deq;
    const double dte_ded = id + tiq * diq_ded;

    const double dqe_dd = -vd * id + vq * did_dd - vq * iq - vd * diq_dd;
    const double dqe_dv = c * id + vq * did_dv - s * iq - vd * diq_dv;
    const double dqe_deq = vq * did_deq;
    const double dqe_ded = -vd * diq_ded;

    const int cth = b;
    const int cv = n + b;

    // Rotor angle equation.
    out.dfdx(rd, rw) = 1.0;

    // Rotor speed equation.
    const double kw = -ws / (2.0 * m.h);
    out.dfdx(rw, rd) = kw * dte_dd;
    out.dfdx(rw, rq) = kw * dte_deq;
    if (fourth) out.dfdx(rw, idx_.ed[i]) = kw * dte_ded;
    out.dfdy(rw, cth) = -kw * dte_dd;
    out.dfdy(rw, cv) = kw * dte_dv;

    // Field winding equation.
    const double kf = -(m.xd - m.xd_p) / m.tdo_p;
    out.dfdx(rq, rd) = kf * did_dd;
    out.dfdx(rq, rq) = -1.0 / m.tdo_p + kf * did_deq;
    out.dfdy(rq, cth) = -kf * did_dd;
    out.dfdy(rq, cv) = kf * did_dv;
    if (efd_is_state) {
      out.dfdx(rq, idx_.efd[i]) = 1.0 / m.tdo_p;
    } else if (ex.kind == ExciterKind::St1aPss) {
      out.dfdx(rq, idx_.vtr[i]) = defd_dvtr / m.tdo_p;
      out.dfdx(rq, idx_.xw[i]) = defd_dxw / m.tdo_p;
      out.dfdx(rq, idx_.xll[i]) = defd_dxll / m.tdo_p;
      out.dfdx(rq, rw) = defd_dw / m.tdo_p;
    }

    // Damper winding equation.
    if (fourth) {
      const int re = idx_.ed[i];
      const double kg = (m.xq - m.xq_p) / m.tqo_p;
      out.dfdx(re, rd) = kg * diq_dd;
      out.dfdx(re, re) = -1.0 / m.tqo_p + kg * diq_ded;
      out.dfdy(re, cth) = -kg * diq_dd;
      out.dfdy(re, cv) = kg * diq_dv;
    }

    // Exciter and stabilizer equations.
    if (ex.kind == ExciterKind::StaticFirstOrder) {
      const int re = idx_.efd[i];
      out.dfdx(re, re) = -1.0 / ex.tr;
      out.dfdy(re, cv) = -ex.ka / ex.tr;
    } else if (ex.kind == ExciterKind::St1aPss) {
      out.dfdx(idx_.vtr[i], idx_.vtr[i]) = -1.0 / ex.tr;
      out.dfdy(idx_.vtr[i], cv) = 1.0 / ex.tr;
      out.dfdx(idx_.xw[i], rw) = ex.k_pss / (ws * ex.t_w);
      out.dfdx(idx_.xw[i], idx_.xw[i]) = -1.0 / ex.t_w;
      out.dfdx(idx_.xll[i], rw) = ex.k_pss / (ws * ex.t2);
      out.dfdx(idx_.xll[i], idx_.xw[i]) = -1.0 / ex.t2;
      out.dfdx(idx_.xll[i], idx_.xll[i]) = -1.0 / ex.t2;
    }

    // Machine contributions to the network residuals.
    out.dgdx(b, rd) = dte_dd;
    out.dgdx(b, rq) = dte_deq;
    out.dgdy(b, cth) += -dte_dd;
    out.dgdy(b, cv) += dte_dv;
    out.dgdx(n + b, rd) = dqe_dd;
    out.dgdx(n + b, rq) = dqe_deq;
    out.dgdy(n + b, cth) += -dqe_dd;
    out.dgdy(n + b, cv) += dqe_dv;
    if (fourth) {
      out.dgdx(b, idx_.ed[i]) = dte_ded;
      out.dgdx(n + b, idx_.ed[i]) = dqe_ded;
    }
  }

  return out;
}

}  // namespace dampdist
