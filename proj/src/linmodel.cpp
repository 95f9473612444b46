// SPDX-License-Identifier: Apache-2.0

#include "dampdist/linmodel.hpp"

#include <algorithm>
#include <sstream>

namespace dampdist {

LinearModel build_linear_model(const SystemSpec& sys,
                               const Eigen::MatrixXcd& ybus,
                               const OperatingPoint& op) {
  DaeModel model(sys, ybus);
  Eigen::VectorXd x0, y0;
  DaeInputs u0;
  pack_equilibrium(model, op, x0, y0, u0);
  const DaeEval ev = model.eval(x0, y0, u0, true);

  LinearModel lin;
  lin.idx = model.idx();
  lin.omega_s = sys.omega_s();
  lin.sys = sys;
  lin.op = op;
  lin.simplified = !sys.has_exciters() &&
                   std::all_of(sys.machines.begin(), sys.machines.end(),
                               [](const MachineSpec& m) {
                                 return m.order == MachineOrder::Third;
                               });

  const int n = lin.idx.n;
  const int ng = lin.idx.ng;
  const int ns = lin.idx.ns;

  // Scale voltage columns by the operating magnitudes so that the algebraic
  // unknowns become relative deviations and D inherits network symmetry.
  Eigen::VectorXd colscale(2 * n);
  colscale.head(n).setOnes();
  colscale.tail(n) = op.vmag;

  lin.M = ev.dfdx;
  lin.C = ev.dgdx;
  lin.N = ev.dfdy * colscale.asDiagonal();
  lin.D = ev.dgdy * colscale.asDiagonal();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lin.D);
  lin.d_rcond = lu.rcond();
  if (!(lin.d_rcond > 1e-12)) {
    std::ostringstream os;
    os << "algebraic Jacobian is singular or ill-conditioned (rcond "
       << lin.d_rcond << "); cannot eliminate the network equations";
    throw SingularityError(os.str());
  }
  const Eigen::MatrixXd dinv_c = lu.solve(lin.C);
  lin.reduce_residual = (lin.D * dinv_c - lin.C).norm() /
                        std::max(1.0, lin.C.norm());
  lin.A = lin.M - lin.N * dinv_c;

  const int nz = ns - 2 * ng;
  lin.A21 = lin.A.block(ng, 0, ng, ng);
  lin.A23 = lin.A.block(ng, 2 * ng, ng, nz);
  lin.A31 = lin.A.block(2 * ng, 0, nz, ng);
  lin.A32 = lin.A.block(2 * ng, ng, nz, ng);
  lin.A33 = lin.A.block(2 * ng, 2 * ng, nz, nz);

  lin.hvec.resize(ng);
  lin.pvec.resize(ng);
  for (int i = 0; i < ng; ++i) {
    const auto& m = sys.machines[i];
    lin.hvec(i) = m.h;
    lin.pvec(i) = m.tdo_p / (m.xd - m.xd_p);
  }

  // Input columns. Neither input enters the network equations, so the
  // reduction leaves them untouched.
  lin.b_tm = Eigen::MatrixXd::Zero(ns, ng);
  lin.b_efd = Eigen::MatrixXd::Zero(ns, ng);
  const auto& ix = lin.idx;
  for (int i = 0; i < ng; ++i) {
    const auto& m = sys.machines[i];
    lin.b_tm(ix.omega[i], i) = sys.omega_s() / (2.0 * m.h);
    const auto& ex = sys.exciter_at(i + 1);
    switch (ex.kind) {
      case ExciterKind::Manual:
      case ExciterKind::St1aPss:
        lin.b_efd(ix.eq[i], i) = 1.0 / m.tdo_p;
        break;
      case ExciterKind::StaticFirstOrder:
        lin.b_efd(ix.efd[i], i) = 1.0 / ex.tr;
        break;
    }
  }

  return lin;
}

}  // namespace dampdist
