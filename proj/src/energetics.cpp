// SPDX-License-Identifier: Apache-2.0

#include "dampdist/energetics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dampdist {

TorqueTransfer torque_transfer(const LinearModel& lin, double omega) {
  if (!(omega > 0.0))
    throw std::invalid_argument("transfer evaluation needs omega > 0");
  const int ng = lin.ng();
  const int nz = lin.nz();
  const std::complex<double> jw(0.0, omega);

  const Eigen::MatrixXcd a33 = lin.A33.cast<std::complex<double>>();
  Eigen::MatrixXcd shifted = -a33;
  shifted.diagonal().array() += jw;

  // Guard against evaluating on top of a winding-subsystem pole.
  const Eigen::VectorXcd poles =
      Eigen::EigenSolver<Eigen::MatrixXd>(lin.A33).eigenvalues();
  double dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < poles.size(); ++k)
    dist = std::min(dist, std::abs(jw - poles(k)));
  TorqueTransfer tt;
  tt.omega = omega;
  tt.min_pole_distance = dist;
  const double scale = std::max(1.0, lin.A33.norm());
  if (dist < 1e-9 * scale) {
    std::ostringstream os;
    os << "transfer frequency " << omega
       << " rad/s sits on the winding subsystem spectrum (distance " << dist
       << ")";
    throw SingularityError(os.str());
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
  const Eigen::MatrixXcd inner =
      lu.solve(lin.A31.cast<std::complex<double>>() / jw +
               lin.A32.cast<std::complex<double>>());
  Eigen::MatrixXcd k =
      lin.A21.cast<std::complex<double>>() / jw +
      lin.A23.cast<std::complex<double>>() * inner;
  const Eigen::VectorXd lead = 2.0 * lin.hvec / lin.omega_s;
  tt.k = (-lead).asDiagonal() * k;

  if (lin.simplified) {
    // Real part in closed form: (2H/ws) A23 (w^2 I + A33^2)^-1 A31.
    Eigen::MatrixXd sym = lin.A33 * lin.A33;
    sym.diagonal().array() += omega * omega;
    tt.re_k_closed =
        lead.asDiagonal() * (lin.A23 * sym.partialPivLu().solve(lin.A31));
  }
  return tt;
}

DampingPowers damping_powers(const TorqueTransfer& tt, PhasorSet& ph) {
  const int ng = static_cast<int>(ph.omega.size());
  ph.torque = tt.k * ph.omega;

  DampingPowers dp;
  dp.wd.resize(ng);
  dp.kd.setZero(ng);
  dp.ks.setZero(ng);
  for (int i = 0; i < ng; ++i) {
    dp.wd(i) = (ph.torque(i) * std::conj(ph.omega(i))).real();
    const double wabs2 = std::norm(ph.omega(i));
    if (wabs2 > 1e-24) {
      const std::complex<double> coeff = ph.torque(i) / ph.omega(i);
      dp.kd(i) = coeff.real();
      dp.ks(i) = coeff.imag();
    }
  }
  dp.total = dp.wd.sum();
  return dp;
}

double cycle_average_power(const PhasorSet& ph, int machine, double t0) {
  if (machine < 0 || machine >= ph.omega.size())
    throw std::invalid_argument("machine index out of range");
  if (ph.torque.size() != ph.omega.size() ||
      ph.torque.lpNorm<Eigen::Infinity>() == 0.0)
    throw std::invalid_argument(
        "phasor set lacks torque amplitudes; compute damping powers first");
  const double wd = ph.lambda.imag();
  const double period = 2.0 * M_PI / wd;

  // Composite Simpson across one period centered on t0, so the decay
  // envelope biases the window average only at second order. 2^13 panels
  // put the quadrature error far below the modeling tolerances.
  const int npanel = 8192;
  const double h = period / npanel;
  const double start = t0 - 0.5 * period;
  auto value = [&](double t) {
    const std::complex<double> rot = std::exp(
        std::complex<double>(ph.lambda.real() * (t - ph.t0), wd * t));
    const double torque = (ph.torque(machine) * rot).real();
    const double speed = (ph.omega(machine) * rot).real();
    return torque * speed;
  };
  double acc = value(start) + value(start + period);
  for (int k = 1; k < npanel; ++k)
    acc += value(start + k * h) * (k % 2 ? 4.0 : 2.0);
  const double integral = acc * h / 3.0;
  // Report twice the plain average so the result matches the amplitude
  // product convention used by the power formulas.
  return 2.0 * integral / period;
}

DissipationPowers dissipation_powers(const LinearModel& lin,
                                     const PhasorSet& ph) {
  const int ng = lin.ng();
  const double w = ph.lambda.imag();
  const std::complex<double> jw(0.0, w);

  DissipationPowers ds;
  ds.wf.resize(ng);
  ds.wg.setZero(ng);
  for (int i = 0; i < ng; ++i) {
    const auto& m = lin.sys.machines[i];
    ds.wf(i) = lin.pvec(i) * w * w * std::norm(ph.eq(i));
    if (lin.sys.exciter_at(i + 1).kind != ExciterKind::Manual) {
      ds.wf(i) -= (jw * ph.eq(i) * std::conj(ph.efd(i))).real() /
                  (m.xd - m.xd_p);
    }
    if (m.order == MachineOrder::Fourth) {
      ds.wg(i) = m.tqo_p / (m.xq - m.xq_p) * w * w * std::norm(ph.ed(i));
    }
  }
  ds.total = ds.wf.sum() + ds.wg.sum();
  return ds;
}

BalanceReport balance_check(const DampingPowers& dp,
                            const DissipationPowers& ds, const Mode& mode,
                            double kappa) {
  BalanceReport br;
  br.wd_total = dp.total;
  br.dissipation_total = ds.total;
  br.zeta = mode.zeta;
  br.bound = kappa * std::abs(mode.zeta);
  const double scale =
      std::max(std::abs(br.wd_total), std::abs(br.dissipation_total));
  br.rel_residual =
      scale > 0.0 ? std::abs(br.wd_total - br.dissipation_total) / scale : 0.0;
  br.pass = br.rel_residual <= br.bound;
  return br;
}

DistributionFactors distribution_factors(const LinearModel& lin,
                                         const Mode& mode, const PhasorSet& ph,
                                         const DampingPowers& dp,
                                         const DissipationPowers& ds) {
  if (!lin.simplified)
    throw std::invalid_argument(
        "distribution factors are defined for the constant-field model");
  const int ng = lin.ng();
  const std::complex<double> lambda = mode.lambda;
  const double w = lambda.imag();

  DistributionFactors df;
  // Speed amplitudes expressed through the field winding amplitudes:
  // psi_omega = Q psi_eq with Q = lambda (lambda^2 I - A21)^-1 A23.
  Eigen::MatrixXcd shifted = -lin.A21.cast<std::complex<double>>();
  shifted.diagonal().array() += lambda * lambda;
  df.q = lambda *
         shifted.partialPivLu().solve(lin.A23.cast<std::complex<double>>());

  df.beta.resize(ng, ng);
  df.alpha.resize(ng, ng);
  df.f.resize(ng, ng);
  df.row_residual.resize(ng);

  const double wmax = ph.omega.cwiseAbs().maxCoeff();
  for (int i = 0; i < ng; ++i) {
    if (std::abs(ph.omega(i)) < 1e-9 * wmax) {
      df.flags.push_back("machine " + std::to_string(i + 1) +
                         ": negligible speed amplitude, shares ill-defined");
    }
    for (int j = 0; j < ng; ++j) {
      df.beta(i, j) = std::conj(df.q(i, j)) * std::conj(ph.eq(j)) /
                      std::conj(ph.omega(i));
      // alpha via the numerically safe expansion of
      // kd_i |q_ij|^2 Re(1/beta_ij) / (p_j w^2).
      const double num =
          dp.kd(i) *
          (std::conj(ph.omega(i)) * df.q(i, j) * ph.eq(j)).real();
      const double den = lin.pvec(j) * w * w * std::norm(ph.eq(j));
      if (den < 1e-300) {
        df.alpha(i, j) = 0.0;
        df.flags.push_back("winding " + std::to_string(j + 1) +
                           ": zero field amplitude, factor dropped");
      } else {
        df.alpha(i, j) = num / den;
      }
    }
  }

  for (int i = 0; i < ng; ++i) {
    double acc = 0.0;
    for (int j = 0; j < ng; ++j) acc += df.alpha(i, j) * ds.wf(j);
    df.row_residual(i) =
        dp.wd(i) != 0.0 ? std::abs(acc - dp.wd(i)) / std::abs(dp.wd(i))
                        : std::abs(acc);
    for (int j = 0; j < ng; ++j)
      df.f(i, j) = dp.wd(i) != 0.0 ? df.alpha(i, j) * ds.wf(j) / dp.wd(i) : 0.0;
  }
  return df;
}

ClaimsReport verify_claims(const LinearModel& lin,
                           const std::vector<double>& omegas,
                           std::uint64_t seed, double tol) {
  if (!lin.simplified)
    throw std::invalid_argument(
        "structural identities hold for the constant-field model; reduce the "
        "description first");
  const int ng = lin.ng();
  const Eigen::VectorXd pd = lin.pvec;
  const Eigen::VectorXd lead = 2.0 * lin.hvec / lin.omega_s;

  // Residuals use the max norm so a single broken entry is not averaged
  // away over the matrix.
  ClaimsReport cr;
  {
    const Eigen::MatrixXd lhs =
        pd.cwiseInverse().asDiagonal() * lin.A33.transpose() * pd.asDiagonal();
    cr.winding_similarity =
        (lhs - lin.A33).cwiseAbs().maxCoeff() / lin.A33.cwiseAbs().maxCoeff();
  }
  {
    const Eigen::MatrixXd lhs = lin.A31.transpose() * pd.asDiagonal();
    const Eigen::MatrixXd rhs = lead.asDiagonal() * lin.A23;
    cr.coupling_reciprocity =
        (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();
  }
  {
    const Eigen::MatrixXd hw = lin.hvec.asDiagonal() * lin.A21;
    cr.acceleration_symmetry =
        (lin.A21.transpose() * lin.hvec.asDiagonal() - hw).cwiseAbs().maxCoeff() /
        hw.cwiseAbs().maxCoeff();
  }

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  double worst = 0.0;
  for (double w : omegas) {
    const TorqueTransfer tt = torque_transfer(lin, w);
    const Eigen::MatrixXd re_k = tt.k.real();
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXcd x(ng);
      for (int i = 0; i < ng; ++i)
        x(i) = std::complex<double>(dist(gen), dist(gen));
      const std::complex<double> full = x.dot(tt.k * x);  // x^H K x
      const double viaRe = (x.dot(re_k.cast<std::complex<double>>() * x)).real();
      const double denom = std::max(std::abs(viaRe), 1e-12 * x.squaredNorm() * re_k.norm());
      worst = std::max(worst, std::abs(full.real() - viaRe) / denom);
    }
  }
  cr.quadratic_form = worst;

  cr.max_residual = std::max({cr.winding_similarity, cr.coupling_reciprocity,
                              cr.acceleration_symmetry, cr.quadratic_form});
  cr.pass = cr.max_residual <= tol;
  return cr;
}

}  // namespace dampdist
