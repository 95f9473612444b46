// SPDX-License-Identifier: Apache-2.0

#include "dampdist/modal.hpp"

#include <algorithm>
#include <cmath>

namespace dampdist {

namespace {

// One inverse-iteration pass pins the left eigenvector to machine precision
// even when distant parts of the spectrum are clustered.
Eigen::VectorXcd refine_left(const Eigen::MatrixXcd& at,
                             std::complex<double> lambda,
                             Eigen::VectorXcd phi) {
  const int ns = static_cast<int>(phi.size());
  Eigen::MatrixXcd shifted = at;
  shifted.diagonal().array() -= lambda;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXcd next = shifted.partialPivLu().solve(phi);
    const double nn = next.norm();
    if (!(nn > 0.0) || !std::isfinite(nn)) break;
    phi = next / nn;
  }
  (void)ns;
  return phi;
}

}  // namespace

ModalDecomposition eig_modes(const LinearModel& lin) {
  const int ns = lin.idx.ns;
  Eigen::EigenSolver<Eigen::MatrixXd> es(lin.A);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed to converge");

  ModalDecomposition md;
  md.eigenvalues = es.eigenvalues();

  const Eigen::MatrixXcd vmat = es.eigenvectors();
  const Eigen::MatrixXcd wmat = vmat.inverse();
  const Eigen::MatrixXcd ac = lin.A.cast<std::complex<double>>();
  const Eigen::MatrixXcd at = ac.transpose();
  const double anorm = lin.A.norm();

  for (int k = 0; k < ns; ++k) {
    const std::complex<double> lambda = md.eigenvalues(k);
    if (lambda.imag() <= 1e-9) continue;  // keep one of each conjugate pair

    Mode m;
    m.lambda = lambda;
    m.freq_hz = lambda.imag() / (2.0 * M_PI);
    m.zeta = -lambda.real() / std::abs(lambda);
    m.unstable = m.zeta < 0.0;
    m.psi = vmat.col(k);

    Eigen::VectorXcd phi = refine_left(at, lambda, wmat.row(k).transpose());
    const std::complex<double> inner = (phi.array() * m.psi.array()).sum();
    if (std::abs(inner) < 1e-13)
      throw std::runtime_error("left/right eigenvector pairing degenerate");
    m.phi = phi / inner;

    m.right_residual = (ac * m.psi - lambda * m.psi).norm() /
                       (anorm * m.psi.norm());
    m.left_residual = (at * m.phi - lambda * m.phi).norm() /
                      (anorm * m.phi.norm());

    double rotor = 0.0, total = 0.0;
    for (int i = 0; i < ns; ++i) {
      const double part = std::abs(m.psi(i) * m.phi(i));
      total += part;
      if (i < 2 * lin.idx.ng) rotor += part;
    }
    m.rotor_share = total > 0.0 ? rotor / total : 0.0;

    md.oscillatory.push_back(std::move(m));
  }

  std::sort(md.oscillatory.begin(), md.oscillatory.end(),
            [](const Mode& a, const Mode& b) { return a.freq_hz < b.freq_hz; });
  return md;
}

std::vector<int> select_em_modes(const ModalDecomposition& md,
                                 const ModeFilter& filter) {
  std::vector<int> keep;
  for (int k = 0; k < static_cast<int>(md.oscillatory.size()); ++k) {
    const Mode& m = md.oscillatory[k];
    if (m.freq_hz < filter.f_lo || m.freq_hz > filter.f_hi) continue;
    if (m.zeta > filter.zeta_max) continue;
    if (m.rotor_share < filter.min_rotor_share) continue;
    keep.push_back(k);
  }
  return keep;
}

int match_mode(const ModalDecomposition& md, const std::vector<int>& candidates,
               const Eigen::VectorXcd& reference_psi_omega,
               const LinearModel& lin, double min_mac) {
  const int ng = lin.idx.ng;
  int best = -1;
  double best_mac = min_mac;
  for (int k : candidates) {
    const Mode& m = md.oscillatory[k];
    Eigen::VectorXcd w(ng);
    for (int i = 0; i < ng; ++i) w(i) = m.psi(lin.idx.omega[i]);
    const double num = std::norm(reference_psi_omega.dot(w));
    const double den =
        reference_psi_omega.squaredNorm() * w.squaredNorm();
    const double mac = den > 0.0 ? num / den : 0.0;
    if (mac >= best_mac) {
      best_mac = mac;
      best = k;
    }
  }
  return best;
}

PhasorSet make_phasors(const LinearModel& lin, const Mode& mode,
                       PhasorNorm norm, int ref_machine,
                       const Eigen::VectorXd* x0, double t0) {
  const auto& ix = lin.idx;
  const int ng = ix.ng;

  PhasorSet ph;
  ph.lambda = mode.lambda;
  ph.t0 = t0;

  std::complex<double> scale(1.0, 0.0);
  switch (norm) {
    case PhasorNorm::UnitCoeff:
      ph.chat = 0.5;
      scale = 1.0;
      break;
    case PhasorNorm::ReferenceMachine: {
      if (ref_machine < 0 || ref_machine >= ng)
        throw std::invalid_argument("reference machine out of range");
      const std::complex<double> wref = mode.psi(ix.omega[ref_machine]);
      if (std::abs(wref) < 1e-14 * mode.psi.norm())
        throw std::invalid_argument(
            "reference machine barely participates in this mode");
      scale = 1.0 / wref;
      ph.chat = 0.5 * scale;
      break;
    }
    case PhasorNorm::InitialCondition: {
      if (!x0)
        throw std::invalid_argument(
            "initial-condition scaling needs a state vector");
      const std::complex<double> c =
          (mode.phi.array() * x0->cast<std::complex<double>>().array()).sum();
      ph.chat = c * std::exp(mode.lambda.real() * t0);
      scale = 2.0 * ph.chat;
      break;
    }
  }

  ph.full = scale * mode.psi;
  ph.delta.setZero(ng);
  ph.omega.setZero(ng);
  ph.eq.setZero(ng);
  ph.ed.setZero(ng);
  ph.efd.setZero(ng);
  ph.torque.setZero(ng);
  for (int i = 0; i < ng; ++i) {
    ph.delta(i) = ph.full(ix.delta[i]);
    ph.omega(i) = ph.full(ix.omega[i]);
    ph.eq(i) = ph.full(ix.eq[i]);
    if (ix.ed[i] >= 0) ph.ed(i) = ph.full(ix.ed[i]);

    const auto& ex = lin.sys.exciter_at(i + 1);
    switch (ex.kind) {
      case ExciterKind::Manual:
        break;  // constant field: no deviation
      case ExciterKind::StaticFirstOrder:
        ph.efd(i) = ph.full(ix.efd[i]);
        break;
      case ExciterKind::St1aPss: {
        // The regulator output is algebraic; rebuild it from its inputs.
        const std::complex<double> vtr = ph.full(ix.vtr[i]);
        const std::complex<double> xw = ph.full(ix.xw[i]);
        const std::complex<double> xll = ph.full(ix.xll[i]);
        const std::complex<double> yw =
            ex.k_pss * ph.omega(i) / lin.omega_s - xw;
        const std::complex<double> vpss = xll + (ex.t1 / ex.t2) * (yw - xll);
        ph.efd(i) = ex.ka * (vpss - vtr);
        break;
      }
    }
  }
  return ph;
}

Eigen::MatrixXd reconstruct(const PhasorSet& ph, const Eigen::VectorXcd& amps,
                            const Eigen::VectorXd& tgrid) {
  const int nt = static_cast<int>(tgrid.size());
  const int nc = static_cast<int>(amps.size());
  const double sigma = ph.lambda.real();
  const double wd = ph.lambda.imag();
  Eigen::MatrixXd out(nt, nc);
  for (int k = 0; k < nt; ++k) {
    const double t = tgrid(k);
    const std::complex<double> rot =
        std::exp(std::complex<double>(sigma * (t - ph.t0), wd * t));
    for (int j = 0; j < nc; ++j) out(k, j) = (amps(j) * rot).real();
  }
  return out;
}

}  // namespace dampdist
