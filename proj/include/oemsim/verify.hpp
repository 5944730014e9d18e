#pragma once

// Reference computations used to cross-check the main pipeline. Nothing here
// shares a code path with dynamics.hpp beyond the Eigen storage types.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "oemsim/constants.hpp"
#include "oemsim/dynamics.hpp"
#include "oemsim/errors.hpp"
#include "oemsim/gaussian.hpp"
#include "oemsim/model.hpp"

namespace oemsim::verify {

struct IntegrationConfig {
  double dt = 1e-3;    // dimensionless step
  double t_max = 1e3;  // 1e6 steps at the default step
  double tol = 1e-12;  // stationarity threshold on max|dV/dt|
};

template <int N>
struct IntegrationResult {
  CovarianceMatrix<N> cm;
  double t = 0.0;
  long steps = 0;
};

/// Integrates dV/dt = A V + V A^T + D with classical fourth-order Runge-Kutta
/// from V(0) = I/2 until max|dV/dt| < tol. The fixed point of the RK4 map of
/// this affine flow is the exact Lyapunov solution for any stable step size.
template <int N>
IntegrationResult<N> integrate_covariance(const Matrix<N>& a, const Matrix<N>& d,
                                          const IntegrationConfig& cfg = {}) {
  if (!(cfg.dt > 0.0) || !(cfg.tol > 0.0) || !(cfg.t_max > 0.0))
    throw DomainError("integrate_covariance: dt, tol and t_max must be positive");
  if (!is_stable(a).stable)
    throw InstabilityError("integrate_covariance: drift matrix is not Hurwitz");

  const int n = static_cast<int>(a.rows());
  const Matrix<N> at = a.transpose();
  auto flow = [&](const Matrix<N>& v) -> Matrix<N> { return a * v + v * at + d; };

  Matrix<N> v = 0.5 * Matrix<N>::Identity(n, n);
  const double h = cfg.dt;
  const long max_steps = static_cast<long>(std::ceil(cfg.t_max / h));
  for (long step = 0; step <= max_steps; ++step) {
    const Matrix<N> k1 = flow(v);
    if (k1.cwiseAbs().maxCoeff() < cfg.tol)
      return {{0.5 * (v + v.transpose())}, step * h, step};
    const Matrix<N> k2 = flow(v + 0.5 * h * k1);
    const Matrix<N> k3 = flow(v + 0.5 * h * k2);
    const Matrix<N> k4 = flow(v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!v.allFinite())
      break;
  }
  throw HorizonError("integrate_covariance: not stationary by t_max = " + std::to_string(cfg.t_max));
}

/// Solves (I (x) A + A (x) I) vec(V) = -vec(D) by Gaussian elimination with
/// partial pivoting, written out longhand. Does not test stability.
template <int N>
CovarianceMatrix<N> lyapunov_bruteforce(const Matrix<N>& a, const Matrix<N>& d) {
  const int n = static_cast<int>(a.rows());
  const int m = n * n;
  // augmented row-major system [K | b]
  std::vector<double> sys(static_cast<std::size_t>(m) * (m + 1), 0.0);
  auto at = [&](int r, int c) -> double& { return sys[static_cast<std::size_t>(r) * (m + 1) + c]; };

  double kmax = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int r = i + n * j;
      for (int k = 0; k < n; ++k) {
        at(r, k + n * j) += a(i, k);
        at(r, i + n * k) += a(j, k);
      }
      at(r, m) = -d(i, j);
    }
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      kmax = std::max(kmax, std::abs(at(r, c)));

  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(at(r, col)) > std::abs(at(piv, col)))
        piv = r;
    if (std::abs(at(piv, col)) <= 1e-14 * kmax)
      throw SingularityError("lyapunov_bruteforce: singular Kronecker system (marginal spectrum)");
    if (piv != col)
      for (int c = col; c <= m; ++c)
        std::swap(at(col, c), at(piv, c));
    for (int r = col + 1; r < m; ++r) {
      const double f = at(r, col) / at(col, col);
      if (f == 0.0)
        continue;
      for (int c = col; c <= m; ++c)
        at(r, c) -= f * at(col, c);
    }
  }
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int r = m - 1; r >= 0; --r) {
    double s = at(r, m);
    for (int c = r + 1; c < m; ++c)
      s -= at(r, c) * x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(r)] = s / at(r, r);
  }

  Matrix<N> v(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      v(i, j) = x[static_cast<std::size_t>(i + n * j)];
  return {0.5 * (v + v.transpose())};
}

/// Two-mode squeezed thermal state: diagonal blocks (2n+1) cosh(2r)/2 I,
/// correlation block (2n+1) sinh(2r)/2 diag(1, -1).
inline BipartiteCM make_tmsv(double r, double n_th = 0.0) {
  if (!(r >= 0.0) || !(n_th >= 0.0))
    throw DomainError("make_tmsv: need r >= 0 and n_th >= 0");
  const double w = 2.0 * n_th + 1.0;
  const double c = 0.5 * w * std::cosh(2.0 * r);
  const double s = 0.5 * w * std::sinh(2.0 * r);
  BipartiteCM cm;
  cm.v1 = c * Eigen::Matrix2d::Identity();
  cm.v2 = c * Eigen::Matrix2d::Identity();
  cm.vc << s, 0.0, 0.0, -s;
  return cm;
}

// ---------------------------------------------------------------------------
// Atom-free reference system

struct AtomFreeSystem {
  Eigen::Matrix<double, 6, 6> a; // dimensionless drift
  Eigen::Matrix<double, 6, 6> d; // dimensionless diffusion
};

/// Mechanics + optical cavity + microwave cavity with no atoms, assembled
/// directly from the parameters (its own steady state, couplings and noise).
inline AtomFreeSystem atom_free_system(const SystemParameters& p) {
  using std::sqrt;
  const double hbar = constants::hbar;
  const double omega_oc = 2.0 * constants::pi * constants::speed_of_light / p.lambda_oc;
  const double x_zpf = sqrt(hbar / (p.mass * p.omega_m));
  const double e_c = sqrt(2.0 * p.power_c * p.kappa_c / (hbar * omega_oc));
  const double e_w = sqrt(2.0 * p.power_w * p.kappa_w / (hbar * p.omega_w));
  const double alpha = e_c / sqrt(p.kappa_c * p.kappa_c + p.delta_c * p.delta_c);
  const double beta = e_w / sqrt(p.kappa_w * p.kappa_w + p.delta_w * p.delta_w);
  const double gc = sqrt(2.0) * (omega_oc / p.cavity_length) * x_zpf * alpha;
  const double gw = sqrt(2.0) * (p.mu * p.omega_w / (2.0 * p.plate_gap)) * x_zpf * beta;

  const double w = p.omega_m;
  AtomFreeSystem s;
  // clang-format off
  s.a <<  0,            1,             0,                0,                0,                0,
         -1,           -p.gamma_m / w, gc / w,           0,                gw / w,           0,
          0,            0,            -p.kappa_c / w,    p.delta_c / w,    0,                0,
          gc / w,       0,            -p.delta_c / w,   -p.kappa_c / w,    0,                0,
          0,            0,             0,                0,               -p.kappa_w / w,    p.delta_w / w,
          gw / w,       0,             0,                0,               -p.delta_w / w,   -p.kappa_w / w;
  // clang-format on
  auto bose = [&](double omega) {
    return p.temperature > 0.0
               ? 1.0 / (std::exp(hbar * omega / (constants::k_boltzmann * p.temperature)) - 1.0)
               : 0.0;
  };
  const double nm = bose(p.omega_m), nw = bose(p.omega_w);
  s.d.setZero();
  s.d(1, 1) = p.gamma_m * (2 * nm + 1) / w;
  s.d(2, 2) = s.d(3, 3) = p.kappa_c / w;
  s.d(4, 4) = s.d(5, 5) = p.kappa_w * (2 * nw + 1) / w;
  return s;
}

} // namespace oemsim::verify
