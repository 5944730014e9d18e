#pragma once

// Linearized fluctuation dynamics u' = A u + n of the ten quadratures
//   (q, p, X_c, Y_c, X_w, Y_w, X_a1, Y_a1, X_a2, Y_a2)
// and the steady-state covariance V solving A V + V A^T = -D.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oemsim/errors.hpp"
#include "oemsim/model.hpp"

namespace oemsim {

inline constexpr int kQuadratures = 10;
inline constexpr int kAtomFreeQuadratures = 6;

/// Quadrature index (0-based) into u.
enum Quadrature : int {
  q_mr = 0,
  p_mr = 1,
  x_oc = 2,
  y_oc = 3,
  x_mc = 4,
  y_mc = 5,
  x_a1 = 6,
  y_a1 = 7,
  x_a2 = 8,
  y_a2 = 9,
};

template <int N>
using Matrix = Eigen::Matrix<double, N, N>;
using Matrix10 = Matrix<kQuadratures>;

enum class Units {
  dimensionless, // rates divided by omega_m, time in units of 1/omega_m
  si,            // rad/s
};

template <int N>
struct DriftMatrix {
  Matrix<N> a;
  /// Natural frequency scale in the matrix's own units (1 when dimensionless).
  double omega_scale = 1.0;
};

template <int N>
struct DiffusionMatrix {
  Matrix<N> d;
};

template <int N>
struct CovarianceMatrix {
  Matrix<N> v;
};

/// Drift matrix of the linearized quantum Langevin equations around `ss`.
inline DriftMatrix<kQuadratures> build_drift(const SystemParameters& p, const SteadyState& ss,
                                             Units units = Units::dimensionless) {
  Matrix10 a = Matrix10::Zero();
  const double g = p.g;
  const double g_ra = p.g * p.r_a;
  const double dc = ss.delta_c;
  const double dw = ss.delta_w;

  a(q_mr, p_mr) = p.omega_m;

  a(p_mr, q_mr) = -p.omega_m;
  a(p_mr, p_mr) = -p.gamma_m;
  a(p_mr, x_oc) = ss.G_c;
  a(p_mr, x_mc) = ss.G_w;

  a(x_oc, x_oc) = -p.kappa_c;
  a(x_oc, y_oc) = dc;
  a(x_oc, y_a1) = g;
  a(x_oc, y_a2) = g;

  a(y_oc, q_mr) = ss.G_c;
  a(y_oc, x_oc) = -dc;
  a(y_oc, y_oc) = -p.kappa_c;
  a(y_oc, x_a1) = -g;
  a(y_oc, x_a2) = -g;

  a(x_mc, x_mc) = -p.kappa_w;
  a(x_mc, y_mc) = dw;

  a(y_mc, q_mr) = ss.G_w;
  a(y_mc, x_mc) = -dw;
  a(y_mc, y_mc) = -p.kappa_w;

  a(x_a1, y_oc) = g_ra * (p.rho_ca0 - p.rho_aa0);
  a(x_a1, x_a1) = -p.kappa_a;
  a(x_a1, y_a1) = p.delta_a1;

  a(y_a1, x_oc) = g_ra * (p.rho_ca0 + p.rho_aa0);
  a(y_a1, x_a1) = -p.delta_a1;
  a(y_a1, y_a1) = -p.kappa_a;

  a(x_a2, y_oc) = g_ra * (p.rho_cc0 - p.rho_ca0);
  a(x_a2, x_a2) = -p.kappa_a;
  a(x_a2, y_a2) = -p.delta_a2;

  a(y_a2, x_oc) = g_ra * (p.rho_cc0 + p.rho_ca0);
  a(y_a2, x_a2) = p.delta_a2;
  a(y_a2, y_a2) = -p.kappa_a;

  if (units == Units::dimensionless)
    return {a / p.omega_m, 1.0};
  return {a, p.omega_m};
}

/// Diagonal noise matrix. The optical input noise is taken at zero thermal
/// occupation, N(omega_c) ~ 0 at optical frequencies.
inline DiffusionMatrix<kQuadratures> build_diffusion(const SystemParameters& p,
                                                     Units units = Units::dimensionless) {
  const double n_mech = thermal_occupation(p.omega_m, p.temperature);
  const double n_w = thermal_occupation(p.omega_w, p.temperature);
  Eigen::Matrix<double, kQuadratures, 1> diag;
  diag << 0.0, p.gamma_m * (2.0 * n_mech + 1.0), p.kappa_c, p.kappa_c,
      p.kappa_w * (2.0 * n_w + 1.0), p.kappa_w * (2.0 * n_w + 1.0), p.kappa_a, p.kappa_a,
      p.kappa_a, p.kappa_a;
  if (units == Units::dimensionless)
    diag /= p.omega_m;
  return {diag.asDiagonal()};
}

// ---------------------------------------------------------------------------
// Stability

struct StabilityReport {
  bool stable = false;
  double max_real_part = 0.0; // spectral abscissa, in the matrix's units
};

/// Hurwitz test: stable iff every eigenvalue has Re < -1e-12 * omega_scale.
/// Marginal spectra count as unstable.
template <typename Derived>
StabilityReport is_stable(const Eigen::MatrixBase<Derived>& a, double omega_scale = 1.0) {
  if (!a.allFinite())
    throw InstabilityError("is_stable: drift matrix has non-finite entries");
  using Plain = typename Derived::PlainObject;
  Eigen::EigenSolver<Plain> es(a.eval(), /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw InstabilityError("is_stable: eigenvalue computation did not converge");
  const double abscissa = es.eigenvalues().real().maxCoeff();
  return {abscissa < -1e-12 * omega_scale, abscissa};
}

template <int N>
StabilityReport is_stable(const DriftMatrix<N>& drift) {
  return is_stable(drift.a, drift.omega_scale);
}

// ---------------------------------------------------------------------------
// Lyapunov equation

template <int N>
struct LyapunovSolution {
  CovarianceMatrix<N> cm;
  double rcond = 1.0;          // reciprocal condition estimate of the solve
  bool ill_conditioned = false; // rcond < 1e-12
};

/// max |A V + V A^T + D|
template <typename DA, typename DV, typename DD>
double lyapunov_residual(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DV>& v,
                         const Eigen::MatrixBase<DD>& d) {
  return (a * v + v * a.transpose() + d).cwiseAbs().maxCoeff();
}

/// Relative residual used as the acceptance measure:
/// max|AV + VA^T + D| / max(max|A| max|V|, max|D|).
template <typename DA, typename DV, typename DD>
double lyapunov_relative_residual(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DV>& v,
                                  const Eigen::MatrixBase<DD>& d) {
  const double scale = std::max(a.cwiseAbs().maxCoeff() * v.cwiseAbs().maxCoeff(),
                                d.cwiseAbs().maxCoeff());
  const double r = lyapunov_residual(a, v, d);
  return scale > 0.0 ? r / scale : r;
}

namespace detail {

template <int N>
Matrix<N> symmetrized(const Matrix<N>& m) {
  return 0.5 * (m + m.transpose());
}

/// K = I (x) A + A (x) I, acting on the column-major vec(V).
template <int N>
Eigen::MatrixXd kronecker_sum(const Matrix<N>& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int row = i + n * j;
      for (int m = 0; m < n; ++m) {
        k(row, m + n * j) += a(i, m); // (A V)_ij = sum_m A_im V_mj
        k(row, i + n * m) += a(j, m); // (V A^T)_ij = sum_m V_im A_jm
      }
    }
  return k;
}

template <int N>
void require_stable(const Matrix<N>& a, const char* who) {
  const auto report = is_stable(a);
  if (!report.stable)
    throw InstabilityError(std::string(who) + ": drift matrix is not Hurwitz (spectral abscissa " +
                           std::to_string(report.max_real_part) + ")");
}

} // namespace detail

/// Steady-state covariance from the Kronecker-vectorized linear system, with
/// one step of iterative refinement. Reference path.
template <int N>
LyapunovSolution<N> solve_lyapunov(const Matrix<N>& a, const Matrix<N>& d) {
  detail::require_stable<N>(a, "solve_lyapunov");
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd k = detail::kronecker_sum<N>(a);
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(d.data(), n * n);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
  Eigen::VectorXd x = lu.solve(rhs);
  x += lu.solve(rhs - k * x);

  LyapunovSolution<N> out;
  out.cm.v = detail::symmetrized<N>(Eigen::Map<const Matrix<N>>(x.data(), n, n));
  out.rcond = lu.rcond();
  out.ill_conditioned = out.rcond < 1e-12;
  return out;
}

template <int N>
LyapunovSolution<N> solve_lyapunov(const DriftMatrix<N>& a, const DiffusionMatrix<N>& d) {
  return solve_lyapunov<N>(a.a, d.d);
}

/// Bartels-Stewart: real Schur form A = U T U^T, then block back-substitution
/// on T Y + Y T^T = -U^T D U with 1x1 / 2x2 diagonal blocks.
template <int N>
LyapunovSolution<N> solve_lyapunov_schur(const Matrix<N>& a, const Matrix<N>& d) {
  detail::require_stable<N>(a, "solve_lyapunov_schur");
  const int n = static_cast<int>(a.rows());
  Eigen::RealSchur<Matrix<N>> schur(a);
  if (schur.info() != Eigen::Success)
    throw InstabilityError("solve_lyapunov_schur: Schur decomposition failed");
  const Matrix<N> t = schur.matrixT();
  const Matrix<N> u = schur.matrixU();
  const Matrix<N> c = -(u.transpose() * d * u);

  // diagonal block starts and sizes
  std::vector<int> start, size;
  for (int i = 0; i < n;) {
    const int s = (i + 1 < n && t(i + 1, i) != 0.0) ? 2 : 1;
    start.push_back(i);
    size.push_back(s);
    i += s;
  }
  const int blocks = static_cast<int>(start.size());

  Matrix<N> y = Matrix<N>::Zero(n, n);
  double min_rcond = 1.0;
  for (int bj = blocks - 1; bj >= 0; --bj) {
    const int j0 = start[bj], q = size[bj];
    for (int bi = blocks - 1; bi >= 0; --bi) {
      const int i0 = start[bi], p = size[bi];
      Eigen::MatrixXd rhs = c.block(i0, j0, p, q);
      // sum over K > I of T_IK Y_KJ and over K > J of Y_IK T_JK^T
      const int after_i = i0 + p, after_j = j0 + q;
      if (after_i < n)
        rhs -= t.block(i0, after_i, p, n - after_i) * y.block(after_i, j0, n - after_i, q);
      if (after_j < n)
        rhs -= y.block(i0, after_j, p, n - after_j) *
               t.block(j0, after_j, q, n - after_j).transpose();

      const Eigen::MatrixXd tii = t.block(i0, i0, p, p);
      const Eigen::MatrixXd tjj = t.block(j0, j0, q, q);
      Eigen::MatrixXd small = Eigen::MatrixXd::Zero(p * q, p * q);
      for (int col = 0; col < q; ++col)
        for (int row = 0; row < p; ++row)
          for (int m = 0; m < p; ++m)
            small(row + p * col, m + p * col) += tii(row, m);
      for (int col = 0; col < q; ++col)
        for (int row = 0; row < p; ++row)
          for (int m = 0; m < q; ++m)
            small(row + p * col, row + p * m) += tjj(col, m);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(small);
      min_rcond = std::min(min_rcond, lu.rcond());
      const Eigen::VectorXd sol =
          lu.solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), p * q));
      y.block(i0, j0, p, q) = Eigen::Map<const Eigen::MatrixXd>(sol.data(), p, q);
    }
  }

  LyapunovSolution<N> out;
  out.cm.v = detail::symmetrized<N>(u * y * u.transpose());
  out.rcond = min_rcond;
  out.ill_conditioned = min_rcond < 1e-12;
  return out;
}

// ---------------------------------------------------------------------------
// Atom-free subsystem

/// Leading 6x6 block (mechanics + both cavities) of a drift matrix built with
/// g = 0; the atomic quadratures are then exactly decoupled.
template <int N>
DriftMatrix<kAtomFreeQuadratures> atom_free_block(const DriftMatrix<N>& drift) {
  return {drift.a.template topLeftCorner<kAtomFreeQuadratures, kAtomFreeQuadratures>(),
          drift.omega_scale};
}

template <int N>
DiffusionMatrix<kAtomFreeQuadratures> atom_free_block(const DiffusionMatrix<N>& diffusion) {
  return {diffusion.d.template topLeftCorner<kAtomFreeQuadratures, kAtomFreeQuadratures>()};
}

// ---------------------------------------------------------------------------
// Physicality

/// Determinant of the 2x2 reduced covariance of bosonic mode `mode`
/// (0 = MR, 1 = OC, 2 = MC).
template <typename Derived>
double mode_determinant(const Eigen::MatrixBase<Derived>& v, int mode) {
  return v.template block<2, 2>(2 * mode, 2 * mode).determinant();
}

/// Heisenberg bound det >= 1/4 on the three bosonic modes. The atomic
/// quadratures are not canonical and are not checked.
template <typename Derived>
bool satisfies_heisenberg(const Eigen::MatrixBase<Derived>& v, double tol = 1e-9) {
  for (int mode = 0; mode < 3; ++mode)
    if (mode_determinant(v, mode) < 0.25 - tol)
      return false;
  return true;
}

} // namespace oemsim
