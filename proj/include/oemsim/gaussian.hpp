#pragma once

// Two-mode reductions of the steady-state covariance matrix and their
// logarithmic negativity.
//
// Convention: quadratures X = (o + o^dag)/sqrt(2), Y = (o - o^dag)/(i sqrt(2)),
// so the vacuum has V = I/2 and a bipartition is entangled iff the smallest
// symplectic eigenvalue of the partial transpose is below 1/2.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "oemsim/errors.hpp"

namespace oemsim {

/// Subsystem slot in the quadrature vector (each spans two rows).
enum class Subsystem : int { mr = 0, oc = 1, mc = 2, sba = 3, scb = 4 };

enum class BipartitePair : int { mr_oc = 0, mr_mc, oc_mc, oc_sba, oc_scb };

inline constexpr int kPairCount = 5;

struct PairInfo {
  BipartitePair pair;
  std::string_view tag; // "MR-OC"
  std::string_view key; // "mr_oc"
  Subsystem first;
  Subsystem second;
  bool bosonic; // both sides are genuine bosonic modes
};

inline constexpr std::array<PairInfo, kPairCount> pair_table{{
    {BipartitePair::mr_oc, "MR-OC", "mr_oc", Subsystem::mr, Subsystem::oc, true},
    {BipartitePair::mr_mc, "MR-MC", "mr_mc", Subsystem::mr, Subsystem::mc, true},
    {BipartitePair::oc_mc, "OC-MC", "oc_mc", Subsystem::oc, Subsystem::mc, true},
    {BipartitePair::oc_sba, "OC-SBA", "oc_sba", Subsystem::oc, Subsystem::sba, false},
    {BipartitePair::oc_scb, "OC-SCB", "oc_scb", Subsystem::oc, Subsystem::scb, false},
}};

inline const PairInfo& info(BipartitePair p) { return pair_table[static_cast<int>(p)]; }

/// Accepts either the tag ("MR-OC", case-insensitive) or the key ("mr_oc").
inline std::optional<BipartitePair> parse_pair(std::string_view s) {
  std::string norm(s);
  for (auto& c : norm)
    c = (c == '-') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& e : pair_table)
    if (e.key == norm)
      return e.pair;
  return std::nullopt;
}

struct BipartiteCM {
  Eigen::Matrix2d v1; // first subsystem
  Eigen::Matrix2d v2; // second subsystem
  Eigen::Matrix2d vc; // correlations (rows: first, cols: second)

  Eigen::Matrix4d full() const {
    Eigen::Matrix4d m;
    m << v1, vc, vc.transpose(), v2;
    return m;
  }

  static BipartiteCM from_full(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<2, 2>(), m.bottomRightCorner<2, 2>(), m.topRightCorner<2, 2>()};
  }
};

/// 4x4 restriction of `v` onto the rows/cols of the pair's two subsystems.
template <typename Derived>
BipartiteCM extract_bipartite(const Eigen::MatrixBase<Derived>& v, BipartitePair pair) {
  const auto& e = info(pair);
  const int a = 2 * static_cast<int>(e.first);
  const int b = 2 * static_cast<int>(e.second);
  if (b + 2 > v.rows() || v.rows() != v.cols())
    throw DomainError("extract_bipartite: pair " + std::string(e.tag) +
                      " does not fit a covariance matrix of size " + std::to_string(v.rows()));
  return {v.template block<2, 2>(a, a), v.template block<2, 2>(b, b),
          v.template block<2, 2>(a, b)};
}

struct LogNegativity {
  double e_n;
  double eta_minus; // smallest symplectic eigenvalue of the partial transpose
};

/// E_N = max(0, -ln(2 eta^-)) with
///   Sigma = det v1 + det v2 - 2 det vc,
///   eta^- = sqrt((Sigma - sqrt(Sigma^2 - 4 det V)) / 2).
/// Throws NonPhysicalError if det V < 0 or the discriminant is negative beyond
/// round-off (both relative 1e-9).
inline LogNegativity log_negativity(const BipartiteCM& cm) {
  const Eigen::Matrix4d full = cm.full();
  if (!full.allFinite())
    throw NonPhysicalError("log_negativity: covariance matrix has non-finite entries");
  const double det_v = full.determinant();
  const double sigma = cm.v1.determinant() + cm.v2.determinant() - 2.0 * cm.vc.determinant();

  const double scale = std::max(sigma * sigma, 1e-300);
  if (det_v < -1e-9 * scale)
    throw NonPhysicalError("log_negativity: det V < 0 (" + std::to_string(det_v) + ")");

  double disc = sigma * sigma - 4.0 * det_v;
  if (disc < 0.0) {
    if (disc < -1e-9 * scale)
      throw NonPhysicalError("log_negativity: negative discriminant (" + std::to_string(disc) +
                             ")");
    disc = 0.0;
  }
  const double eta_sq = 0.5 * (sigma - std::sqrt(disc));
  if (!(eta_sq > 0.0))
    throw NonPhysicalError("log_negativity: vanishing symplectic eigenvalue");
  const double eta = std::sqrt(eta_sq);
  const double e_n = (eta < 0.5 - 1e-12) ? -std::log(2.0 * eta) : 0.0;
  return {e_n, eta};
}

template <typename Derived>
LogNegativity log_negativity(const Eigen::MatrixBase<Derived>& v, BipartitePair pair) {
  return log_negativity(extract_bipartite(v, pair));
}

} // namespace oemsim
