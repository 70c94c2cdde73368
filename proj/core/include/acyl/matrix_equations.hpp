#pragma once

// Solvability and parameterization of linear matrix equations used by the
// controller-synthesis pipeline.

#include "acyl/linalg.hpp"

#include <optional>

namespace acyl {

/// Relative residual threshold shared by the solvability tests of AXB = C,
/// output regularity and the controller solvability condition.
inline constexpr double kSolvabilityTol = 1e-8;

/// Result of AXB = C. When solvable, every solution is
///   X(Y) = particular + Y - projector_left * Y * projector_right.
struct AxbSolution {
  bool solvable = false;
  double residual = 0.0;  ///< ||A A+ C B+ B - C|| / (1 + ||C||)
  Mat particular;         ///< A+ C B+
  Mat projector_left;     ///< A+ A
  Mat projector_right;    ///< B B+

  Mat parameterize(const Mat& y) const;
};

AxbSolution solve_axb(const Mat& a, const Mat& b, const Mat& c, double rank_tol = 0.0);

/// Witnesses for A X B + (A X B)^T + C < 0: it is solvable iff
/// C < mu_left * A A^T and C < mu_right * B^T B for some reals.
struct StrictLyapunovSolvability {
  bool feasible = false;
  double mu_left = 0.0;
  double mu_right = 0.0;
  /// Largest eigenvalue of C restricted to ker(A^T) / ker(B) (-inf if trivial).
  double kernel_eig_left = 0.0;
  double kernel_eig_right = 0.0;
};

StrictLyapunovSolvability strict_lyap_solvable(const Mat& a, const Mat& b, const SymMat& c);

/// Smallest-plus-headroom mu with C - mu * W < 0 for W = F F^T >= 0, or
/// nullopt when ker(F^T) carries a non-negative direction of C. Exposed for
/// the synthesis diagnostics.
std::optional<double> one_sided_multiplier(const SymMat& c, const Mat& f);

}  // namespace acyl
