#pragma once

// Output-feedback synthesis for the general linear tracking problem.
//
//   plant       x'  = A1 x + B1 u + C1 w,   y = D1 x + E1 u + F1 w
//   reference   xr' = A2 xr + C2 h,         g = D2 xr
//   controller  xc' = A3 xc + B3 y + C3 g,  u = D3 xc + E3 y + F3 g
//   target      z   = K1 x + K2 xr + K3 xc, (w, h)^T G (w, h) <= 1
//
// With s = (x, xr, xc), f = (w, h) and X = [A3 B3 C3; D3 E3 F3] the closed
// loop is s' = (A + B X D) s + (C + B X F) f. The controller is found by
// making {s : s^T K^T P K s <= 1} an attracting cylinder: P comes from a cone
// complementarity iteration, Y from an LMI at fixed P, and X from Y.

#include "acyl/analysis.hpp"
#include "acyl/cylinder.hpp"
#include "acyl/linalg.hpp"
#include "acyl/lmi.hpp"

#include <optional>
#include <string>
#include <vector>

namespace acyl {

struct PlantModel {
  Mat A1;  ///< a1 x a1
  Mat B1;  ///< a1 x b1
  Mat C1;  ///< a1 x c1
  Mat D1;  ///< b2 x a1
  Mat E1;  ///< b2 x b1
  Mat F1;  ///< b2 x c1

  Index a1() const noexcept { return A1.rows(); }
  Index b1() const noexcept { return B1.cols(); }
  Index c1() const noexcept { return C1.cols(); }
  Index b2() const noexcept { return D1.rows(); }
  void validate() const;
};

/// May be empty (a2 = 0).
struct ReferenceModel {
  Mat A2;  ///< a2 x a2
  Mat C2;  ///< a2 x c2
  Mat D2;  ///< g x a2 (g is the dimension of the reference output)

  Index a2() const noexcept { return A2.rows(); }
  Index c2() const noexcept { return C2.cols(); }
  Index g() const noexcept { return D2.rows(); }
  void validate() const;
};

struct SynthesisProblem {
  PlantModel plant;
  ReferenceModel reference;
  Index a3 = 0;
  Mat K1;  ///< k x a1
  Mat K2;  ///< k x a2
  Mat K3;  ///< k x a3
  SymMat G;  ///< (c1 + c2) x (c1 + c2), positive definite

  /// Dimension checks, G > 0 and rank [K1 K2 K3] = k.
  void validate() const;
  Mat K() const;
};

/// X = [A3 B3 C3; D3 E3 F3], rows (a3, b1), columns (a3, b2, g).
struct ControllerParams {
  Mat A3, B3, C3, D3, E3, F3;

  Index order() const noexcept { return A3.rows(); }
  Mat X() const;
  static ControllerParams from_X(const Mat& x, Index a3, Index b1, Index b2, Index g);
  /// True when A3, B3, C3, D3 are all below `tol` in norm (u = E3 y + F3 g).
  bool effectively_static(double tol = 1e-6) const;
};

struct AssembledSystem {
  Mat A, B, C, D, F, K;
  Index n() const noexcept { return A.rows(); }
};

/// Block matrices of the closed loop. E1 does not enter: the loop is closed
/// through y^ = y - E1 u = D1 x + F1 w (see recover_nonzero_E1).
AssembledSystem assemble(const SynthesisProblem& problem);

struct HMatrices {
  Mat H1;  ///< k x k
  Mat H2;  ///< k x (c1 + c2)
  Mat H3;  ///< k x (a3 + b1)
  Mat H4;  ///< (a3 + b2 + g) x k
  Mat H5;  ///< (a3 + b2 + g) x (c1 + c2)
};

HMatrices build_H(const AssembledSystem& sys, double rank_tol = 0.0);

struct SolvabilityCheck {
  bool holds = false;
  double residual = 0.0;
  /// Residual of the reduced form B1 B1+ (A1 - A2) S+ S = A1 - A2 with
  /// S = D1^T D1 + D2^T D2, reported when K = [I -I 0].
  std::optional<double> tracking_residual;
};

/// KB (KB)+ KA (D (I - K+K))+ D (I - K+K) = KA (I - K+K), relative residual.
SolvabilityCheck check_solvability(const AssembledSystem& sys, double rank_tol = 0.0);

/// Same check, adding the tracking cross-check when K has the [I -I 0] shape.
SolvabilityCheck check_solvability(const SynthesisProblem& problem, double rank_tol = 0.0);

/// Y-LMI at fixed P and alpha:
///   [P H1 + H1^T P + alpha P, P H2; H2^T P, -alpha G]
/// + [P H3 Y H4 + (P H3 Y H4)^T, P H3 Y H5; (P H3 Y H5)^T, 0].
Mat y_block(const HMatrices& h, const SymMat& g, const SymMat& p, double alpha, const Mat& y);

/// Any strictly feasible Y of the Y-LMI (re-verified by eigenvalues), or nullopt.
std::optional<Mat> solve_Y(const HMatrices& h, const SymMat& g, const SymMat& p, double alpha,
                           const lmi::SolverOptions& options = {});

struct CclOptions {
  double stop_tol = 0.05;
  int max_iterations = 100;
  /// Stop as soon as some iterate's P makes the Y-LMI feasible.
  bool early_exit = true;
  lmi::SolverOptions solver;
};

struct CclResult {
  SymMat P;
  SymMat Q;
  double mu1 = 0.0;
  double mu2 = 0.0;
  /// trace(P_i Q_{i-1} + Q_i P_{i-1}) for i = 1, 2, ...
  std::vector<double> trace_history;
  int iterations = 0;  ///< trace minimizations performed
  bool converged = false;
  bool early_exit = false;
  std::optional<Mat> Y;  ///< set when early exit fired
};

/// Throws InfeasibleError when the initial pair of LMIs has no solution.
CclResult cone_complementarity(const HMatrices& h, const SymMat& g, double alpha, const CclOptions& options = {});

/// X = (KB)+ KA W + Y + (KB)+ KB Y D W,  W = (D (K+K - I))+.
ControllerParams recover_X(const Mat& y, const AssembledSystem& sys, const SynthesisProblem& problem,
                           double rank_tol = 0.0);

/// Rewrites a controller designed for y^ = y - E1 u into one driven by y:
///   u = L (D3 xc + E3 y + F3 g),  L = (I + E3 E1)^-1,
/// and xc' = A3 xc + B3 (y - E1 u) + C3 g with that u substituted.
/// Throws NotRealizableError when I + E3 E1 is singular.
ControllerParams recover_nonzero_E1(const ControllerParams& ctrl, const Mat& e1);

struct ClosedLoop {
  Mat M;  ///< n x n
  Mat N;  ///< n x (c1 + c2)
  Mat K;
  SymMat P;
  double alpha = 0.0;
  Cylinder cylinder;  ///< Q = K^T P K
  double margin = 0.0;
};

/// M = A + B X D, N = C + B X F.
std::pair<Mat, Mat> closed_loop_matrices(const AssembledSystem& sys, const ControllerParams& ctrl);

/// Closed loop with the certificate block evaluated at (P, alpha).
ClosedLoop close_loop(const AssembledSystem& sys, const ControllerParams& ctrl, const SymMat& g, const SymMat& p,
                      double alpha);

struct AlphaRecord {
  double alpha = 0.0;
  std::string status;  ///< "verified", "lmi-infeasible", "y-infeasible", "not-certified"
  CclResult ccl;
  double margin = 0.0;
  double log_det = 0.0;
};

struct SynthesisOptions {
  std::vector<double> alpha_grid;  ///< empty selects default_alpha_grid(H1)
  CclOptions ccl;
};

struct SynthesisResult {
  ControllerParams controller;  ///< realized for the true output y
  ControllerParams design;      ///< designed for y^ (equal to controller when E1 = 0)
  ClosedLoop closed_loop;
  SolvabilityCheck solvability;
  std::vector<AlphaRecord> alphas;
  std::size_t selected = 0;
};

/// Full pipeline over the alpha grid. Among verified alphas the largest
/// log det P wins, ties going to the smaller alpha. Throws StructuralError
/// when the solvability condition fails and InfeasibleError when no alpha
/// produces a verified controller.
SynthesisResult synthesize(const SynthesisProblem& problem, const SynthesisOptions& options = {});

}  // namespace acyl
