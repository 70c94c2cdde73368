#pragma once

// Attracting cylinders of a disturbed linear system
//   x' = A x + B f,   f^T G f <= 1,
// seen through an output map C with rank C = k and C A (I - C+ C) = 0. The
// certificate is P > 0 with
//   [P X + X^T P + alpha P,  P C B ]
//   [(C B)^T P,            -alpha G] < 0,   X = C A C+,
// and the cylinder is {x : x^T C^T P C x <= 1}.

#include "acyl/cylinder.hpp"
#include "acyl/linalg.hpp"
#include "acyl/lmi.hpp"

#include <vector>

namespace acyl {

struct DisturbedSystem {
  Mat A;
  Mat B;
  SymMat G;

  /// Checks sizes and G > 0.
  DisturbedSystem(Mat a, Mat b, SymMat g);
};

struct RegularityCheck {
  bool regular = false;
  Index rank = 0;
  double residual = 0.0;  ///< ||C A (I - C+ C)|| / (1 + ||C A||)
};

RegularityCheck check_output_regularity(const Mat& c, const Mat& a);

/// The certificate block matrix evaluated at a given P and alpha.
Mat certificate_block(const DisturbedSystem& sys, const Mat& c, const SymMat& p, double alpha);

/// lambda_max of certificate_block; negative means certified.
double verify_cylinder(const DisturbedSystem& sys, const Mat& c, const SymMat& p, double alpha);

/// `count` log-spaced points over [1e-2, 1e2] * spectral scale of `x` (1 when x = 0).
std::vector<double> default_alpha_grid(const Mat& x, int count = 20);

struct AlphaTrial {
  double alpha = 0.0;
  lmi::Status status = lmi::Status::kInfeasible;
  double log_det = 0.0;  ///< log det P when feasible
  double margin = 0.0;   ///< verify_cylinder at the returned P
};

struct AnalysisOptions {
  std::vector<double> alpha_grid;  ///< empty selects default_alpha_grid
  /// Golden-section refinement of log(alpha) between the neighbours of the
  /// best grid point.
  bool refine = true;
  int refine_iterations = 24;
  lmi::SolverOptions solver;
};

struct AttractingCylinderResult {
  SymMat P;
  double alpha = 0.0;
  Cylinder cylinder;
  double lmi_margin = 0.0;
  /// 1 / lambda_min(P): the largest value of |y|^2 over the cross-section.
  double bound = 0.0;
  std::vector<AlphaTrial> trials;
};

/// Maximizes log det P at a single alpha (no regularity check).
lmi::LmiSolution solve_certificate(const DisturbedSystem& sys, const Mat& c, double alpha,
                                   const lmi::SolverOptions& options = {});

/// Throws StructuralError on a regularity violation and InfeasibleError
/// (listing every tried alpha) when no alpha is feasible.
AttractingCylinderResult find_attracting_cylinder(const DisturbedSystem& sys, const Mat& c,
                                                  const AnalysisOptions& options = {});

}  // namespace acyl
