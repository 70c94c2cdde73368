#include "acyl/analysis.hpp"

#include "acyl/errors.hpp"
#include "acyl/matrix_equations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace acyl {

namespace {

void check_shapes(const DisturbedSystem& sys, const Mat& c) {
  if (c.cols() != sys.A.rows()) {
    throw DimensionError("output map has " + std::to_string(c.cols()) + " columns, state dimension is " +
                         std::to_string(sys.A.rows()));
  }
}

double log_det_of(const Mat& p) {
  Eigen::LLT<Mat> llt(p);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

DisturbedSystem::DisturbedSystem(Mat a, Mat b, SymMat g) : A(std::move(a)), B(std::move(b)), G(std::move(g)) {
  if (A.rows() != A.cols()) throw DimensionError("A must be square");
  if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
  if (G.dim() != B.cols()) throw DimensionError("G must match the disturbance dimension");
  require_finite(A, "A");
  require_finite(B, "B");
  if (G.dim() > 0 && definiteness(G).kind != Definiteness::kPositiveDefinite) {
    throw NotPsdError("disturbance bound G must be positive definite");
  }
}

RegularityCheck check_output_regularity(const Mat& c, const Mat& a) {
  if (a.rows() != a.cols() || c.cols() != a.rows()) throw DimensionError("output map and A are not conformable");
  RegularityCheck r;
  r.rank = numerical_rank(c);
  const Mat ca = c * a;
  const Mat comp = Mat::Identity(a.rows(), a.rows()) - pinv(c) * c;
  r.residual = spectral_norm(ca * comp) / (1.0 + spectral_norm(ca));
  r.regular = r.rank == c.rows() && r.residual <= kSolvabilityTol;
  return r;
}

Mat certificate_block(const DisturbedSystem& sys, const Mat& c, const SymMat& p, double alpha) {
  check_shapes(sys, c);
  const Index k = c.rows();
  const Index m = sys.B.cols();
  if (p.dim() != k) throw DimensionError("P must be k x k with k = rows(C)");
  const Mat x = c * sys.A * pinv(c);
  const Mat cb = c * sys.B;
  const Mat& pm = p.matrix();
  Mat out(k + m, k + m);
  out.topLeftCorner(k, k) = pm * x + x.transpose() * pm + alpha * pm;
  out.topRightCorner(k, m) = pm * cb;
  out.bottomLeftCorner(m, k) = cb.transpose() * pm;
  out.bottomRightCorner(m, m) = -alpha * sys.G.matrix();
  return out;
}

double verify_cylinder(const DisturbedSystem& sys, const Mat& c, const SymMat& p, double alpha) {
  return max_eigenvalue(SymMat(certificate_block(sys, c, p, alpha)));
}

std::vector<double> default_alpha_grid(const Mat& x, int count) {
  if (count < 1) throw InvalidInputError("alpha grid needs at least one point");
  double scale = spectral_norm(x);
  if (!(scale > 0.0)) scale = 1.0;
  std::vector<double> grid;
  grid.reserve(count);
  const double lo = std::log10(1e-2 * scale);
  const double hi = std::log10(1e2 * scale);
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    grid.push_back(std::pow(10.0, lo + f * (hi - lo)));
  }
  return grid;
}

lmi::LmiSolution solve_certificate(const DisturbedSystem& sys, const Mat& c, double alpha,
                                   const lmi::SolverOptions& options) {
  check_shapes(sys, c);
  if (!(alpha > 0.0)) throw InvalidInputError("alpha must be positive");
  const Index k = c.rows();
  const Mat x = c * sys.A * pinv(c);
  const Mat cb = c * sys.B;

  lmi::LmiProblem problem;
  const lmi::AffineExpr p = problem.add_symmetric("P", k);
  const lmi::AffineExpr top_left = p * x + x.transpose() * p + alpha * p;
  const lmi::AffineExpr top_right = p * cb;
  const lmi::AffineExpr block = lmi::AffineExpr::block({
      {top_left, top_right},
      {top_right.transpose(), lmi::AffineExpr(-alpha * sys.G.matrix())},
  });
  problem.add_constraint(block, lmi::Sense::kNegativeDefinite, std::nullopt, "certificate");
  problem.add_constraint(p, lmi::Sense::kPositiveDefinite, std::nullopt, "P > 0");
  return lmi::maximize_log_det(problem, p, options);
}

AttractingCylinderResult find_attracting_cylinder(const DisturbedSystem& sys, const Mat& c,
                                                  const AnalysisOptions& options) {
  check_shapes(sys, c);
  const RegularityCheck reg = check_output_regularity(c, sys.A);
  if (reg.rank != c.rows()) {
    throw StructuralError("output map must have full row rank (rank " + std::to_string(reg.rank) + " < " +
                              std::to_string(c.rows()) + ")",
                          reg.residual);
  }
  if (!reg.regular) {
    std::ostringstream msg;
    msg << "output map is not regular: ||C A (I - C+ C)|| relative residual " << reg.residual;
    throw StructuralError(msg.str(), reg.residual);
  }

  std::vector<double> grid = options.alpha_grid;
  if (grid.empty()) grid = default_alpha_grid(c * sys.A * pinv(c));
  for (double a : grid) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInputError("alpha grid values must be positive");
  }
  std::sort(grid.begin(), grid.end());

  AttractingCylinderResult best;
  double best_log_det = -std::numeric_limits<double>::infinity();
  bool found = false;
  std::vector<AlphaTrial> trials;

  auto attempt = [&](double alpha) {
    const lmi::LmiSolution sol = solve_certificate(sys, c, alpha, options.solver);
    AlphaTrial trial;
    trial.alpha = alpha;
    trial.status = sol.status;
    double log_det = -std::numeric_limits<double>::infinity();
    if (sol.feasible()) {
      const SymMat p(sol.at("P"));
      trial.margin = verify_cylinder(sys, c, p, alpha);
      log_det = log_det_of(p.matrix());
      trial.log_det = log_det;
      // Ties go to the smaller alpha: candidates arrive in ascending order
      // on the grid, refinement only replaces on strict improvement.
      if (trial.margin < 0.0 && log_det > best_log_det) {
        best_log_det = log_det;
        best.P = p;
        best.alpha = alpha;
        best.lmi_margin = trial.margin;
        found = true;
      }
    }
    trials.push_back(trial);
    return log_det;
  };

  std::vector<double> values;
  values.reserve(grid.size());
  for (double a : grid) values.push_back(attempt(a));

  if (found && options.refine && grid.size() > 1) {
    const auto it = std::find(grid.begin(), grid.end(), best.alpha);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    double lo = std::log(grid[i == 0 ? 0 : i - 1]);
    double hi = std::log(grid[std::min(i + 1, grid.size() - 1)]);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = attempt(std::exp(x1));
    double f2 = attempt(std::exp(x2));
    for (int iter = 0; iter < options.refine_iterations; ++iter) {
      if (f1 >= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = attempt(std::exp(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = attempt(std::exp(x2));
      }
    }
  }

  if (!found) {
    std::ostringstream msg;
    msg << "no alpha gives a certified cylinder:";
    for (const AlphaTrial& t : trials) msg << "\n  alpha " << t.alpha << ": " << lmi::to_string(t.status);
    throw InfeasibleError(msg.str());
  }

  best.cylinder = Cylinder(SymMat(c.transpose() * best.P.matrix() * c));
  best.bound = 1.0 / min_eigenvalue(best.P);
  best.trials = std::move(trials);
  return best;
}

}  // namespace acyl
