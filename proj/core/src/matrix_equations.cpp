#include "acyl/matrix_equations.hpp"

#include "acyl/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace acyl {

namespace {

// Restricted-C eigenvalues must clear this (relative to 1 + ||C||) to count as strict.
constexpr double kStrictTol = 1e-12;
constexpr double kHeadroom = 0.1;
constexpr double kBisectionUpper = 1e12;
constexpr int kBisectionSteps = 30;
constexpr double kConditionLimit = 1e12;

bool negative_definite(const Mat& m) {
  if (m.size() == 0) return true;
  return max_eigenvalue(SymMat(m)) < 0.0;
}

std::optional<double> bisect_multiplier(const Mat& c, const Mat& w) {
  if (!negative_definite(c - kBisectionUpper * w)) return std::nullopt;
  if (negative_definite(c)) return 0.0;
  // Geometric bisection on (lo, hi]; lo infeasible, hi feasible.
  double lo = 0.0;
  double hi = kBisectionUpper;
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : hi * 1e-6;
    if (negative_definite(c - mid * w)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi * (1.0 + kHeadroom);
}

}  // namespace

Mat AxbSolution::parameterize(const Mat& y) const {
  if (y.rows() != particular.rows() || y.cols() != particular.cols()) {
    throw DimensionError("parameter Y has the wrong shape");
  }
  return particular + y - projector_left * y * projector_right;
}

AxbSolution solve_axb(const Mat& a, const Mat& b, const Mat& c, double rank_tol) {
  if (a.rows() != c.rows() || b.cols() != c.cols()) {
    throw DimensionError("AXB = C: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ", B is " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ", C is " +
                         std::to_string(c.rows()) + "x" + std::to_string(c.cols()));
  }
  require_finite(c, "AXB = C right-hand side");
  AxbSolution out;
  const Mat a_pinv = pinv(a, rank_tol);
  const Mat b_pinv = pinv(b, rank_tol);
  out.particular = a_pinv * c * b_pinv;
  out.projector_left = a_pinv * a;
  out.projector_right = b * b_pinv;
  const Mat reconstructed = a * a_pinv * c * b_pinv * b;
  out.residual = (reconstructed - c).norm() / (1.0 + c.norm());
  out.solvable = out.residual <= kSolvabilityTol;
  return out;
}

std::optional<double> one_sided_multiplier(const SymMat& c, const Mat& f) {
  const Index n = c.dim();
  if (f.rows() != n) throw DimensionError("multiplier factor has the wrong number of rows");
  const Mat& cm = c.matrix();
  const double strict = kStrictTol * (1.0 + cm.norm());
  const SubspaceBases bases = null_range_bases(f.transpose());
  const Mat& z = bases.null;  // ker(F^T), orthogonal complement of range(F)
  const Mat u = null_range_bases(f).range;

  Mat czz = z.transpose() * cm * z;
  if (z.cols() > 0 && max_eigenvalue(SymMat(czz)) >= -strict) return std::nullopt;
  if (u.cols() == 0) return 0.0;  // F = 0: the condition is just C < 0.

  const Mat w_full = f * f.transpose();
  const Mat w = u.transpose() * w_full * u;
  Mat schur = u.transpose() * cm * u;
  if (z.cols() > 0) {
    const Mat czu = z.transpose() * cm * u;
    schur -= czu.transpose() * czz.ldlt().solve(czu);
  }

  Eigen::SelfAdjointEigenSolver<Mat> wes(w);
  const double wmax = wes.eigenvalues().maxCoeff();
  const double wmin = wes.eigenvalues().minCoeff();
  std::optional<double> mu;
  if (wmin > 0.0 && wmax / wmin < kConditionLimit) {
    // Generalized eigenvalue bound: mu* = lambda_max(W^{-1/2} S W^{-1/2}).
    const Mat w_isqrt = wes.eigenvectors() * wes.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                        wes.eigenvectors().transpose();
    const double mu_star = max_eigenvalue(SymMat(w_isqrt * schur * w_isqrt));
    if (mu_star < 0.0) {
      mu = 0.0;
    } else {
      mu = mu_star * (1.0 + kHeadroom) + 1e-9 * (1.0 + mu_star);
    }
    if (!negative_definite(cm - *mu * w_full)) mu.reset();
  }
  if (!mu) mu = bisect_multiplier(cm, w_full);
  return mu;
}

StrictLyapunovSolvability strict_lyap_solvable(const Mat& a, const Mat& b, const SymMat& c) {
  const Index n = c.dim();
  if (a.rows() != n || b.cols() != n) {
    throw DimensionError("AXB + (AXB)^T + C: A must have " + std::to_string(n) + " rows and B " +
                         std::to_string(n) + " columns");
  }
  StrictLyapunovSolvability out;
  const auto kernel_eig = [&](const Mat& f) {
    const Mat z = null_range_bases(f.transpose()).null;
    if (z.cols() == 0) return -std::numeric_limits<double>::infinity();
    return max_eigenvalue(SymMat(z.transpose() * c.matrix() * z));
  };
  out.kernel_eig_left = kernel_eig(a);
  out.kernel_eig_right = kernel_eig(b.transpose());
  const auto left = one_sided_multiplier(c, a);
  const auto right = one_sided_multiplier(c, b.transpose());
  out.feasible = left.has_value() && right.has_value();
  out.mu_left = left.value_or(std::numeric_limits<double>::quiet_NaN());
  out.mu_right = right.value_or(std::numeric_limits<double>::quiet_NaN());
  return out;
}

}  // namespace acyl
