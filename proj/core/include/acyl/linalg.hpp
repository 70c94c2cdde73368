#pragma once

// Dense real matrix primitives shared by every other module: rank-aware
// pseudoinverse, PSD square root, definiteness classification and
// range/null-space bases. Matrices are small (n <= ~15) and dense.

#include <Eigen/Dense>

#include <vector>

namespace acyl {

using Index = Eigen::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Symmetric matrix. Symmetry is enforced at construction by averaging with
/// the transpose, so the stored matrix satisfies S == S^T exactly.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);

  static SymMat identity(Index n) { return SymMat(Mat::Identity(n, n)); }
  static SymMat zero(Index n) { return SymMat(Mat::Zero(n, n)); }

  const Mat& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  Mat m_;
};

/// Absolute singular-value threshold used when the caller passes 0:
/// machine epsilon * max(rows, cols) * sigma_max.
double default_rank_tol(const Mat& m);

/// Throws InvalidInputError when any entry is NaN or infinite.
void require_finite(const Mat& m, const char* what);

/// Number of singular values above `rank_tol` (0 selects default_rank_tol).
Index numerical_rank(const Mat& m, double rank_tol = 0.0);

/// Moore-Penrose pseudoinverse through the SVD. Singular values below
/// `rank_tol` (0 selects default_rank_tol) are treated as zero. Empty
/// matrices are allowed and yield the transposed-shape empty/zero result.
Mat pinv(const Mat& m, double rank_tol = 0.0);

/// Symmetric PSD square root. Eigenvalues with |lambda| <= 1e-10*||Q|| are
/// treated as zero; anything more negative raises NotPsdError.
SymMat sqrt_psd(const SymMat& q);

/// Eigenvalue-clamped copy of a nearly PSD matrix (same tolerance as sqrt_psd).
SymMat clamp_psd(const SymMat& q);

enum class Definiteness {
  kPositiveDefinite,
  kPositiveSemidefinite,
  kIndefinite,
  kNegativeDefinite,
  kNegativeSemidefinite,
};

struct DefinitenessReport {
  Definiteness kind;
  double min_eigenvalue;
  double max_eigenvalue;
};

/// Classifies by eigenvalue signs relative to +/-margin. Strict classes
/// (PD/ND) require the extreme eigenvalue to clear the margin.
DefinitenessReport definiteness(const SymMat& s, double margin = 0.0);

const char* to_string(Definiteness d);

struct SubspaceBases {
  Mat range;  ///< rows(M) x rank, orthonormal columns spanning range(M)
  Mat null;   ///< cols(M) x (cols - rank), orthonormal columns spanning ker(M)
};

SubspaceBases null_range_bases(const Mat& m, double rank_tol = 0.0);

/// Largest eigenvalue of a symmetric matrix (empty matrix -> -inf).
double max_eigenvalue(const SymMat& s);
double min_eigenvalue(const SymMat& s);

/// Spectral norm (largest singular value); 0 for empty matrices.
double spectral_norm(const Mat& m);

/// Block-diagonal assembly; empty blocks are allowed.
Mat block_diagonal(const std::vector<Mat>& blocks);

}  // namespace acyl
