#include "acyl/linalg.hpp"

#include "acyl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace acyl {

namespace {

constexpr double kPsdClampTol = 1e-10;

Eigen::JacobiSVD<Mat> full_svd(const Mat& m) {
  return Eigen::JacobiSVD<Mat>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

double resolve_tol(const Mat& m, double rank_tol, const Vec& singular_values) {
  if (rank_tol < 0.0) throw InvalidInputError("rank tolerance must be non-negative");
  if (rank_tol > 0.0) return rank_tol;
  const double smax = singular_values.size() > 0 ? singular_values(0) : 0.0;
  return std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(m.rows(), m.cols())) * smax;
}

Index count_above(const Vec& sv, double tol) {
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++r;
  }
  return r;
}

Eigen::SelfAdjointEigenSolver<Mat> eig(const SymMat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s.matrix());
  if (es.info() != Eigen::Success) throw InvalidInputError("symmetric eigen-decomposition failed");
  return es;
}

}  // namespace

SymMat::SymMat(const Mat& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("symmetric matrix must be square, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  require_finite(m, "symmetric matrix");
  m_ = 0.5 * (m + m.transpose());
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw InvalidInputError(std::string(what) + " has non-finite entries");
}

double default_rank_tol(const Mat& m) {
  if (m.size() == 0) return 0.0;
  const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
  return resolve_tol(m, 0.0, sv);
}

Index numerical_rank(const Mat& m, double rank_tol) {
  require_finite(m, "matrix");
  if (m.size() == 0) return 0;
  const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
  return count_above(sv, resolve_tol(m, rank_tol, sv));
}

Mat pinv(const Mat& m, double rank_tol) {
  require_finite(m, "pinv input");
  if (m.size() == 0) return Mat::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double tol = resolve_tol(m, rank_tol, sv);
  Vec inv = Vec::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

SymMat clamp_psd(const SymMat& q) {
  if (q.dim() == 0) return q;
  const auto es = eig(q);
  Vec lambda = es.eigenvalues();
  const double scale = std::max(std::abs(lambda.minCoeff()), std::abs(lambda.maxCoeff()));
  const double tol = kPsdClampTol * scale;
  if (lambda.minCoeff() < -tol) {
    throw NotPsdError("matrix is not positive semidefinite (min eigenvalue " + std::to_string(lambda.minCoeff()) +
                      ")");
  }
  if (lambda.minCoeff() > tol) return q;
  // Roundoff-sized eigenvalues of either sign become exact zeros.
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) <= tol) lambda(i) = 0.0;
  }
  return SymMat(es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose());
}

SymMat sqrt_psd(const SymMat& q) {
  if (q.dim() == 0) return q;
  const auto es = eig(q);
  const Vec& lambda = es.eigenvalues();
  const double scale = std::max(std::abs(lambda.minCoeff()), std::abs(lambda.maxCoeff()));
  const double tol = kPsdClampTol * scale;
  if (lambda.minCoeff() < -tol) {
    throw NotPsdError("sqrt_psd: min eigenvalue " + std::to_string(lambda.minCoeff()) + " below tolerance");
  }
  // A roundoff eigenvalue of 1e-16 would otherwise leave a 1e-8 root behind.
  Vec root = Vec::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > tol) root(i) = std::sqrt(lambda(i));
  }
  return SymMat(es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose());
}

DefinitenessReport definiteness(const SymMat& s, double margin) {
  if (margin < 0.0) throw InvalidInputError("definiteness margin must be non-negative");
  if (s.dim() == 0) throw InvalidInputError("definiteness of an empty matrix is undefined");
  const Vec lambda = eig(s).eigenvalues();
  const double lo = lambda.minCoeff();
  const double hi = lambda.maxCoeff();
  Definiteness kind = Definiteness::kIndefinite;
  if (lo > margin) {
    kind = Definiteness::kPositiveDefinite;
  } else if (hi < -margin) {
    kind = Definiteness::kNegativeDefinite;
  } else if (lo >= -margin) {
    kind = Definiteness::kPositiveSemidefinite;
  } else if (hi <= margin) {
    kind = Definiteness::kNegativeSemidefinite;
  }
  return {kind, lo, hi};
}

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::kPositiveDefinite: return "PD";
    case Definiteness::kPositiveSemidefinite: return "PSD";
    case Definiteness::kIndefinite: return "INDEFINITE";
    case Definiteness::kNegativeDefinite: return "ND";
    case Definiteness::kNegativeSemidefinite: return "NSD";
  }
  return "?";
}

SubspaceBases null_range_bases(const Mat& m, double rank_tol) {
  require_finite(m, "matrix");
  if (m.size() == 0) return {Mat::Zero(m.rows(), 0), Mat::Identity(m.cols(), m.cols())};
  const auto svd = full_svd(m);
  const Vec& sv = svd.singularValues();
  const Index r = count_above(sv, resolve_tol(m, rank_tol, sv));
  return {svd.matrixU().leftCols(r), svd.matrixV().rightCols(m.cols() - r)};
}

double max_eigenvalue(const SymMat& s) {
  if (s.dim() == 0) return -std::numeric_limits<double>::infinity();
  return eig(s).eigenvalues().maxCoeff();
}

double min_eigenvalue(const SymMat& s) {
  if (s.dim() == 0) return std::numeric_limits<double>::infinity();
  return eig(s).eigenvalues().minCoeff();
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

Mat block_diagonal(const std::vector<Mat>& blocks) {
  Index rows = 0;
  Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Index r = 0;
  Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace acyl
