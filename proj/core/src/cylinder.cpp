#include "acyl/cylinder.hpp"

#include "acyl/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace acyl {

namespace {

// Singular values of M N below this (relative to ||M||) are roundoff.
constexpr double kMapRankTol = 1e-12;

Index rank_of_psd(const SymMat& q) {
  if (q.dim() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Mat> es(q.matrix(), Eigen::EigenvaluesOnly);
  const Vec& lambda = es.eigenvalues();
  const double tol = Cylinder::kRelTol * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
  Index r = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > tol) ++r;
  }
  return r;
}

}  // namespace

Cylinder::Cylinder(const SymMat& q) : q_(clamp_psd(q)), rank_(rank_of_psd(q_)) {}

double contains(const Cylinder& c, const Vec& x) {
  if (x.size() != c.dim()) {
    throw DimensionError("point has dimension " + std::to_string(x.size()) + ", cylinder lives in R^" +
                         std::to_string(c.dim()));
  }
  return x.dot(c.form().matrix() * x);
}

CylinderDecomposition decompose(const Cylinder& c) {
  const Index n = c.dim();
  const Index k = c.rank();
  Eigen::SelfAdjointEigenSolver<Mat> es(c.form().matrix());
  // Eigenvalues ascend: the last k eigenvectors span range(Q).
  const Mat range_basis = es.eigenvectors().rightCols(k);
  const Mat kernel_basis = es.eigenvectors().leftCols(n - k);
  const SymMat ellipsoid(range_basis.transpose() * c.form().matrix() * range_basis);
  return {ellipsoid, range_basis, kernel_basis};
}

PointSplit split_point(const CylinderDecomposition& d, const Vec& x) {
  Vec range_part = d.range_basis * (d.range_basis.transpose() * x);
  Vec kernel_part = x - range_part;
  return {std::move(range_part), std::move(kernel_part)};
}

Cylinder image(const Cylinder& c, const Mat& map) {
  if (map.cols() != c.dim()) {
    throw DimensionError("map has " + std::to_string(map.cols()) + " columns, cylinder dimension is " +
                         std::to_string(c.dim()));
  }
  require_finite(map, "image map");
  const Index m = map.rows();
  if (numerical_rank(map) != m) throw RankError("image requires a full-row-rank map");

  const Mat c_pinv = pinv(map);
  const Mat root = sqrt_psd(c.form()).matrix();
  // N = I - C+ C built from an orthonormal kernel basis, so it is exactly
  // zero when C is invertible instead of a 1e-16 residue that pinv(MN)
  // would blow up.
  const Mat z = null_range_bases(map).null;
  const Mat mn = root * z * z.transpose();
  const double mn_tol = kMapRankTol * std::max(spectral_norm(root), 1.0);
  const Mat inner = Mat::Identity(c.dim(), c.dim()) - mn * pinv(mn, mn_tol);
  const SymMat r(c_pinv.transpose() * root * inner * root * c_pinv);
  // Eigenvalues at roundoff level of ||Q|| ||C+||^2 are exact zeros; judging
  // them relative to ||R|| fails when R itself is only roundoff.
  Eigen::SelfAdjointEigenSolver<Mat> es(r.matrix());
  const double scale = c.form().matrix().norm() * std::pow(spectral_norm(c_pinv), 2);
  Vec lambda = es.eigenvalues();
  for (Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) <= Cylinder::kRelTol * scale) lambda(i) = 0.0;
  }
  return Cylinder(SymMat(es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose()));
}

const char* to_string(ProjectionKind k) {
  switch (k) {
    case ProjectionKind::kWholePlane: return "WHOLE_PLANE";
    case ProjectionKind::kStrip: return "STRIP";
    case ProjectionKind::kEllipse: return "ELLIPSE";
  }
  return "?";
}

ProjectionShape project_to_plane(const Cylinder& c, PlaneAxes axes) {
  const Index n = c.dim();
  if (n < 2) throw InvalidInputError("projection onto a plane needs n >= 2");
  if (axes.first == axes.second || axes.first < 0 || axes.second < 0 || axes.first >= n || axes.second >= n) {
    throw InvalidInputError("invalid projection axes (" + std::to_string(axes.first) + ", " +
                            std::to_string(axes.second) + ") for dimension " + std::to_string(n));
  }
  Mat select = Mat::Zero(2, n);
  select(0, axes.first) = 1.0;
  select(1, axes.second) = 1.0;
  const Cylinder projected = image(c, select);
  ProjectionKind kind = ProjectionKind::kEllipse;
  if (projected.rank() == 0) {
    kind = ProjectionKind::kWholePlane;
  } else if (projected.rank() == 1) {
    kind = ProjectionKind::kStrip;
  }
  return {kind, projected.form()};
}

ProjectionBoundary projection_boundary(const ProjectionShape& shape, int count, double extent,
                                       const Eigen::Vector2d& center) {
  ProjectionBoundary out;
  if (shape.kind == ProjectionKind::kWholePlane || count < 2) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(shape.form.matrix());
  const Eigen::Vector2d lambda = es.eigenvalues();
  const Eigen::Matrix2d vecs = es.eigenvectors();

  if (shape.kind == ProjectionKind::kStrip) {
    const Eigen::Vector2d normal = vecs.col(1);
    const Eigen::Vector2d along = vecs.col(0);
    const double half_width = 1.0 / std::sqrt(lambda(1));
    // Anchor the segments at the projection of `center` onto the strip direction.
    const double t0 = along.dot(center);
    for (double sign : {1.0, -1.0}) {
      std::vector<Eigen::Vector2d> line;
      line.reserve(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) {
        const double t = t0 - extent + 2.0 * extent * i / (count - 1);
        line.emplace_back(sign * half_width * normal + t * along);
      }
      out.curves.push_back(std::move(line));
    }
    return out;
  }

  std::vector<Eigen::Vector2d> curve;
  curve.reserve(static_cast<std::size_t>(count) + 1);
  for (int i = 0; i <= count; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / count;
    const Eigen::Vector2d unit(std::cos(theta) / std::sqrt(lambda(0)), std::sin(theta) / std::sqrt(lambda(1)));
    curve.emplace_back(vecs * unit);
  }
  out.curves.push_back(std::move(curve));
  return out;
}

}  // namespace acyl
