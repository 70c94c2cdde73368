#pragma once

// (k,n)-cylinders: sets {x : x^T Q x <= 1} with Q PSD of rank k. For k = n
// the set is an ellipsoid; otherwise it is an ellipsoid in range(Q) swept
// along the whole of ker(Q).

#include "acyl/linalg.hpp"

namespace acyl {

class Cylinder {
 public:
  /// Relative eigenvalue threshold used for the PSD check, clamping and rank.
  static constexpr double kRelTol = 1e-10;

  /// Validates Q >= 0 (within kRelTol*||Q||), clamps roundoff-negative
  /// eigenvalues and records k = rank(Q).
  Cylinder() = default;
  explicit Cylinder(const SymMat& q);

  const SymMat& form() const noexcept { return q_; }
  Index dim() const noexcept { return q_.dim(); }
  Index rank() const noexcept { return rank_; }
  bool is_ellipsoid() const noexcept { return rank_ == dim(); }

 private:
  SymMat q_;
  Index rank_ = 0;
};

/// Quadratic-form value x^T Q x; the point is inside iff the value is <= 1.
double contains(const Cylinder& c, const Vec& x);

struct CylinderDecomposition {
  SymMat ellipsoid_form;  ///< k x k restriction of Q to range_basis (PD)
  Mat range_basis;        ///< n x k orthonormal basis of range(Q)
  Mat kernel_basis;       ///< n x (n-k) orthonormal basis of ker(Q)
};

CylinderDecomposition decompose(const Cylinder& c);

struct PointSplit {
  Vec range_part;
  Vec kernel_part;
};

/// Orthogonal split x = x_r + x_k along the decomposition.
PointSplit split_point(const CylinderDecomposition& d, const Vec& x);

/// Image {Cx : x in c} for a full-row-rank C:
///   R = C+^T M (I - (MN)(MN)+) M C+,  M = Q^{1/2},  N = I - C+ C.
/// Throws RankError when C is row-rank deficient.
Cylinder image(const Cylinder& c, const Mat& map);

enum class ProjectionKind { kWholePlane, kStrip, kEllipse };

const char* to_string(ProjectionKind k);

struct ProjectionShape {
  ProjectionKind kind;
  SymMat form;  ///< 2x2 form of the projected cylinder
};

/// Zero-based coordinate pair selecting a plane.
struct PlaneAxes {
  Index first = 0;
  Index second = 1;
};

/// Projection onto the coordinate plane (first, second): whole plane, a strip
/// between two parallel lines, or an ellipse, by the rank of the image form.
ProjectionShape project_to_plane(const Cylinder& c, PlaneAxes axes);

/// Boundary of a projection sampled for plotting. For a strip, the two lines
/// n^T u = +/-h are clipped to |t| <= extent along the strip direction; for an
/// ellipse `count` points along the closed curve. Empty for the whole plane.
struct ProjectionBoundary {
  std::vector<std::vector<Eigen::Vector2d>> curves;
};

ProjectionBoundary projection_boundary(const ProjectionShape& shape, int count, double extent,
                                       const Eigen::Vector2d& center = Eigen::Vector2d::Zero());

}  // namespace acyl
