#pragma once

// Small dense semidefinite feasibility / minimization over structured matrix
// decision variables.
//
// Variables (symmetric, rectangular with an optional fixed-zero pattern, or
// scalar) are vectorized into one flat decision vector x. Every expression is
// an AffineExpr: a constant matrix plus one coefficient matrix per scalar
// decision it depends on, so constraints are precompiled into
// G(x) = G0 + sum_i x_i G_i once and never re-traced.
//
// The backend is a primal log-det barrier method:
//   * phase I minimizes a slack s with G_j(x) + s I > 0 for every constraint
//     (started from x = 0 with s large enough), stopping as soon as a centered
//     iterate has s < 0;
//   * phase II follows the central path of t f0(x) - sum_j log det G_j(x)
//     from that point with damped Newton steps.
// A ball ||x|| < radius and a small proximal term are always part of the
// barrier so homogeneous problems stay bounded and the Newton system stays
// nonsingular.
//
// Infeasibility is reported, not certified: kInfeasible means the phase-I
// lower bound s - m/t became positive (no point with the requested margin
// exists inside the ball) and kMaxIter that the iteration cap was hit.

#include "acyl/linalg.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace acyl::lmi {

/// Matrix-valued affine function of the flat decision vector.
class AffineExpr {
 public:
  AffineExpr() = default;
  explicit AffineExpr(Mat constant);

  static AffineExpr zeros(Index rows, Index cols) { return AffineExpr(Mat::Zero(rows, cols)); }
  static AffineExpr identity(Index n) { return AffineExpr(Mat::Identity(n, n)); }
  /// Builds one affine matrix from a grid of blocks; heights must agree along
  /// each block row and widths along each block column. Zero-size blocks are fine.
  static AffineExpr block(const std::vector<std::vector<AffineExpr>>& rows);

  Index rows() const noexcept { return constant_.rows(); }
  Index cols() const noexcept { return constant_.cols(); }
  const Mat& constant() const noexcept { return constant_; }
  const std::map<Index, Mat>& terms() const noexcept { return terms_; }

  Mat evaluate(const Vec& x) const;
  AffineExpr transpose() const;

  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double s);

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
  friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
  friend AffineExpr operator*(AffineExpr a, double s) { return a *= s; }
  friend AffineExpr operator*(const Mat& left, const AffineExpr& a);
  friend AffineExpr operator*(const AffineExpr& a, const Mat& right);
  friend AffineExpr operator+(AffineExpr a, const Mat& b) { return a += AffineExpr(b); }
  friend AffineExpr operator-(AffineExpr a, const Mat& b) { return a -= AffineExpr(b); }

 private:
  friend class LmiProblem;
  friend AffineExpr trace(const AffineExpr& e);
  friend AffineExpr scaled(const AffineExpr& s, const Mat& m);

  void add_term(Index index, const Mat& coeff);

  Mat constant_;
  std::map<Index, Mat> terms_;
};

/// E + E^T.
AffineExpr plus_transpose(const AffineExpr& e);
/// 1x1 expression trace(E).
AffineExpr trace(const AffineExpr& e);
/// A 1x1 expression times a constant matrix of any shape.
AffineExpr scaled(const AffineExpr& s, const Mat& m);

enum class Sense { kNegativeDefinite, kPositiveDefinite, kPositiveSemidefinite };

enum class VariableShape { kSymmetric, kRectangular, kScalar };

struct VariableInfo {
  std::string name;
  VariableShape shape;
  Index rows = 0;
  Index cols = 0;
  /// (row, col) of each scalar decision, in decision order; symmetric
  /// variables list the upper triangle only.
  std::vector<std::pair<Index, Index>> entries;
  Index offset = 0;
};

struct Constraint {
  AffineExpr expr;
  Sense sense;
  double margin;
  std::string label;
};

class LmiProblem {
 public:
  /// Default strictness: 1e-6 * (1 + ||constant block||).
  static constexpr double kDefaultRelativeMargin = 1e-6;

  AffineExpr add_symmetric(const std::string& name, Index dim);
  /// `free_pattern` (optional, same shape) marks free entries with nonzeros;
  /// the remaining entries are fixed at zero.
  AffineExpr add_rectangular(const std::string& name, Index rows, Index cols,
                             const std::optional<Mat>& free_pattern = std::nullopt);
  AffineExpr add_scalar(const std::string& name);

  /// Adds expr < 0, expr > 0 or expr >= 0. For strict senses the default
  /// margin is applied when none is given; semidefinite constraints default to 0.
  void add_constraint(const AffineExpr& expr, Sense sense, std::optional<double> margin = std::nullopt,
                      std::string label = {});

  Index num_decisions() const noexcept { return num_decisions_; }
  const std::vector<VariableInfo>& variables() const noexcept { return variables_; }
  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }

  const VariableInfo& variable(const std::string& name) const;
  /// Reassembles a named variable from a decision vector.
  Mat value(const std::string& name, const Vec& x) const;

 private:
  const VariableInfo& register_variable(VariableInfo info);

  std::vector<VariableInfo> variables_;
  std::vector<Constraint> constraints_;
  Index num_decisions_ = 0;
};

enum class Status { kFeasible, kInfeasible, kMaxIter };

const char* to_string(Status s);

struct SolverOptions {
  int max_iterations = 200;    ///< outer (centering) iterations, both phases together
  int max_newton_steps = 100;  ///< per centering
  double gap_tol = 1e-8;       ///< stop when m/t <= gap_tol * (1 + |objective|)
  double radius = 1e6;         ///< ball bound on the decision vector
  double barrier_growth = 10.0;
  /// Weight of (1/2)||x||^2 added to the barrier (not scaled by t). It gives
  /// homogeneous directions curvature, so phase I returns moderate points;
  /// its influence vanishes along the central path like the ball term.
  double proximal_weight = 1.0;
  /// Keep driving the phase-I slack down after it turns negative (maximizes
  /// the uniform margin instead of stopping at the first strictly feasible point).
  bool maximize_margin = false;
  double unbounded_threshold = -1e12;
};

struct LmiSolution {
  Status status = Status::kMaxIter;
  Vec x;
  std::map<std::string, Mat> assignment;
  /// max over constraints of (margin - lambda_min(signed expr)); <= 0 means
  /// every constraint holds with its margin.
  double worst_margin = 0.0;
  double objective = 0.0;
  int outer_iterations = 0;
  int newton_steps = 0;
  /// Objective after every phase-II centering (nonincreasing).
  std::vector<double> objective_history;

  const Mat& at(const std::string& name) const;
  double scalar(const std::string& name) const { return at(name)(0, 0); }
  bool feasible() const noexcept { return status == Status::kFeasible; }
};

double worst_margin(const LmiProblem& problem, const Vec& x);

LmiSolution solve_feasibility(const LmiProblem& problem, const SolverOptions& options = {});

/// Minimizes a 1x1 affine objective over the constraints.
LmiSolution minimize(const LmiProblem& problem, const AffineExpr& objective, const SolverOptions& options = {});

/// Maximizes log det of a symmetric affine expression (which must also be
/// kept positive definite by the constraints).
LmiSolution maximize_log_det(const LmiProblem& problem, const AffineExpr& expr, const SolverOptions& options = {});

}  // namespace acyl::lmi
