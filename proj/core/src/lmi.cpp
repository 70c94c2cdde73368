#include "acyl/lmi.hpp"

#include "acyl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace acyl::lmi {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kNewtonDecrementTol = 1e-12;
constexpr double kArmijo = 0.25;
constexpr int kMaxHalvings = 80;

void require_same_shape(const AffineExpr& a, const AffineExpr& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string("affine expression shape mismatch in ") + op + ": " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

// G(z) = base + sum_i z_i coeff_i, symmetric; the barrier keeps G > 0.
struct CompiledBlock {
  Mat base;
  std::vector<std::pair<Index, Mat>> coeffs;

  Index dim() const { return base.rows(); }

  Mat evaluate(const Vec& z) const {
    Mat g = base;
    for (const auto& [i, c] : coeffs) g.noalias() += z(i) * c;
    return g;
  }
};

Mat symmetrized(const Mat& m, const std::string& label) {
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw InvalidInputError("constraint '" + label + "' is not symmetric");
  }
  return 0.5 * (m + m.transpose());
}

double sense_sign(Sense s) { return s == Sense::kNegativeDefinite ? -1.0 : 1.0; }

CompiledBlock compile(const Constraint& c, std::optional<Index> slack_index) {
  const Index n = c.expr.rows();
  CompiledBlock b;
  const double sign = sense_sign(c.sense);
  b.base = sign * symmetrized(c.expr.constant(), c.label) - c.margin * Mat::Identity(n, n);
  for (const auto& [i, coeff] : c.expr.terms()) {
    Mat sc = sign * symmetrized(coeff, c.label);
    if (sc.cwiseAbs().maxCoeff() == 0.0) continue;
    b.coeffs.emplace_back(i, std::move(sc));
  }
  if (slack_index) b.coeffs.emplace_back(*slack_index, Mat::Identity(n, n));
  return b;
}

CompiledBlock compile_objective_logdet(const AffineExpr& e) {
  CompiledBlock b;
  b.base = symmetrized(e.constant(), "log det objective");
  for (const auto& [i, coeff] : e.terms()) b.coeffs.emplace_back(i, symmetrized(coeff, "log det objective"));
  return b;
}

// t * (c^T z - sum log det E_l(z)) - sum log det G_b(z) - log(R^2 - ||x||^2)
//   + (proximal / 2) ||x||^2, where x is the leading `ball_dims` entries of z.
class BarrierFunction {
 public:
  std::vector<CompiledBlock> blocks;
  std::vector<CompiledBlock> logdet_objective;
  Vec linear;
  Index ball_dims = 0;
  double radius = 1e6;
  double proximal = 0.0;

  Index size() const { return linear.size(); }

  double barrier_parameter() const {
    double m = 1.0;
    for (const auto& b : blocks) m += static_cast<double>(b.dim());
    return m;
  }

  double objective(const Vec& z) const {
    double f = linear.dot(z);
    for (const auto& e : logdet_objective) {
      const auto ld = log_det(e, z);
      f -= ld.value_or(-std::numeric_limits<double>::infinity());
    }
    return f;
  }

  std::optional<double> value(const Vec& z, double t) const {
    const double slack = radius * radius - z.head(ball_dims).squaredNorm();
    if (!(slack > 0.0)) return std::nullopt;
    double v = -std::log(slack) + t * linear.dot(z) + 0.5 * proximal * z.head(ball_dims).squaredNorm();
    for (const auto& b : blocks) {
      const auto ld = log_det(b, z);
      if (!ld) return std::nullopt;
      v -= *ld;
    }
    for (const auto& e : logdet_objective) {
      const auto ld = log_det(e, z);
      if (!ld) return std::nullopt;
      v -= t * *ld;
    }
    return v;
  }

  // Gradient and Hessian; z must be in the domain.
  void derivatives(const Vec& z, double t, Vec& grad, Mat& hess) const {
    const Index n = size();
    grad = t * linear;
    hess = Mat::Zero(n, n);
    const Vec x = z.head(ball_dims);
    const double slack = radius * radius - x.squaredNorm();
    grad.head(ball_dims) += 2.0 * x / slack + proximal * x;
    hess.topLeftCorner(ball_dims, ball_dims) += (2.0 / slack + proximal) * Mat::Identity(ball_dims, ball_dims);
    hess.topLeftCorner(ball_dims, ball_dims) += (4.0 / (slack * slack)) * x * x.transpose();
    for (const auto& b : blocks) accumulate(b, z, 1.0, grad, hess);
    for (const auto& e : logdet_objective) accumulate(e, z, t, grad, hess);
  }

 private:
  static std::optional<double> log_det(const CompiledBlock& b, const Vec& z) {
    if (b.dim() == 0) return 0.0;
    Eigen::LLT<Mat> llt(b.evaluate(z));
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Vec diag = llt.matrixLLT().diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) return std::nullopt;
    return 2.0 * diag.array().log().sum();
  }

  static void accumulate(const CompiledBlock& b, const Vec& z, double weight, Vec& grad, Mat& hess) {
    if (b.dim() == 0 || b.coeffs.empty()) return;
    Eigen::LLT<Mat> llt(b.evaluate(z));
    const auto lower = llt.matrixL();
    std::vector<Mat> scaled;
    scaled.reserve(b.coeffs.size());
    for (const auto& [i, c] : b.coeffs) {
      const Mat half = lower.solve(c);
      scaled.push_back(lower.solve(half.transpose()));
    }
    for (std::size_t a = 0; a < b.coeffs.size(); ++a) {
      const Index ia = b.coeffs[a].first;
      grad(ia) -= weight * scaled[a].trace();
      for (std::size_t c = a; c < b.coeffs.size(); ++c) {
        const Index ic = b.coeffs[c].first;
        const double h = weight * scaled[a].cwiseProduct(scaled[c]).sum();
        hess(ia, ic) += h;
        if (c != a) hess(ic, ia) += h;
      }
    }
  }
};

// Near the boundary the Hessian diagonal spans many orders of magnitude and a
// plain LDLT can return a non-descent direction. Jacobi scaling plus Cholesky
// with a growing ridge always yields descent, or an empty vector on failure.
Vec newton_direction(const Mat& hess, const Vec& grad) {
  const Index n = hess.rows();
  Vec s(n);
  for (Index i = 0; i < n; ++i) {
    const double d = hess(i, i);
    s(i) = (d > 0.0 && std::isfinite(d)) ? 1.0 / std::sqrt(d) : 1.0;
  }
  const Mat scaled = s.asDiagonal() * hess * s.asDiagonal();
  const Vec g = s.cwiseProduct(grad);
  double ridge = 0.0;
  for (int attempt = 0; attempt < 30; ++attempt) {
    Eigen::LLT<Mat> llt(scaled + ridge * Mat::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      const Vec dz = -s.cwiseProduct(llt.solve(g));
      if (dz.allFinite() && grad.dot(dz) < 0.0) return dz;
    }
    ridge = ridge == 0.0 ? 1e-14 : ridge * 10.0;
  }
  return {};
}

// Damped Newton centering. Returns the number of Newton steps taken. When
// `stop_below` is set, returns as soon as z(stop_below->first) drops below
// stop_below->second.
int center(const BarrierFunction& f, Vec& z, double t, int max_steps,
           std::optional<std::pair<Index, double>> stop_below = std::nullopt) {
  Vec grad;
  Mat hess;
  int steps = 0;
  for (; steps < max_steps; ++steps) {
    if (stop_below && z(stop_below->first) < stop_below->second) break;
    f.derivatives(z, t, grad, hess);
    const Vec dz = newton_direction(hess, grad);
    if (dz.size() == 0) break;
    const double decrement = -grad.dot(dz);
    if (decrement <= 0.0 || 0.5 * decrement <= kNewtonDecrementTol) break;

    const double current = *f.value(z, t);
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      const auto trial = f.value(z + step * dz, t);
      if (trial && *trial <= current - kArmijo * step * decrement) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    z += step * dz;
  }
  return steps;
}

std::vector<CompiledBlock> compile_all(const LmiProblem& problem, std::optional<Index> slack) {
  std::vector<CompiledBlock> blocks;
  blocks.reserve(problem.constraints().size());
  for (const auto& c : problem.constraints()) blocks.push_back(compile(c, slack));
  return blocks;
}

void fill_assignment(const LmiProblem& problem, LmiSolution& sol) {
  for (const auto& v : problem.variables()) sol.assignment[v.name] = problem.value(v.name, sol.x);
  sol.worst_margin = worst_margin(problem, sol.x);
}

struct PhaseOneResult {
  Status status = Status::kMaxIter;
  Vec x;
  int outer = 0;
  int newton = 0;
};

PhaseOneResult phase_one_pass(const LmiProblem& problem, const SolverOptions& options, double proximal) {
  const Index p = problem.num_decisions();
  PhaseOneResult out;
  out.x = Vec::Zero(p);

  // Worst violation at the origin.
  const auto plain = compile_all(problem, std::nullopt);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& b : plain) {
    if (b.dim() == 0) continue;
    worst = std::max(worst, -min_eigenvalue(SymMat(b.base)));
  }
  if (worst < 0.0 && !options.maximize_margin) {
    out.status = Status::kFeasible;
    return out;
  }

  BarrierFunction f;
  f.blocks = compile_all(problem, p);
  f.linear = Vec::Zero(p + 1);
  f.linear(p) = 1.0;
  f.ball_dims = p;
  f.radius = options.radius;
  f.proximal = proximal;

  Vec z = Vec::Zero(p + 1);
  const double s0 = std::max(worst, 0.0) + 1.0;
  z(p) = s0;
  const double m = f.barrier_parameter();
  double t = m / (1.0 + std::abs(s0));

  std::optional<std::pair<Index, double>> early;
  if (!options.maximize_margin) early = std::make_pair(p, 0.0);
  while (out.outer < options.max_iterations) {
    out.newton += center(f, z, t, options.max_newton_steps, early);
    ++out.outer;
    const double s = z(p);
    const double gap = m / t;
    if (s < 0.0 && !options.maximize_margin) {
      out.status = Status::kFeasible;
      break;
    }
    if (proximal == 0.0 && s - gap > 0.0) {
      out.status = Status::kInfeasible;
      break;
    }
    if (gap <= options.gap_tol * (1.0 + std::abs(s))) {
      out.status = s < 0.0 ? Status::kFeasible : Status::kInfeasible;
      break;
    }
    t *= options.barrier_growth;
  }
  out.x = z.head(p);
  return out;
}

// The proximal term only steers toward small points. The lower bound
// s - m/t does not hold with it, so that pass runs until the gap closes and
// any failure is confirmed by a pass without it.
PhaseOneResult phase_one(const LmiProblem& problem, const SolverOptions& options) {
  PhaseOneResult first = phase_one_pass(problem, options, options.proximal_weight);
  if (first.status == Status::kFeasible || options.proximal_weight == 0.0) return first;
  PhaseOneResult second = phase_one_pass(problem, options, 0.0);
  second.outer += first.outer;
  second.newton += first.newton;
  return second;
}

LmiSolution optimize(const LmiProblem& problem, const Vec& linear, const std::vector<CompiledBlock>& logdet,
                     const SolverOptions& options) {
  if (problem.constraints().empty()) throw InvalidInputError("LMI problem has no constraints");
  LmiSolution sol;
  PhaseOneResult start = phase_one(problem, options);
  sol.outer_iterations = start.outer;
  sol.newton_steps = start.newton;
  sol.x = start.x;
  if (start.status != Status::kFeasible) {
    sol.status = start.status;
    fill_assignment(problem, sol);
    return sol;
  }

  BarrierFunction f;
  f.blocks = compile_all(problem, std::nullopt);
  f.logdet_objective = logdet;
  f.linear = linear;
  f.ball_dims = problem.num_decisions();
  f.radius = options.radius;
  f.proximal = options.proximal_weight;

  Vec z = start.x;
  if (!f.value(z, 1.0)) {
    // The log det objective must be defined at the phase-I point.
    throw InvalidInputError("log det objective is not positive definite at the feasible start");
  }
  const double m = f.barrier_parameter();
  double t = m / (1.0 + std::abs(f.objective(z)));
  sol.status = Status::kMaxIter;
  // Late iterates can sit on a semidefinite boundary to roundoff; fall back
  // to the last one that still meets every margin.
  Vec last_ok = z;
  while (sol.outer_iterations < options.max_iterations) {
    sol.newton_steps += center(f, z, t, options.max_newton_steps);
    ++sol.outer_iterations;
    const double obj = f.objective(z);
    sol.objective_history.push_back(obj);
    if (obj < options.unbounded_threshold) {
      throw UnboundedError("objective decreased past " + std::to_string(options.unbounded_threshold));
    }
    if (worst_margin(problem, z) <= 0.0) last_ok = z;
    if (m / t <= options.gap_tol * (1.0 + std::abs(obj))) {
      sol.status = Status::kFeasible;
      break;
    }
    t *= options.barrier_growth;
  }
  if (worst_margin(problem, z) > 0.0) z = last_ok;
  sol.x = z;
  sol.objective = f.objective(z);
  fill_assignment(problem, sol);
  if (sol.status == Status::kFeasible && sol.worst_margin > 0.0) sol.status = Status::kMaxIter;
  return sol;
}

}  // namespace

// ---------------------------------------------------------------------------
// AffineExpr

AffineExpr::AffineExpr(Mat constant) : constant_(std::move(constant)) {
  require_finite(constant_, "affine constant");
}

void AffineExpr::add_term(Index index, const Mat& coeff) {
  auto it = terms_.find(index);
  if (it == terms_.end()) {
    terms_.emplace(index, coeff);
  } else {
    it->second += coeff;
  }
}

AffineExpr AffineExpr::block(const std::vector<std::vector<AffineExpr>>& grid) {
  if (grid.empty()) return AffineExpr(Mat(0, 0));
  const std::size_t ncols = grid.front().size();
  std::vector<Index> heights(grid.size(), 0);
  std::vector<Index> widths(ncols, 0);
  for (std::size_t r = 0; r < grid.size(); ++r) {
    if (grid[r].size() != ncols) throw DimensionError("block rows have different numbers of blocks");
    heights[r] = grid[r][0].rows();
    for (std::size_t c = 0; c < ncols; ++c) {
      if (grid[r][c].rows() != heights[r]) throw DimensionError("block heights differ within a block row");
      if (r == 0) {
        widths[c] = grid[0][c].cols();
      } else if (grid[r][c].cols() != widths[c]) {
        throw DimensionError("block widths differ within a block column");
      }
    }
  }
  Index total_rows = 0;
  Index total_cols = 0;
  for (Index h : heights) total_rows += h;
  for (Index w : widths) total_cols += w;

  AffineExpr out(Mat::Zero(total_rows, total_cols));
  Index r0 = 0;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    Index c0 = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      const AffineExpr& b = grid[r][c];
      out.constant_.block(r0, c0, b.rows(), b.cols()) = b.constant_;
      for (const auto& [i, coeff] : b.terms_) {
        Mat placed = Mat::Zero(total_rows, total_cols);
        placed.block(r0, c0, b.rows(), b.cols()) = coeff;
        out.add_term(i, placed);
      }
      c0 += widths[c];
    }
    r0 += heights[r];
  }
  return out;
}

Mat AffineExpr::evaluate(const Vec& x) const {
  Mat out = constant_;
  for (const auto& [i, coeff] : terms_) {
    if (i >= x.size()) throw DimensionError("decision vector is too short for the expression");
    out.noalias() += x(i) * coeff;
  }
  return out;
}

AffineExpr AffineExpr::transpose() const {
  AffineExpr out(Mat(constant_.transpose()));
  for (const auto& [i, coeff] : terms_) out.terms_.emplace(i, coeff.transpose());
  return out;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  require_same_shape(*this, other, "+");
  constant_ += other.constant_;
  for (const auto& [i, coeff] : other.terms_) add_term(i, coeff);
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
  require_same_shape(*this, other, "-");
  constant_ -= other.constant_;
  for (const auto& [i, coeff] : other.terms_) add_term(i, -coeff);
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& [i, coeff] : terms_) coeff *= s;
  return *this;
}

AffineExpr operator*(const Mat& left, const AffineExpr& a) {
  if (left.cols() != a.rows()) throw DimensionError("matrix * expression: inner dimensions differ");
  AffineExpr out(Mat(left * a.constant_));
  for (const auto& [i, coeff] : a.terms_) out.terms_.emplace(i, left * coeff);
  return out;
}

AffineExpr operator*(const AffineExpr& a, const Mat& right) {
  if (a.cols() != right.rows()) throw DimensionError("expression * matrix: inner dimensions differ");
  AffineExpr out(Mat(a.constant_ * right));
  for (const auto& [i, coeff] : a.terms_) out.terms_.emplace(i, coeff * right);
  return out;
}

AffineExpr plus_transpose(const AffineExpr& e) { return e + e.transpose(); }

AffineExpr trace(const AffineExpr& e) {
  if (e.rows() != e.cols()) throw DimensionError("trace of a non-square expression");
  AffineExpr out(Mat::Constant(1, 1, e.constant().trace()));
  for (const auto& [i, coeff] : e.terms()) out.terms_.emplace(i, Mat::Constant(1, 1, coeff.trace()));
  return out;
}

AffineExpr scaled(const AffineExpr& s, const Mat& m) {
  if (s.rows() != 1 || s.cols() != 1) throw DimensionError("scaled() needs a 1x1 expression");
  AffineExpr out(s.constant_(0, 0) * m);
  for (const auto& [i, coeff] : s.terms_) out.terms_.emplace(i, coeff(0, 0) * m);
  return out;
}

// ---------------------------------------------------------------------------
// LmiProblem

const VariableInfo& LmiProblem::register_variable(VariableInfo info) {
  for (const auto& v : variables_) {
    if (v.name == info.name) throw InvalidInputError("duplicate LMI variable name '" + info.name + "'");
  }
  info.offset = num_decisions_;
  num_decisions_ += static_cast<Index>(info.entries.size());
  variables_.push_back(std::move(info));
  return variables_.back();
}

AffineExpr LmiProblem::add_symmetric(const std::string& name, Index dim) {
  if (dim <= 0) throw InvalidInputError("symmetric variable '" + name + "' needs a positive dimension");
  VariableInfo info{name, VariableShape::kSymmetric, dim, dim, {}, 0};
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i <= j; ++i) info.entries.emplace_back(i, j);
  }
  const VariableInfo& v = register_variable(std::move(info));
  AffineExpr out = AffineExpr::zeros(dim, dim);
  for (std::size_t k = 0; k < v.entries.size(); ++k) {
    const auto [i, j] = v.entries[k];
    Mat basis = Mat::Zero(dim, dim);
    basis(i, j) = 1.0;
    basis(j, i) = 1.0;
    out.terms_.emplace(v.offset + static_cast<Index>(k), std::move(basis));
  }
  return out;
}

AffineExpr LmiProblem::add_rectangular(const std::string& name, Index rows, Index cols,
                                       const std::optional<Mat>& free_pattern) {
  if (rows < 0 || cols < 0) throw InvalidInputError("rectangular variable '" + name + "' has negative size");
  if (free_pattern && (free_pattern->rows() != rows || free_pattern->cols() != cols)) {
    throw DimensionError("free pattern of '" + name + "' has the wrong shape");
  }
  VariableInfo info{name, VariableShape::kRectangular, rows, cols, {}, 0};
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (!free_pattern || (*free_pattern)(i, j) != 0.0) info.entries.emplace_back(i, j);
    }
  }
  const VariableInfo& v = register_variable(std::move(info));
  AffineExpr out = AffineExpr::zeros(rows, cols);
  for (std::size_t k = 0; k < v.entries.size(); ++k) {
    Mat basis = Mat::Zero(rows, cols);
    basis(v.entries[k].first, v.entries[k].second) = 1.0;
    out.terms_.emplace(v.offset + static_cast<Index>(k), std::move(basis));
  }
  return out;
}

AffineExpr LmiProblem::add_scalar(const std::string& name) {
  VariableInfo info{name, VariableShape::kScalar, 1, 1, {{0, 0}}, 0};
  const VariableInfo& v = register_variable(std::move(info));
  AffineExpr out = AffineExpr::zeros(1, 1);
  out.terms_.emplace(v.offset, Mat::Ones(1, 1));
  return out;
}

void LmiProblem::add_constraint(const AffineExpr& expr, Sense sense, std::optional<double> margin,
                                std::string label) {
  if (expr.rows() != expr.cols()) throw DimensionError("LMI constraint '" + label + "' is not square");
  double m = 0.0;
  if (margin) {
    if (*margin < 0.0) throw InvalidInputError("constraint margin must be non-negative");
    m = *margin;
  } else if (sense != Sense::kPositiveSemidefinite) {
    m = kDefaultRelativeMargin * (1.0 + spectral_norm(expr.constant()));
  }
  if (label.empty()) label = "c" + std::to_string(constraints_.size());
  constraints_.push_back({expr, sense, m, std::move(label)});
}

const VariableInfo& LmiProblem::variable(const std::string& name) const {
  for (const auto& v : variables_) {
    if (v.name == name) return v;
  }
  throw InvalidInputError("unknown LMI variable '" + name + "'");
}

Mat LmiProblem::value(const std::string& name, const Vec& x) const {
  const VariableInfo& v = variable(name);
  Mat out = Mat::Zero(v.rows, v.cols);
  for (std::size_t k = 0; k < v.entries.size(); ++k) {
    const auto [i, j] = v.entries[k];
    const double val = x(v.offset + static_cast<Index>(k));
    out(i, j) = val;
    if (v.shape == VariableShape::kSymmetric) out(j, i) = val;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solvers

const char* to_string(Status s) {
  switch (s) {
    case Status::kFeasible: return "FEASIBLE";
    case Status::kInfeasible: return "INFEASIBLE";
    case Status::kMaxIter: return "MAX_ITER";
  }
  return "?";
}

const Mat& LmiSolution::at(const std::string& name) const {
  const auto it = assignment.find(name);
  if (it == assignment.end()) throw InvalidInputError("solution has no variable '" + name + "'");
  return it->second;
}

double worst_margin(const LmiProblem& problem, const Vec& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : problem.constraints()) {
    if (c.expr.rows() == 0) continue;
    const Mat value = sense_sign(c.sense) * c.expr.evaluate(x);
    worst = std::max(worst, c.margin - min_eigenvalue(SymMat(value)));
  }
  return worst;
}

LmiSolution solve_feasibility(const LmiProblem& problem, const SolverOptions& options) {
  if (problem.constraints().empty()) throw InvalidInputError("LMI problem has no constraints");
  const PhaseOneResult r = phase_one(problem, options);
  LmiSolution sol;
  sol.status = r.status;
  sol.x = r.x;
  sol.outer_iterations = r.outer;
  sol.newton_steps = r.newton;
  fill_assignment(problem, sol);
  if (sol.status == Status::kFeasible && sol.worst_margin > 0.0) sol.status = Status::kMaxIter;
  return sol;
}

LmiSolution minimize(const LmiProblem& problem, const AffineExpr& objective, const SolverOptions& options) {
  if (objective.rows() != 1 || objective.cols() != 1) throw DimensionError("objective must be 1x1");
  Vec linear = Vec::Zero(problem.num_decisions());
  for (const auto& [i, coeff] : objective.terms()) {
    if (i >= linear.size()) throw DimensionError("objective references an unknown decision");
    linear(i) = coeff(0, 0);
  }
  LmiSolution sol = optimize(problem, linear, {}, options);
  for (double& v : sol.objective_history) v += objective.constant()(0, 0);
  sol.objective += objective.constant()(0, 0);
  return sol;
}

LmiSolution maximize_log_det(const LmiProblem& problem, const AffineExpr& expr, const SolverOptions& options) {
  if (expr.rows() != expr.cols() || expr.rows() == 0) throw DimensionError("log det needs a square expression");
  for (const auto& [i, coeff] : expr.terms()) {
    if (i >= problem.num_decisions()) throw DimensionError("log det expression references an unknown decision");
  }
  LmiSolution sol = optimize(problem, Vec::Zero(problem.num_decisions()), {compile_objective_logdet(expr)}, options);
  // Report log det itself (the minimized quantity is its negative).
  for (double& v : sol.objective_history) v = -v;
  sol.objective = -sol.objective;
  return sol;
}

}  // namespace acyl::lmi
