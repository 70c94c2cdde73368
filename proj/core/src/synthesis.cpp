#include "acyl/synthesis.hpp"

#include "acyl/errors.hpp"
#include "acyl/matrix_equations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace acyl {

namespace {

void expect_shape(const Mat& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << name << " must be " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    throw DimensionError(msg.str());
  }
  require_finite(m, name);
}

double rel(const Mat& diff, const Mat& ref) { return spectral_norm(diff) / (1.0 + spectral_norm(ref)); }

double log_det_of(const Mat& p) {
  Eigen::LLT<Mat> llt(p);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

bool is_identity(const Mat& m) { return m.rows() == m.cols() && (m - Mat::Identity(m.rows(), m.cols())).norm() <= 1e-12; }

// [P H1 + H1^T P + alpha P, P H2; H2^T P, -alpha G] as an affine expression of P.
lmi::AffineExpr base_block(const HMatrices& h, const SymMat& g, const lmi::AffineExpr& p, double alpha) {
  const lmi::AffineExpr top_right = p * h.H2;
  return lmi::AffineExpr::block({
      {p * h.H1 + h.H1.transpose() * p + alpha * p, top_right},
      {top_right.transpose(), lmi::AffineExpr(-alpha * g.matrix())},
  });
}

// [H1 Q + Q H1^T + alpha Q - mu1 H3 H3^T, H2; H2^T, -alpha G].
lmi::AffineExpr dual_block(const HMatrices& h, const SymMat& g, const lmi::AffineExpr& q, const lmi::AffineExpr& mu1,
                           double alpha) {
  const lmi::AffineExpr mu_term = lmi::scaled(mu1, h.H3 * h.H3.transpose());
  return lmi::AffineExpr::block({
      {h.H1 * q + q * h.H1.transpose() + alpha * q - mu_term, lmi::AffineExpr(h.H2)},
      {lmi::AffineExpr(h.H2.transpose()), lmi::AffineExpr(-alpha * g.matrix())},
  });
}

struct PairProblem {
  lmi::LmiProblem problem;
  lmi::AffineExpr p, q, mu1, mu2;
};

PairProblem make_pair_problem(const HMatrices& h, const SymMat& g, double alpha) {
  const Index k = h.H1.rows();
  PairProblem pp;
  pp.p = pp.problem.add_symmetric("P", k);
  pp.q = pp.problem.add_symmetric("Q", k);
  pp.mu1 = pp.problem.add_scalar("mu1");
  pp.mu2 = pp.problem.add_scalar("mu2");
  Mat w(h.H4.rows(), h.H4.cols() + h.H5.cols());
  w << h.H4, h.H5;
  const Mat wtw = w.transpose() * w;
  pp.problem.add_constraint(dual_block(h, g, pp.q, pp.mu1, alpha), lmi::Sense::kNegativeDefinite, std::nullopt,
                            "Q inequality");
  pp.problem.add_constraint(base_block(h, g, pp.p, alpha) - lmi::scaled(pp.mu2, wtw), lmi::Sense::kNegativeDefinite,
                            std::nullopt, "P inequality");
  pp.problem.add_constraint(pp.p, lmi::Sense::kPositiveDefinite, std::nullopt, "P > 0");
  pp.problem.add_constraint(pp.q, lmi::Sense::kPositiveDefinite, std::nullopt, "Q > 0");
  return pp;
}

}  // namespace

void PlantModel::validate() const {
  const Index a = A1.rows();
  expect_shape(A1, a, a, "A1");
  expect_shape(B1, a, b1(), "B1");
  expect_shape(C1, a, c1(), "C1");
  expect_shape(D1, b2(), a, "D1");
  expect_shape(E1, b2(), b1(), "E1");
  expect_shape(F1, b2(), c1(), "F1");
}

void ReferenceModel::validate() const {
  const Index a = A2.rows();
  expect_shape(A2, a, a, "A2");
  expect_shape(C2, a, c2(), "C2");
  expect_shape(D2, g(), a, "D2");
}

void SynthesisProblem::validate() const {
  plant.validate();
  reference.validate();
  if (a3 < 0) throw InvalidInputError("controller order must be non-negative");
  const Index k = K1.rows();
  expect_shape(K1, k, plant.a1(), "K1");
  expect_shape(K2, k, reference.a2(), "K2");
  expect_shape(K3, k, a3, "K3");
  if (k == 0) throw DimensionError("target matrix K has no rows");
  const Index m = plant.c1() + reference.c2();
  if (G.dim() != m) {
    throw DimensionError("G must be " + std::to_string(m) + "x" + std::to_string(m) + " (bound on (w, h))");
  }
  if (m > 0 && definiteness(G).kind != Definiteness::kPositiveDefinite) {
    throw NotPsdError("disturbance bound G must be positive definite");
  }
  const Index r = numerical_rank(K());
  if (r != k) {
    throw RankError("rank [K1 K2 K3] = " + std::to_string(r) + " < " + std::to_string(k) +
                    " rows; drop linearly dependent rows of K");
  }
}

Mat SynthesisProblem::K() const {
  Mat k(K1.rows(), K1.cols() + K2.cols() + K3.cols());
  k << K1, K2, K3;
  return k;
}

Mat ControllerParams::X() const {
  const Index a3 = A3.rows();
  const Index b1 = D3.rows();
  const Index b2 = B3.cols();
  const Index g = C3.cols();
  Mat x(a3 + b1, a3 + b2 + g);
  x << A3, B3, C3, D3, E3, F3;
  return x;
}

ControllerParams ControllerParams::from_X(const Mat& x, Index a3, Index b1, Index b2, Index g) {
  if (x.rows() != a3 + b1 || x.cols() != a3 + b2 + g) throw DimensionError("controller matrix X has the wrong shape");
  ControllerParams c;
  c.A3 = x.block(0, 0, a3, a3);
  c.B3 = x.block(0, a3, a3, b2);
  c.C3 = x.block(0, a3 + b2, a3, g);
  c.D3 = x.block(a3, 0, b1, a3);
  c.E3 = x.block(a3, a3, b1, b2);
  c.F3 = x.block(a3, a3 + b2, b1, g);
  return c;
}

bool ControllerParams::effectively_static(double tol) const {
  return spectral_norm(A3) < tol && spectral_norm(B3) < tol && spectral_norm(C3) < tol && spectral_norm(D3) < tol;
}

AssembledSystem assemble(const SynthesisProblem& problem) {
  problem.validate();
  const PlantModel& pl = problem.plant;
  const ReferenceModel& rf = problem.reference;
  const Index a1 = pl.a1(), a2 = rf.a2(), a3 = problem.a3;
  const Index b1 = pl.b1(), b2 = pl.b2(), c1 = pl.c1(), c2 = rf.c2(), g = rf.g();
  const Index n = a1 + a2 + a3;

  AssembledSystem s;
  s.A = block_diagonal({pl.A1, rf.A2, Mat::Zero(a3, a3)});

  s.B = Mat::Zero(n, a3 + b1);
  s.B.block(0, a3, a1, b1) = pl.B1;
  s.B.block(a1 + a2, 0, a3, a3) = Mat::Identity(a3, a3);

  s.C = Mat::Zero(n, c1 + c2);
  s.C.block(0, 0, a1, c1) = pl.C1;
  s.C.block(a1, c1, a2, c2) = rf.C2;

  s.D = Mat::Zero(a3 + b2 + g, n);
  s.D.block(0, a1 + a2, a3, a3) = Mat::Identity(a3, a3);
  s.D.block(a3, 0, b2, a1) = pl.D1;
  s.D.block(a3 + b2, a1, g, a2) = rf.D2;

  s.F = Mat::Zero(a3 + b2 + g, c1 + c2);
  s.F.block(a3, 0, b2, c1) = pl.F1;

  s.K = problem.K();
  return s;
}

HMatrices build_H(const AssembledSystem& s, double rank_tol) {
  const Index n = s.n();
  const Mat kp = pinv(s.K, rank_tol);
  const Mat kb = s.K * s.B;
  const Mat kb_pinv = pinv(kb, rank_tol);
  const Mat ka = s.K * s.A;
  const Mat w = pinv(s.D * (kp * s.K - Mat::Identity(n, n)), rank_tol);
  const Mat lead = kb * kb_pinv * ka * w;

  HMatrices h;
  h.H1 = ka * kp + lead * s.D * kp;
  h.H2 = s.K * s.C + lead * s.F;
  h.H3 = kb;
  h.H4 = s.D * kp + s.D * w * s.D * kp;
  h.H5 = s.F + s.D * w * s.F;
  return h;
}

SolvabilityCheck check_solvability(const AssembledSystem& s, double rank_tol) {
  const Index n = s.n();
  const Mat comp = Mat::Identity(n, n) - pinv(s.K, rank_tol) * s.K;
  const Mat kb = s.K * s.B;
  const Mat ka = s.K * s.A;
  const Mat dc = s.D * comp;
  const Mat lhs = kb * pinv(kb, rank_tol) * ka * pinv(dc, rank_tol) * dc;
  const Mat rhs = ka * comp;
  SolvabilityCheck c;
  c.residual = rel(lhs - rhs, ka);
  c.holds = c.residual <= kSolvabilityTol;
  return c;
}

SolvabilityCheck check_solvability(const SynthesisProblem& problem, double rank_tol) {
  SolvabilityCheck c = check_solvability(assemble(problem), rank_tol);
  const PlantModel& pl = problem.plant;
  const ReferenceModel& rf = problem.reference;
  const bool tracking_shape = pl.a1() == rf.a2() && is_identity(problem.K1) && is_identity(-problem.K2) &&
                              problem.K3.norm() == 0.0;
  if (tracking_shape) {
    const Mat s = pl.D1.transpose() * pl.D1 + rf.D2.transpose() * rf.D2;
    const Mat diff = pl.A1 - rf.A2;
    const Mat lhs = pl.B1 * pinv(pl.B1, rank_tol) * diff * pinv(s, rank_tol) * s;
    c.tracking_residual = rel(lhs - diff, diff);
  }
  return c;
}

Mat y_block(const HMatrices& h, const SymMat& g, const SymMat& p, double alpha, const Mat& y) {
  const Index k = h.H1.rows();
  const Index m = g.dim();
  const Mat& pm = p.matrix();
  const Mat ph3y = pm * h.H3 * y;
  Mat out(k + m, k + m);
  const Mat tl = pm * h.H1 + alpha * 0.5 * pm + ph3y * h.H4;
  out.topLeftCorner(k, k) = tl + tl.transpose();
  out.topRightCorner(k, m) = pm * h.H2 + ph3y * h.H5;
  out.bottomLeftCorner(m, k) = out.topRightCorner(k, m).transpose();
  out.bottomRightCorner(m, m) = -alpha * g.matrix();
  return out;
}

std::optional<Mat> solve_Y(const HMatrices& h, const SymMat& g, const SymMat& p, double alpha,
                           const lmi::SolverOptions& options) {
  const Index rows = h.H3.cols();
  const Index cols = h.H4.rows();
  Mat y = Mat::Zero(rows, cols);
  if (rows > 0 && cols > 0) {
    lmi::LmiProblem problem;
    const lmi::AffineExpr yv = problem.add_rectangular("Y", rows, cols);
    const lmi::AffineExpr ph3y = p.matrix() * h.H3 * yv;
    const lmi::AffineExpr cross = ph3y * h.H5;
    const lmi::AffineExpr varying = lmi::AffineExpr::block({
        {lmi::plus_transpose(ph3y * h.H4), cross},
        {cross.transpose(), lmi::AffineExpr::zeros(g.dim(), g.dim())},
    });
    const Mat constant = y_block(h, g, p, alpha, y);
    problem.add_constraint(varying + constant, lmi::Sense::kNegativeDefinite, std::nullopt, "Y inequality");
    const lmi::LmiSolution sol = lmi::solve_feasibility(problem, options);
    if (!sol.feasible()) return std::nullopt;
    y = sol.at("Y");
  }
  if (max_eigenvalue(SymMat(y_block(h, g, p, alpha, y))) >= 0.0) return std::nullopt;
  return y;
}

CclResult cone_complementarity(const HMatrices& h, const SymMat& g, double alpha, const CclOptions& options) {
  if (!(alpha > 0.0)) throw InvalidInputError("alpha must be positive");
  const Index k = h.H1.rows();
  PairProblem pp = make_pair_problem(h, g, alpha);

  // Coupling [P I; I Q] >= 0 holds from the first iterate on, which keeps
  // every linearized trace at or above 2k.
  const Mat eye = Mat::Identity(k, k);
  pp.problem.add_constraint(lmi::AffineExpr::block({{pp.p, lmi::AffineExpr(eye)}, {lmi::AffineExpr(eye), pp.q}}),
                            lmi::Sense::kPositiveSemidefinite, std::nullopt, "coupling");

  CclResult r;
  const lmi::LmiSolution first = lmi::solve_feasibility(pp.problem, options.solver);
  if (!first.feasible()) {
    std::ostringstream msg;
    msg << "initial pair of inequalities is infeasible at alpha " << alpha << " (" << lmi::to_string(first.status)
        << ")";
    throw InfeasibleError(msg.str());
  }
  auto take = [&r](const lmi::LmiSolution& s) {
    r.P = SymMat(s.at("P"));
    r.Q = SymMat(s.at("Q"));
    r.mu1 = s.scalar("mu1");
    r.mu2 = s.scalar("mu2");
  };
  take(first);

  auto try_exit = [&]() {
    if (!options.early_exit) return false;
    r.Y = solve_Y(h, g, r.P, alpha, options.solver);
    if (r.Y) r.early_exit = true;
    return r.early_exit;
  };
  if (try_exit()) return r;

  // Badly scaled pairs can cycle without ever approaching 2k; give up once
  // the best trace has not improved for a while.
  constexpr int kStallWindow = 10;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int i = 0; i < options.max_iterations; ++i) {
    const lmi::AffineExpr objective = lmi::trace(pp.p * r.Q.matrix() + pp.q * r.P.matrix());
    const lmi::LmiSolution sol = lmi::minimize(pp.problem, objective, options.solver);
    ++r.iterations;
    if (!sol.feasible()) break;
    take(sol);
    r.trace_history.push_back(sol.objective);
    if (try_exit()) return r;
    if (std::abs(sol.objective - 2.0 * static_cast<double>(k)) <= 2.0 * static_cast<double>(k) * options.stop_tol) {
      r.converged = true;
      break;
    }
    if (sol.objective < best * (1.0 - options.stop_tol)) {
      best = sol.objective;
      since_best = 0;
    } else if (++since_best >= kStallWindow) {
      break;
    }
  }
  return r;
}

ControllerParams recover_X(const Mat& y, const AssembledSystem& s, const SynthesisProblem& problem, double rank_tol) {
  const Index n = s.n();
  const Mat kb = s.K * s.B;
  const Mat kb_pinv = pinv(kb, rank_tol);
  const Mat w = pinv(s.D * (pinv(s.K, rank_tol) * s.K - Mat::Identity(n, n)), rank_tol);
  if (y.rows() != s.B.cols() || y.cols() != s.D.rows()) throw DimensionError("Y has the wrong shape");
  const Mat x = kb_pinv * s.K * s.A * w + y + kb_pinv * kb * y * s.D * w;
  return ControllerParams::from_X(x, problem.a3, problem.plant.b1(), problem.plant.b2(), problem.reference.g());
}

ControllerParams recover_nonzero_E1(const ControllerParams& ctrl, const Mat& e1) {
  const Index b1 = ctrl.E3.rows();
  const Index b2 = ctrl.E3.cols();
  if (e1.rows() != b2 || e1.cols() != b1) throw DimensionError("E1 must be b2 x b1");
  const Mat gain = Mat::Identity(b1, b1) + ctrl.E3 * e1;
  Eigen::FullPivLU<Mat> lu(gain);
  if (b1 > 0 && (!lu.isInvertible() || lu.rcond() < 1e-12)) {
    throw NotRealizableError("I + E3 E1 is singular; the controller cannot be realized for this E1");
  }
  const Mat inv = b1 > 0 ? Mat(lu.inverse()) : Mat(0, 0);
  ControllerParams out;
  out.D3 = inv * ctrl.D3;
  out.E3 = inv * ctrl.E3;
  out.F3 = inv * ctrl.F3;
  const Mat be = ctrl.B3 * e1;
  out.A3 = ctrl.A3 - be * out.D3;
  out.B3 = ctrl.B3 - be * out.E3;
  out.C3 = ctrl.C3 - be * out.F3;
  return out;
}

std::pair<Mat, Mat> closed_loop_matrices(const AssembledSystem& s, const ControllerParams& ctrl) {
  const Mat x = ctrl.X();
  if (x.rows() != s.B.cols() || x.cols() != s.D.rows()) throw DimensionError("controller does not fit the problem");
  return {s.A + s.B * x * s.D, s.C + s.B * x * s.F};
}

ClosedLoop close_loop(const AssembledSystem& s, const ControllerParams& ctrl, const SymMat& g, const SymMat& p,
                      double alpha) {
  auto [m, n] = closed_loop_matrices(s, ctrl);
  ClosedLoop cl;
  cl.K = s.K;
  cl.P = p;
  cl.alpha = alpha;
  cl.margin = verify_cylinder(DisturbedSystem(m, n, g), s.K, p, alpha);
  cl.cylinder = Cylinder(SymMat(s.K.transpose() * p.matrix() * s.K));
  cl.M = std::move(m);
  cl.N = std::move(n);
  return cl;
}

SynthesisResult synthesize(const SynthesisProblem& problem, const SynthesisOptions& options) {
  const AssembledSystem s = assemble(problem);
  SynthesisResult result;
  result.solvability = check_solvability(problem);
  if (!result.solvability.holds) {
    std::ostringstream msg;
    msg << "solvability condition on (K, A, B, D) fails, relative residual " << result.solvability.residual;
    throw StructuralError(msg.str(), result.solvability.residual);
  }
  const HMatrices h = build_H(s);

  std::vector<double> grid = options.alpha_grid;
  if (grid.empty()) grid = default_alpha_grid(h.H1);
  std::sort(grid.begin(), grid.end());

  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (double alpha : grid) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInputError("alpha grid values must be positive");
    AlphaRecord rec;
    rec.alpha = alpha;
    try {
      rec.ccl = cone_complementarity(h, problem.G, alpha, options.ccl);
    } catch (const InfeasibleError&) {
      rec.status = "lmi-infeasible";
      result.alphas.push_back(std::move(rec));
      continue;
    }
    std::optional<Mat> y = rec.ccl.Y;
    if (!y) y = solve_Y(h, problem.G, rec.ccl.P, alpha, options.ccl.solver);
    if (!y) {
      rec.status = "y-infeasible";
      result.alphas.push_back(std::move(rec));
      continue;
    }
    const ControllerParams design = recover_X(*y, s, problem);
    ClosedLoop cl = close_loop(s, design, problem.G, rec.ccl.P, alpha);
    rec.margin = cl.margin;
    rec.log_det = log_det_of(rec.ccl.P.matrix());
    if (cl.margin < 0.0) {
      rec.status = "verified";
      if (rec.log_det > best) {
        best = rec.log_det;
        found = true;
        result.selected = result.alphas.size();
        result.design = design;
        result.closed_loop = std::move(cl);
      }
    } else {
      rec.status = "not-certified";
    }
    result.alphas.push_back(std::move(rec));
  }

  if (!found) {
    std::ostringstream msg;
    msg << "no alpha produced a verified controller:";
    for (const AlphaRecord& r : result.alphas) msg << "\n  alpha " << r.alpha << ": " << r.status;
    throw InfeasibleError(msg.str());
  }
  result.controller = problem.plant.E1.norm() == 0.0 ? result.design
                                                     : recover_nonzero_E1(result.design, problem.plant.E1);
  return result;
}

}  // namespace acyl
