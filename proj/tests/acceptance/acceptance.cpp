// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "acyl/analysis.hpp"
#include "acyl/cylinder.hpp"
#include "acyl/errors.hpp"
#include "acyl/linalg.hpp"
#include "acyl/lmi.hpp"
#include "acyl/matrix_equations.hpp"
#include "acyl/problem_file.hpp"
#include "acyl/simulation.hpp"
#include "acyl/synthesis.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "oracles.hpp"

namespace {

using namespace acyl;
using testing::Gen;
using testing::trial_seed;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string data(const char* name) { return std::string(ACYL_DATA_DIR) + "/" + name; }

double rel(const Mat& got, const Mat& want) { return (got - want).norm() / (1.0 + want.norm()); }

// ---------------------------------------------------------------- 1

void motivating_bound(Outcome& o) {
  const ProblemFile f = load_problem(data("motivating.acyl"));
  const AttractingCylinderResult r = find_attracting_cylinder(f.disturbed_system(), f.system->C);
  const double expect = 2.0 * 2.0 / ((3.0 - 1.0) * (3.0 - 1.0));
  o.detail << "bound " << r.bound << " vs " << expect << " at alpha " << r.alpha;
  o.require(std::abs(r.bound - expect) <= 1e-2 * expect, "bound within 1%");
  o.require(r.lmi_margin < 0.0, "negative margin");
}

// ---------------------------------------------------------------- 2

void tracking_published_values(Outcome& o) {
  const SynthesisProblem p = load_problem(data("tracking.acyl")).synthesis_problem();
  const ResultFile published = load_result(data("tracking_paper.result"));
  const AssembledSystem s = assemble(p);
  const auto [m, n] = closed_loop_matrices(s, *published.controller);
  const DisturbedSystem cl(m, n, p.G);
  const Mat block = certificate_block(cl, s.K, published.certificate->P, 0.5);
  const double lmax = max_eigenvalue(SymMat(block));
  const double norm = spectral_norm(block);
  o.detail << "P " << to_string(definiteness(published.certificate->P).kind) << ", lambda_max/||block|| = "
           << lmax / norm;
  o.require(definiteness(published.certificate->P).kind == Definiteness::kPositiveDefinite, "P > 0");
  o.require(lmax <= 1e-2 * norm, "soft tolerance 1e-2");
}

// ---------------------------------------------------------------- 3, 4

struct LoopCheck {
  std::optional<double> entry;
  bool violated = true;
  double tail = 0.0;
};

LoopCheck simulate_loop(const ProblemFile& f, const SynthesisResult& r, const SynthesisProblem& p) {
  const ClosedLoop& cl = r.closed_loop;
  const SimulationTrace tr = simulate(cl.M, cl.N, f.simulation.signals, *f.simulation.s0, f.simulation.dt,
                                      f.simulation.horizon, p.G);
  const MembershipSeries v = membership_series(tr, cl.K, cl.P);
  return {v.entry_time, v.invariance_violated, v.tail_max};
}

void tracking_end_to_end(Outcome& o) {
  const ProblemFile f = load_problem(data("tracking.acyl"));
  const SynthesisProblem p = f.synthesis_problem();
  const SynthesisResult r = synthesize(p);
  o.detail << "alpha " << r.closed_loop.alpha << ", margin " << r.closed_loop.margin;
  o.require(r.closed_loop.margin < 0.0, "strictly negative margin");
  const LoopCheck c = simulate_loop(f, r, p);
  if (c.entry) o.detail << ", entry t = " << *c.entry << ", tail max V " << c.tail;
  o.require(c.entry.has_value(), "V enters <= 1");
  o.require(!c.violated, "V stays <= 1 + 1e-6 after entry");
}

void observer_end_to_end(Outcome& o) {
  const ProblemFile f = load_problem(data("observer.acyl"));
  const SynthesisProblem p = f.synthesis_problem();
  const AssembledSystem s = assemble(p);
  SynthesisOptions opts;
  opts.alpha_grid = default_alpha_grid(build_H(s).H1);
  opts.alpha_grid.push_back(0.3);
  const SynthesisResult r = synthesize(p, opts);
  o.detail << "alpha " << r.closed_loop.alpha << ", margin " << r.closed_loop.margin;
  o.require(r.closed_loop.margin < 0.0, "strictly negative margin");
  bool grid_has_published_alpha = false;
  for (const AlphaRecord& a : r.alphas) {
    if (a.alpha == 0.3) {
      grid_has_published_alpha = true;
      o.detail << ", alpha 0.3 " << a.status;
    }
  }
  o.require(grid_has_published_alpha, "grid contains 0.3");
  const LoopCheck c = simulate_loop(f, r, p);
  if (c.entry) o.detail << ", entry t = " << *c.entry;
  o.require(c.entry.has_value(), "error enters the cylinder");
  o.require(!c.violated, "error stays inside after entry");

  const ResultFile published = load_result(data("observer_paper.result"));
  const auto [m, n] = closed_loop_matrices(s, *published.controller);
  const Mat block = certificate_block(DisturbedSystem(m, n, p.G), s.K, published.certificate->P, 0.3);
  const double ratio = max_eigenvalue(SymMat(block)) / spectral_norm(block);
  const double luenberger = spectral_norm(published.controller->A3 - (p.plant.A1 - published.controller->B3 * p.plant.D1));
  o.detail << "; published ratio " << ratio << ", ||A3 - (A1 - B3 D1)|| " << luenberger;
  o.require(ratio <= 1e-2, "published (A3, B3) soft verification");
  o.require(luenberger <= 1e-2, "published Luenberger structure");
}

// ---------------------------------------------------------------- 5

SynthesisProblem random_structured(Gen& g, bool observer) {
  SynthesisProblem p;
  const Index a1 = g.integer(1, 4), a2 = g.integer(0, 3), b1 = g.integer(1, 3), b2 = g.integer(1, 3);
  const Index c1 = g.integer(1, 2), c2 = g.integer(0, 2), gd = a2 == 0 ? 0 : g.integer(1, 3);
  p.plant.A1 = g.gaussian(a1, a1);
  p.plant.B1 = g.gaussian(a1, b1);
  p.plant.C1 = g.gaussian(a1, c1);
  p.plant.D1 = g.gaussian(b2, a1);
  p.plant.E1 = Mat::Zero(b2, b1);
  p.plant.F1 = g.gaussian(b2, c1);
  p.reference.A2 = g.gaussian(a2, a2);
  p.reference.C2 = g.gaussian(a2, c2);
  p.reference.D2 = g.gaussian(gd, a2);
  p.a3 = observer ? a1 : g.integer(0, 2);
  p.K1 = Mat::Identity(a1, a1);
  p.K2 = Mat::Zero(a1, a2);
  p.K3 = observer ? Mat(-Mat::Identity(a1, a1)) : Mat(Mat::Zero(a1, p.a3));
  p.G = SymMat::identity(c1 + c2);
  return p;
}

void structural_claims(Outcome& o) {
  int passed = 0;
  for (int t = 0; t < 100; ++t) {
    for (bool observer : {false, true}) {
      Gen g(trial_seed(500 + (observer ? 1 : 0), t));
      if (check_solvability(assemble(random_structured(g, observer))).holds) ++passed;
    }
  }
  o.detail << passed << "/200 random [I 0 0] and [I 0 -I] plants pass";
  o.require(passed == 200, "all random plants pass");

  const SolvabilityCheck tracking = check_solvability(load_problem(data("tracking.acyl")).synthesis_problem());
  o.detail << ", tracking residual " << tracking.residual;
  o.require(tracking.holds, "tracking problem passes");

  SynthesisProblem bad;
  bad.plant.A1 = Mat::Zero(2, 2);
  bad.plant.A1.diagonal() << 1, 2;
  bad.plant.B1 = Mat::Zero(2, 1);
  bad.plant.C1 = Mat::Zero(2, 1);
  bad.plant.D1 = Mat::Zero(1, 2);
  bad.plant.D1(0, 0) = 1;
  bad.plant.E1 = Mat::Zero(1, 1);
  bad.plant.F1 = Mat::Zero(1, 1);
  bad.reference.A2 = Mat::Zero(2, 2);
  bad.reference.C2 = Mat(2, 0);
  bad.reference.D2 = bad.plant.D1;
  bad.a3 = 0;
  bad.K1 = Mat::Identity(2, 2);
  bad.K2 = -Mat::Identity(2, 2);
  bad.K3 = Mat(2, 0);
  bad.G = SymMat::identity(1);
  const SolvabilityCheck c = check_solvability(bad);
  o.detail << ", counterexample residual " << c.residual;
  o.require(!c.holds, "counterexample fails");
}

// ---------------------------------------------------------------- 6

Mat full_row_rank(Gen& g, Index m, Index n) {
  for (;;) {
    const Mat c = g.gaussian(m, n);
    if (Eigen::JacobiSVD<Mat>(c).singularValues()(m - 1) > 0.2) return c;
  }
}

void geometry_oracles(Outcome& o) {
  long violations = 0;
  for (int t = 0; t < 50; ++t) {
    Gen g(trial_seed(600, t));
    const Index n = g.integer(2, 6), m = g.integer(1, n);
    const Mat q = g.psd(n, g.integer(0, n));
    const Mat c = full_row_rank(g, m, n);
    const Cylinder img = image(Cylinder(SymMat(q)), c);
    for (int s = 0; s < 10000; ++s) {
      if (contains(img, c * testing::sample_in_cylinder(g, q, s % 2 == 0)) > 1.0 + 1e-8) ++violations;
    }
  }
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    Gen g(trial_seed(601, t));
    const Index n = g.integer(2, 6), m = g.integer(1, n);
    const Mat q = g.psd(n, n);
    const Mat c = full_row_rank(g, m, n);
    const Mat expect = (c * q.inverse() * c.transpose()).inverse();
    worst = std::max(worst, rel(image(Cylinder(SymMat(q)), c).form().matrix(), expect));
  }
  o.detail << violations << " violations in 5e5 samples, Q > 0 closed-form error " << worst;
  o.require(violations == 0, "no membership violations");
  o.require(worst <= 1e-8, "closed form to 1e-8");
}

// ---------------------------------------------------------------- 7

int count_failures(int trials, const std::function<bool(int)>& ok) {
  int bad = 0;
  for (int t = 0; t < trials; ++t) bad += ok(t) ? 0 : 1;
  return bad;
}

void equation_suites(Outcome& o) {
  const int mp = count_failures(200, [](int t) {
    Gen g(trial_seed(700, t));
    const Index r = g.integer(1, 8), c = g.integer(1, 8);
    const Mat a = g.coin() ? g.gaussian(r, c) : g.with_rank(r, c, g.integer(1, std::min(r, c)));
    const Mat ap = pinv(a);
    const double s = 1.0 + a.norm() * ap.norm();
    return (a * ap * a - a).norm() <= 1e-9 * (1.0 + a.norm()) && (ap * a * ap - ap).norm() <= 1e-9 * (1.0 + ap.norm()) &&
           ((a * ap).transpose() - a * ap).norm() <= 1e-9 * s && ((ap * a).transpose() - ap * a).norm() <= 1e-9 * s;
  });

  int wood = 0;
  for (int t = 0, done = 0; done < 200; ++t) {
    Gen g(trial_seed(701, t));
    const Index n = g.integer(2, 6), m = g.integer(1, 4);
    const Mat a = g.symmetric(n, 1.0, 4.0) + 0.3 * g.gaussian(n, n);
    const Mat u = 0.5 * g.gaussian(n, m), v = 0.5 * g.gaussian(m, n);
    const Mat c = Mat::Identity(m, m) + 0.2 * g.gaussian(m, m);
    const Mat sum = a + u * c * v;
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Mat>(sum).singularValues();
    const double cond = sv(0) / sv(n - 1);
    const Mat ai = a.inverse();
    const Mat inner = c.inverse() + v * ai * u;
    if (cond > 1e4 || inner.fullPivLu().rcond() < 1e-6) continue;
    const Mat rhs = ai - ai * u * inner.inverse() * v * ai;
    wood += (sum.inverse() - rhs).norm() <= 1e-8 * cond * (1.0 + rhs.norm()) ? 0 : 1;
    ++done;
  }

  const int tik = count_failures(200, [](int t) {
    Gen g(trial_seed(702, t));
    const Index r = g.integer(2, 6), c = g.integer(2, 6);
    const Mat a = g.integer_low_rank(r, c, g.integer(1, std::min(r, c) - 1));
    if (a.norm() == 0.0) return true;
    const Mat ap = pinv(a);
    double prev = std::numeric_limits<double>::infinity();
    for (int e = 2; e <= 10; e += 2) {
      const double err = (testing::tikhonov_pinv_quad(a, std::pow(10.0, -e)) - ap).norm();
      if (!(err < prev)) return false;
      prev = err;
    }
    return prev < 1e-9 * (1.0 + std::pow(ap.norm(), 3));
  });

  const int axb = count_failures(200, [](int t) {
    Gen g(trial_seed(703, t));
    const Index m = g.integer(1, 5), p = g.integer(1, 5), q = g.integer(1, 5), r = g.integer(1, 5);
    const Mat a = g.coin() ? g.gaussian(m, p) : g.with_rank(m, p, g.integer(1, std::min(m, p)));
    const Mat b = g.coin() ? g.gaussian(q, r) : g.with_rank(q, r, g.integer(1, std::min(q, r)));
    const Mat c = a * g.gaussian(p, q) * b;
    const AxbSolution s = solve_axb(a, b, c);
    if (!s.solvable) return false;
    for (int k = 0; k < 20; ++k) {
      const Mat x = s.parameterize(g.gaussian(p, q));
      if ((a * x * b - c).norm() > 1e-8 * (1.0 + c.norm() + x.norm())) return false;
    }
    return true;
  });

  const int proj = count_failures(200, [](int t) {
    Gen g(trial_seed(704, t));
    const Index n = g.integer(2, 7), m = g.integer(1, 7);
    const Mat basis = g.orthogonal(n).leftCols(g.integer(0, n));
    const Mat a = basis * basis.transpose();
    const Mat ba_p = pinv(g.gaussian(m, n) * a);
    return (a * ba_p - ba_p).norm() <= 1e-9 * (1.0 + ba_p.norm());
  });

  int strict_lyap = 0, feasible = 0, compared = 0;
  for (int t = 0; compared < 200; ++t) {
    Gen g(trial_seed(705, t));
    const Index n = g.integer(2, 4), p = g.integer(1, n), q = g.integer(1, n);
    const Mat a = g.gaussian(n, p), b = g.gaussian(q, n);
    const Mat c = g.symmetric(n, -3.0, 1.5);
    const StrictLyapunovSolvability s = strict_lyap_solvable(a, b, SymMat(c));
    if (std::abs(s.kernel_eig_left) < 1e-2 || std::abs(s.kernel_eig_right) < 1e-2) continue;
    ++compared;
    lmi::LmiProblem prob;
    const lmi::AffineExpr x = prob.add_rectangular("X", p, q);
    prob.add_constraint(lmi::plus_transpose(a * x * b) + c, lmi::Sense::kNegativeDefinite, 1e-6);
    const bool direct = lmi::solve_feasibility(prob).feasible();
    feasible += s.feasible ? 1 : 0;
    strict_lyap += direct == s.feasible ? 0 : 1;
  }

  o.detail << "failures: pinv " << mp << ", woodbury " << wood << ", tikhonov " << tik << ", axb " << axb
           << ", projector " << proj << ", strict_lyap " << strict_lyap << " (" << feasible << "/200 feasible)";
  o.require(mp + wood + tik + axb + proj + strict_lyap == 0, "every instance agrees");
}

// ---------------------------------------------------------------- 8

void ccl_telemetry(Outcome& o) {
  for (const auto& [file, alpha] : {std::pair{"tracking.acyl", 0.5}, std::pair{"observer.acyl", 0.3}}) {
    const SynthesisProblem p = load_problem(data(file)).synthesis_problem();
    const HMatrices h = build_H(assemble(p));
    const double two_k = 2.0 * static_cast<double>(p.K().rows());
    const CclResult r = cone_complementarity(h, p.G, alpha);
    if (o.detail.tellp() > 0) o.detail << "; ";
    o.detail << file << " alpha " << alpha << ": ";
    bool ok = false;
    if (r.early_exit && r.Y) {
      const double lmax = max_eigenvalue(SymMat(y_block(h, p.G, r.P, alpha, *r.Y)));
      o.detail << "early exit after " << r.iterations << " trace steps, Y-block lambda_max " << lmax;
      ok = lmax < 0.0;
    } else {
      bool monotone = true;
      for (std::size_t i = 1; i < r.trace_history.size(); ++i) {
        monotone = monotone && r.trace_history[i] <= r.trace_history[i - 1] + 1e-6 * two_k;
      }
      const double last = r.trace_history.empty() ? INFINITY : r.trace_history.back();
      o.detail << r.trace_history.size() << " steps, last trace " << last << " vs 2k = " << two_k;
      ok = monotone && last <= two_k * 1.05;
    }
    o.require(ok, std::string(file) + " converges or exits early");
  }
}

struct Criterion {
  const char* id;
  const char* name;
  double limit_seconds;
  void (*run)(Outcome&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"AC1", "motivating-example bound", 1.0, motivating_bound},
      {"AC2", "tracking published values", 1.0, tracking_published_values},
      {"AC3", "tracking end to end", 30.0, tracking_end_to_end},
      {"AC4", "observer end to end", 30.0, observer_end_to_end},
      {"AC5", "solvability structure", 5.0, structural_claims},
      {"AC6", "geometry oracles", 10.0, geometry_oracles},
      {"AC7", "matrix equation property suites", 60.0, equation_suites},
      {"AC8", "cone complementarity telemetry", 60.0, ccl_telemetry},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds) {
      std::ostringstream msg;
      msg << "runtime over " << c.limit_seconds << " s";
      o.require(false, msg.str());
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << " (" << std::fixed
              << std::setprecision(2) << secs << " s): " << std::defaultfloat << std::setprecision(6)
              << o.detail.str() << "\n";
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
