#include "acyl/analysis.hpp"
#include "acyl/errors.hpp"
#include "acyl/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"

namespace acyl {
namespace {

using testing::Gen;
using testing::trial_seed;

// x' = a x + b f, x^' = l x + (a - l) x^; the difference obeys z' = (a - l) z + b f.
DisturbedSystem difference_system(double a, double l, double b) {
  Mat A(2, 2), B(2, 1);
  A << a, 0, l, a - l;
  B << b, 0;
  return DisturbedSystem(A, B, SymMat::identity(1));
}

Mat difference_map() {
  Mat c(1, 2);
  c << 1, -1;
  return c;
}

TEST(DisturbedSystemTest, ValidatesShapesAndBound) {
  EXPECT_THROW(DisturbedSystem(Mat::Zero(2, 3), Mat::Zero(2, 1), SymMat::identity(1)), DimensionError);
  EXPECT_THROW(DisturbedSystem(Mat::Zero(2, 2), Mat::Zero(3, 1), SymMat::identity(1)), DimensionError);
  EXPECT_THROW(DisturbedSystem(Mat::Zero(2, 2), Mat::Zero(2, 1), SymMat::identity(2)), DimensionError);
  EXPECT_THROW(DisturbedSystem(Mat::Zero(2, 2), Mat::Zero(2, 1), SymMat(-Mat::Identity(1, 1))), NotPsdError);
  EXPECT_NO_THROW(DisturbedSystem(Mat::Zero(2, 2), Mat::Zero(2, 0), SymMat(Mat(0, 0))));
}

TEST(Regularity, Examples) {
  Gen g(5);
  EXPECT_TRUE(check_output_regularity(Mat::Identity(3, 3), g.gaussian(3, 3)).regular);
  EXPECT_TRUE(check_output_regularity(difference_map(), difference_system(1, 3, 2).A).regular);
  Mat a(2, 2), c(1, 2);
  a << 0, 1, 0, 0;
  c << 1, 0;
  const RegularityCheck r = check_output_regularity(c, a);
  EXPECT_FALSE(r.regular);
  EXPECT_GT(r.residual, 0.1);
  Mat dup(2, 2);
  dup << 1, -1, 2, -2;
  EXPECT_EQ(check_output_regularity(dup, difference_system(1, 3, 2).A).rank, 1);
  EXPECT_FALSE(check_output_regularity(dup, difference_system(1, 3, 2).A).regular);
}

TEST(VerifyCylinder, NoDisturbanceBlock) {
  const DisturbedSystem sys(-Mat::Identity(2, 2), Mat::Zero(2, 0), SymMat(Mat(0, 0)));
  EXPECT_NEAR(verify_cylinder(sys, Mat::Identity(2, 2), SymMat::identity(2), 1.0), -1.0, 1e-14);
}

TEST(VerifyCylinder, StableBallCertificate) {
  const DisturbedSystem sys(-Mat::Identity(2, 2), Mat::Identity(2, 2), SymMat::identity(2));
  // [(-2 + alpha) I, I; I, -alpha I] at alpha = 1: eigenvalues of [[-1, 1], [1, -1]] -> 0 and -2,
  // so P = I sits on the boundary and P = I / 2 is strictly inside.
  EXPECT_LT(verify_cylinder(sys, Mat::Identity(2, 2), SymMat(0.5 * Mat::Identity(2, 2)), 1.0), 0.0);
  EXPECT_NEAR(verify_cylinder(sys, Mat::Identity(2, 2), SymMat::identity(2), 1.0), 0.0, 1e-14);
}

TEST(VerifyCylinder, UnstableOutputIsRejected) {
  const DisturbedSystem sys(Mat::Identity(2, 2), Mat::Identity(2, 1).eval(), SymMat::identity(1));
  // P (A + alpha/2 I) has eigenvalue (1 + alpha/2) p > 0 whatever p > 0.
  EXPECT_GT(verify_cylinder(sys, Mat::Identity(2, 2), SymMat::identity(2), 0.01), 0.0);
}

TEST(AttractingCylinder, DifferenceExampleBound) {
  const AttractingCylinderResult r = find_attracting_cylinder(difference_system(1, 3, 2), difference_map());
  EXPECT_NEAR(r.bound, 1.0, 1e-2);
  EXPECT_NEAR(r.alpha, 2.0, 0.05);
  EXPECT_LT(r.lmi_margin, 0.0);
  EXPECT_EQ(r.cylinder.rank(), 1);
  EXPECT_EQ(r.cylinder.dim(), 2);
  EXPECT_FALSE(r.trials.empty());
}

TEST(AttractingCylinder, FixedAlphaMatchesClosedForm) {
  AnalysisOptions opts;
  opts.alpha_grid = {1.0};
  opts.refine = false;
  const AttractingCylinderResult r = find_attracting_cylinder(difference_system(1, 3, 2), difference_map(), opts);
  EXPECT_NEAR(r.P(0, 0), testing::scalar_certificate(2.0, 2.0, 1.0, 1.0), 1e-4);
}

TEST(AttractingCylinderProperty, ScalarBoundsMatchClosedForm) {
  for (int t = 0; t < 20; ++t) {
    Gen g(trial_seed(50, t));
    const double a = g.uniform(-2.0, 2.0), l = a + g.uniform(0.3, 4.0), b = g.uniform(0.2, 3.0);
    const AttractingCylinderResult r = find_attracting_cylinder(difference_system(a, l, b), difference_map());
    SCOPED_TRACE(t);
    EXPECT_NEAR(r.bound / testing::scalar_bound(l - a, b, 1.0), 1.0, 1e-2);
  }
}

TEST(AttractingCylinder, StructuralAndInfeasibleFailures) {
  Mat a(2, 2), c(1, 2);
  a << 0, 1, 0, 0;
  c << 1, 0;
  const DisturbedSystem di(a, Mat::Identity(2, 1).eval(), SymMat::identity(1));
  EXPECT_THROW(find_attracting_cylinder(di, c), StructuralError);

  // z' = z + f cannot be confined.
  const DisturbedSystem unstable(Mat::Identity(1, 1), Mat::Identity(1, 1), SymMat::identity(1));
  try {
    find_attracting_cylinder(unstable, Mat::Identity(1, 1));
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos);
  }
  AnalysisOptions bad;
  bad.alpha_grid = {-1.0};
  EXPECT_THROW(find_attracting_cylinder(difference_system(1, 3, 2), difference_map(), bad), InvalidInputError);
}

// With C = I the certificate is the invariant-ellipsoid LMI itself.
TEST(AttractingCylinder, IdentityOutputIsInvariantEllipsoid) {
  Gen g(51);
  const Mat A = g.gaussian(3, 3) - 3.0 * Mat::Identity(3, 3);
  const Mat B = g.gaussian(3, 2);
  const DisturbedSystem sys(A, B, SymMat::identity(2));
  const double alpha = 1.0;
  const lmi::LmiSolution lib = solve_certificate(sys, Mat::Identity(3, 3), alpha);

  lmi::LmiProblem prob;
  const lmi::AffineExpr p = prob.add_symmetric("P", 3);
  const lmi::AffineExpr pb = p * B;
  prob.add_constraint(lmi::AffineExpr::block({{lmi::plus_transpose(p * A) + alpha * p, pb},
                                              {pb.transpose(), lmi::AffineExpr(-alpha * Mat::Identity(2, 2))}}),
                      lmi::Sense::kNegativeDefinite);
  prob.add_constraint(p, lmi::Sense::kPositiveDefinite);
  const lmi::LmiSolution direct = lmi::maximize_log_det(prob, p);
  ASSERT_TRUE(lib.feasible());
  ASSERT_TRUE(direct.feasible());
  EXPECT_LT((lib.at("P") - direct.at("P")).norm(), 1e-9 * (1.0 + direct.at("P").norm()));
  const double m1 = verify_cylinder(sys, Mat::Identity(3, 3), SymMat(lib.at("P")), alpha);
  const double m2 = verify_cylinder(sys, Mat::Identity(3, 3), SymMat(direct.at("P")), alpha);
  EXPECT_NEAR(m1, m2, 1e-9);
}

TEST(DefaultGrid, LogSpacedAroundScale) {
  Mat x = Mat::Zero(2, 2);
  x(0, 0) = -4.0;
  const std::vector<double> grid = default_alpha_grid(x);
  ASSERT_EQ(grid.size(), 20u);
  EXPECT_NEAR(grid.front(), 0.04, 1e-12);
  EXPECT_NEAR(grid.back(), 400.0, 1e-9);
  EXPECT_NEAR(default_alpha_grid(Mat::Zero(2, 2), 3)[1], 1.0, 1e-12);
}

// Trajectories of a certified system stay in the cylinder once inside and
// satisfy V' + alpha V <= alpha f^T G f.
TEST(AttractingCylinderProperty, SimulationConsistency) {
  const DisturbedSystem sys = difference_system(1, 3, 2);
  const AttractingCylinderResult r = find_attracting_cylinder(sys, difference_map());
  const std::vector<Disturbance> signals = {
      {SignalSpec::sine(1.0, 1.0)},
      {SignalSpec::square(0.0, 1.0, 0.5)},
      {SignalSpec::constant(-1.0)},
  };
  for (const Disturbance& f : signals) {
    const SimulationTrace tr = simulate(sys.A, sys.B, f, Eigen::Vector2d(4.0, -3.0), 1e-3, 20.0, sys.G);
    const MembershipSeries v = membership_series(tr, difference_map(), r.P);
    ASSERT_TRUE(v.entry_time.has_value());
    EXPECT_FALSE(v.invariance_violated);
    EXPECT_LE(v.tail_max, 1.0 + 1e-3);
    EXPECT_LE(lyapunov_decay_excess(tr, sys.A, sys.B, difference_map(), r.P, r.alpha, sys.G), 1e-6);
  }
}

}  // namespace
}  // namespace acyl
