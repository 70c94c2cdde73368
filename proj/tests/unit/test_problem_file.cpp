#include "acyl/errors.hpp"
#include "acyl/problem_file.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "generators.hpp"

namespace acyl {
namespace {

using testing::Gen;
using testing::trial_seed;

std::filesystem::path data(const char* name) { return std::filesystem::path(ACYL_DATA_DIR) / name; }

struct ErrorPos {
  int line = 0;
  int column = 0;
};

ErrorPos parse_error_at(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return {};
}

TEST(ParseMatrix, Forms) {
  EXPECT_EQ(parse_matrix("eye(2)"), Mat::Identity(2, 2));
  const Mat z = parse_matrix("zeros(2, 0)");
  EXPECT_EQ(z.rows(), 2);
  EXPECT_EQ(z.cols(), 0);
  EXPECT_EQ(parse_matrix("3")(0, 0), 3.0);
  Mat m(2, 2);
  m << 1, -2.5, 3e-3, 4;
  EXPECT_EQ(parse_matrix("[1, -2.5; 3e-3 4]"), m);
  EXPECT_EQ(parse_matrix("[]").size(), 0);
}

TEST(ParseMatrix, ErrorColumnsReferToTheGivenText) {
  try {
    parse_matrix("[1 2; 3]");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 7);
  }
}

TEST(FormatMatrixProperty, BitwiseRoundTrip) {
  for (int t = 0; t < 300; ++t) {
    Gen g(trial_seed(80, t));
    Mat m = g.gaussian(g.integer(0, 5), g.integer(0, 5));
    for (Index i = 0; i < m.size(); ++i) m.data()[i] *= std::pow(10.0, g.integer(-12, 12));
    const Mat back = parse_matrix(format_matrix(m));
    ASSERT_EQ(back.rows(), m.rows()) << t;
    ASSERT_EQ(back.cols(), m.cols()) << t;
    EXPECT_EQ(back, m) << t;
  }
}

TEST(ParseProblem, ErrorPositions) {
  {
    const ErrorPos p = parse_error_at("system {\n  A = [1 x]\n}");
    EXPECT_EQ(p.line, 2);
    EXPECT_EQ(p.column, 10);
  }
  {
    const ErrorPos p = parse_error_at("# comment\nsystem {\n  A = [1 2; 3]\n}");
    EXPECT_EQ(p.line, 3);
  }
  {
    const ErrorPos p = parse_error_at("system {\n  Z = 1\n}");
    EXPECT_EQ(p.line, 2);
    EXPECT_EQ(p.column, 3);
  }
  EXPECT_EQ(parse_error_at("bogus = 3").line, 1);
  EXPECT_EQ(parse_error_at("system {\n  A = eye(2)\n  A = eye(2)\n}").line, 3);
  EXPECT_EQ(parse_error_at("system { A = [1").line, 1);
  EXPECT_EQ(parse_error_at("system {\n  A = [1 2 $]\n}").column, 12);
}

TEST(ParseProblem, MissingSectionsAreNamed) {
  const ProblemFile f = parse_problem("bound { G = 1 }");
  try {
    f.synthesis_problem();
    FAIL();
  } catch (const InvalidInputError& e) {
    EXPECT_NE(std::string(e.what()).find("plant"), std::string::npos);
  }
  EXPECT_THROW(f.disturbed_system(), InvalidInputError);
}

TEST(ParseProblem, DataFilesRoundTrip) {
  for (const char* name : {"motivating.acyl", "tracking.acyl", "observer.acyl"}) {
    SCOPED_TRACE(name);
    const ProblemFile f = load_problem(data(name));
    const std::string text = serialize(f);
    const ProblemFile back = parse_problem(text);
    EXPECT_TRUE(back == f);
    EXPECT_EQ(serialize(back), text);
  }
}

TEST(ParseProblem, TrackingContents) {
  const ProblemFile f = load_problem(data("tracking.acyl"));
  ASSERT_TRUE(f.has_synthesis());
  EXPECT_EQ(f.controller_order, 1);
  EXPECT_EQ(f.plant->E1, Mat::Zero(1, 1));  // defaulted
  ASSERT_EQ(f.simulation.planes.size(), 2u);
  EXPECT_EQ(f.simulation.planes[0].first, 0);  // one-based in the file
  EXPECT_EQ(f.simulation.planes[0].second, 2);
  EXPECT_EQ(f.simulation.signals[0], SignalSpec::sine(1.0, 0.4));
  ASSERT_TRUE(f.options.paper_alpha.has_value());
  EXPECT_EQ(*f.options.paper_alpha, 0.5);
  const SynthesisProblem p = f.synthesis_problem();
  EXPECT_EQ(p.K3, Mat::Zero(2, 1));
}

TEST(ParseProblem, MotivatingSystem) {
  const DisturbedSystem s = load_problem(data("motivating.acyl")).disturbed_system();
  Mat a(2, 2);
  a << 1, 0, 3, -2;
  EXPECT_EQ(s.A, a);
  EXPECT_EQ(s.G.matrix(), Mat::Identity(1, 1));
}

TEST(ResultFile, PublishedFilesRoundTrip) {
  for (const char* name : {"tracking_paper.result", "observer_paper.result"}) {
    SCOPED_TRACE(name);
    const ResultFile r = load_result(data(name));
    ASSERT_TRUE(r.controller.has_value());
    ASSERT_TRUE(r.certificate.has_value());
    const ResultFile back = parse_result(serialize(r));
    EXPECT_TRUE(back == r);
  }
  const ResultFile t = load_result(data("tracking_paper.result"));
  EXPECT_EQ(t.certificate->P(0, 1), -1585.0);
  EXPECT_EQ(t.controller->F3(0, 0), 4.95);
}

TEST(ResultFile, GeneratedRoundTrip) {
  Gen g(81);
  ResultFile r;
  r.controller = ControllerParams::from_X(g.gaussian(3, 4), 2, 1, 1, 1);
  r.certificate = Certificate{SymMat(g.psd(2, 2)), 0.123456789, -1e-7, g.gaussian(2, 5)};
  r.trace_history = {7.5, 4.25, 4.000001};
  EXPECT_TRUE(parse_result(serialize(r)) == r);
  const std::filesystem::path tmp = std::filesystem::temp_directory_path() / "acyl_roundtrip.result";
  {
    std::ofstream os(tmp);
    os << serialize(r);
  }
  EXPECT_TRUE(load_result(tmp) == r);
  std::filesystem::remove(tmp);
  EXPECT_THROW(load_result(tmp), InvalidInputError);
}

}  // namespace
}  // namespace acyl
