#pragma once

// Plain-text problem and result files.
//
//   file      := item*
//   item      := IDENT '=' value | IDENT '{' (IDENT '=' value)* '}'
//   value     := NUMBER | matrix | call | '[' call (',' call)* ']'
//   matrix    := '[' ']' | '[' row (';' row)* ']'      row := NUMBER (','? NUMBER)*
//   call      := IDENT '(' value (',' value)* ')'       zeros(r, c), eye(n), sine(...)
//
// '#' starts a comment; newlines are plain whitespace. docs/problem_format.md
// lists the sections and keys.

#include "acyl/cylinder.hpp"
#include "acyl/linalg.hpp"
#include "acyl/simulation.hpp"
#include "acyl/synthesis.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acyl {

/// Plain disturbed system for `analyze`: x' = A x + B f, output map C.
struct SystemSection {
  Mat A;
  Mat B;
  Mat C;
  friend bool operator==(const SystemSection&, const SystemSection&) = default;
};

struct TargetSection {
  Mat K1, K2, K3;
};

struct SimulationSection {
  Disturbance signals;
  std::optional<Vec> s0;
  double dt = 1e-3;
  double horizon = 100.0;
  /// Zero-based (coordinate, reference) pairs for corridors and projections.
  std::vector<PlaneAxes> planes;
};

struct OptionsSection {
  std::vector<double> alpha_grid;
  double stop_tol = 0.05;
  int max_iterations = 100;
  /// alpha used by --paper-mode
  std::optional<double> paper_alpha;
};

struct ProblemFile {
  std::optional<SystemSection> system;
  std::optional<PlantModel> plant;
  ReferenceModel reference;  ///< empty unless given
  Index controller_order = 0;
  std::optional<TargetSection> target;
  std::optional<SymMat> G;
  SimulationSection simulation;
  OptionsSection options;

  bool has_synthesis() const noexcept { return plant.has_value(); }
  /// Throws InvalidInputError naming the missing sections.
  SynthesisProblem synthesis_problem() const;
  DisturbedSystem disturbed_system() const;
};

bool operator==(const ProblemFile& a, const ProblemFile& b);

/// Throws ParseError with the line and column of the offending token.
ProblemFile parse_problem(std::string_view text);
ProblemFile load_problem(const std::filesystem::path& path);
std::string serialize(const ProblemFile& file);

struct Certificate {
  SymMat P;
  double alpha = 0.0;
  double margin = 0.0;
  Mat output_map;  ///< C (analysis) or K (synthesis); Q = map^T P map
};

/// Output of `synthesize` / `analyze`, read back by `simulate` and `verify`.
struct ResultFile {
  std::optional<ControllerParams> controller;
  std::optional<Certificate> certificate;
  std::vector<double> trace_history;
};

bool operator==(const ResultFile& a, const ResultFile& b);

ResultFile parse_result(std::string_view text);
ResultFile load_result(const std::filesystem::path& path);
std::string serialize(const ResultFile& file);

/// Matrix literal in the file syntax; full round-trip precision.
std::string format_matrix(const Mat& m);
/// Parses one matrix value ("[1 0; 0 1]", "eye(2)", "zeros(2, 0)", "3").
Mat parse_matrix(std::string_view text);

}  // namespace acyl
