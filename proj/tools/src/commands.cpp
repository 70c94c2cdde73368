#include "commands.hpp"

#include "acyl/analysis.hpp"
#include "acyl/cylinder.hpp"
#include "acyl/errors.hpp"
#include "acyl/problem_file.hpp"
#include "acyl/simulation.hpp"
#include "acyl/synthesis.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace acyl::cli {

namespace {

namespace fs = std::filesystem;

void print_matrix(std::ostream& os, const std::string& name, const Mat& m) {
  os << name << " (" << m.rows() << "x" << m.cols() << ")";
  if (m.size() == 0) {
    os << " empty\n";
    return;
  }
  os << "\n";
  std::ostringstream row;
  for (Index i = 0; i < m.rows(); ++i) {
    os << "  ";
    for (Index j = 0; j < m.cols(); ++j) os << std::setw(14) << std::setprecision(6) << m(i, j);
    os << "\n";
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<double> choose_grid(const ProblemFile& f, bool paper_mode, const std::vector<double>& flag_grid) {
  if (paper_mode) {
    if (!f.options.paper_alpha) throw InvalidInputError("--paper-mode needs options { paper_alpha = ... }");
    return {*f.options.paper_alpha};
  }
  if (!flag_grid.empty()) return flag_grid;
  return f.options.alpha_grid;
}

// Closed loop of a controller realized for y (undoes the E1 rewrite).
std::pair<Mat, Mat> realized_closed_loop(const SynthesisProblem& p, const ControllerParams& ctrl) {
  const AssembledSystem sys = assemble(p);
  const ControllerParams design =
      p.plant.E1.norm() == 0.0 ? ctrl : recover_nonzero_E1(ctrl, -p.plant.E1);
  return closed_loop_matrices(sys, design);
}

struct LoopData {
  Mat M, N, K;
  SymMat G;
};

LoopData loop_for(const ProblemFile& f, const ResultFile& r) {
  if (!r.certificate) throw InvalidInputError("result file has no certificate section");
  LoopData d;
  d.K = r.certificate->output_map;
  if (r.controller) {
    const SynthesisProblem p = f.synthesis_problem();
    std::tie(d.M, d.N) = realized_closed_loop(p, *r.controller);
    d.G = p.G;
  } else {
    const DisturbedSystem sys = f.disturbed_system();
    d.M = sys.A;
    d.N = sys.B;
    d.G = sys.G;
  }
  if (d.K.cols() != d.M.rows()) throw DimensionError("certificate output_map does not match the state dimension");
  return d;
}

int cmd_analyze(const std::string& file, const std::string& out_path, bool paper_mode,
                const std::vector<double>& grid_flag, bool no_refine, std::ostream& out) {
  const ProblemFile f = load_problem(file);
  const DisturbedSystem sys = f.disturbed_system();
  const Mat& c = f.system->C;
  const RegularityCheck reg = check_output_regularity(c, sys.A);
  out << "output regularity: rank C = " << reg.rank << " of " << c.rows() << ", residual " << reg.residual
      << (reg.regular ? " (ok)" : " (FAILED)") << "\n";
  if (!reg.regular) {
    throw StructuralError("output map C violates rank C = k or C A (I - C+ C) = 0", reg.residual);
  }
  AnalysisOptions opts;
  opts.alpha_grid = choose_grid(f, paper_mode, grid_flag);
  opts.refine = !(paper_mode || no_refine);
  const AttractingCylinderResult r = find_attracting_cylinder(sys, c, opts);

  out << "alpha " << std::setprecision(8) << r.alpha << "\n";
  print_matrix(out, "P", r.P.matrix());
  out << "cylinder rank k = " << r.cylinder.rank() << " in R^" << r.cylinder.dim()
      << (r.cylinder.is_ellipsoid() ? " (ellipsoid)" : "") << "\n";
  out << "lmi margin " << r.lmi_margin << "\n";
  out << "bound 1/lambda_min(P) = " << std::setprecision(10) << r.bound << "\n";
  out << "alpha trials " << r.trials.size() << "\n";

  if (!out_path.empty()) {
    ResultFile rf;
    rf.certificate = Certificate{r.P, r.alpha, r.lmi_margin, c};
    write_text(out_path, serialize(rf));
    out << "wrote " << out_path << "\n";
  }
  return kOk;
}

int cmd_synthesize(const std::string& file, const std::string& out_path, bool paper_mode,
                   const std::vector<double>& grid_flag, std::optional<double> stop_tol,
                   std::optional<int> max_iterations, std::ostream& out) {
  const ProblemFile f = load_problem(file);
  const SynthesisProblem p = f.synthesis_problem();
  SynthesisOptions opts;
  opts.alpha_grid = choose_grid(f, paper_mode, grid_flag);
  opts.ccl.stop_tol = stop_tol.value_or(f.options.stop_tol);
  opts.ccl.max_iterations = max_iterations.value_or(f.options.max_iterations);

  const SolvabilityCheck cond = check_solvability(p);
  out << "solvability residual " << cond.residual << (cond.holds ? " (ok)" : " (FAILED)") << "\n";
  if (cond.tracking_residual) out << "tracking form residual " << *cond.tracking_residual << "\n";

  const SynthesisResult r = synthesize(p, opts);
  const Index k = p.K1.rows();
  out << "alpha        status          ccl-iter  early  margin\n";
  for (const AlphaRecord& a : r.alphas) {
    out << std::left << std::setw(13) << std::setprecision(6) << a.alpha << std::setw(16) << a.status
        << std::setw(10) << a.ccl.iterations << std::setw(7) << (a.ccl.early_exit ? "yes" : "no") << a.margin
        << std::right << "\n";
  }
  const AlphaRecord& sel = r.alphas[r.selected];
  out << "selected alpha " << sel.alpha << ", verified margin " << r.closed_loop.margin << "\n";
  out << "cone complementarity trace (2k = " << 2 * k << "):";
  for (double t : sel.ccl.trace_history) out << " " << t;
  if (sel.ccl.trace_history.empty()) out << " none (early exit after the initial pair)";
  out << "\n";
  print_matrix(out, "P", r.closed_loop.P.matrix());
  const ControllerParams& c = r.controller;
  print_matrix(out, "A3", c.A3);
  print_matrix(out, "B3", c.B3);
  print_matrix(out, "C3", c.C3);
  print_matrix(out, "D3", c.D3);
  print_matrix(out, "E3", c.E3);
  print_matrix(out, "F3", c.F3);
  if (c.effectively_static()) out << "controller is effectively static: u = E3 y + F3 g\n";
  if (p.a3 == p.plant.a1() && p.a3 > 0) {
    out << "observer structure ||A3 - (A1 - B3 D1)|| = " << spectral_norm(c.A3 - (p.plant.A1 - c.B3 * p.plant.D1))
        << "\n";
  }
  const Mat km = r.closed_loop.K * r.closed_loop.M;
  const Index n = r.closed_loop.M.rows();
  out << "||K M (I - K+ K)|| = "
      << spectral_norm(km * (Mat::Identity(n, n) - pinv(r.closed_loop.K) * r.closed_loop.K)) << "\n";

  if (!out_path.empty()) {
    ResultFile rf;
    rf.controller = r.controller;
    rf.certificate = Certificate{r.closed_loop.P, sel.alpha, r.closed_loop.margin, r.closed_loop.K};
    rf.trace_history = sel.ccl.trace_history;
    write_text(out_path, serialize(rf));
    out << "wrote " << out_path << "\n";
  }
  return kOk;
}

int cmd_simulate(const std::string& file, const std::string& result_path, const std::string& out_dir,
                 std::optional<double> dt, std::optional<double> horizon, std::ostream& out) {
  const ProblemFile f = load_problem(file);
  const ResultFile r = load_result(result_path);
  const LoopData d = loop_for(f, r);
  const SimulationSection& s = f.simulation;
  if (!s.s0) throw InvalidInputError("simulation section needs s0");
  if (static_cast<Index>(s.signals.size()) != d.N.cols()) {
    throw InvalidInputError("simulation needs " + std::to_string(d.N.cols()) + " signals, file gives " +
                            std::to_string(s.signals.size()));
  }
  const double step = dt.value_or(s.dt);
  const double T = horizon.value_or(s.horizon);
  const SimulationTrace trace = simulate(d.M, d.N, s.signals, *s.s0, step, T, d.G);
  const MembershipSeries v = membership_series(trace, d.K, r.certificate->P);
  const Cylinder cyl(SymMat(d.K.transpose() * r.certificate->P.matrix() * d.K));

  out << "samples " << trace.times.size() << ", dt " << step << ", T " << T << "\n";
  out << "V(0) = " << v.V.front() << ", V(T) = " << v.V.back() << "\n";
  if (v.entry_time) {
    out << "entry time " << *v.entry_time << ", max V after entry " << v.max_after_entry
        << (v.invariance_violated ? " (INVARIANCE VIOLATED)" : "") << "\n";
  } else {
    out << "trajectory never entered the cylinder\n";
  }
  out << "tail max V " << v.tail_max << "\n";

  std::vector<ProjectionSeries> projections;
  std::vector<CorridorSeries> corridors;
  for (const PlaneAxes& pl : s.planes) {
    projections.push_back(projection_series(trace, cyl, pl));
    corridors.push_back(corridor_series(trace, cyl, pl.first, pl.second));
    out << "plane (" << pl.first + 1 << ", " << pl.second + 1 << "): " << to_string(projections.back().shape.kind)
        << "\n";
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ostringstream a, b, c;
    write_trace_csv(a, trace, v);
    write_projection_csv(b, projections);
    write_corridor_csv(c, trace, corridors);
    write_text(fs::path(out_dir) / "trace.csv", a.str());
    write_text(fs::path(out_dir) / "projection.csv", b.str());
    write_text(fs::path(out_dir) / "corridor.csv", c.str());
    out << "wrote trace.csv, projection.csv, corridor.csv to " << out_dir << "\n";
  }
  return v.entry_time && !v.invariance_violated ? kOk : kInfeasible;
}

int cmd_verify(const std::string& file, const std::string& result_path, std::optional<double> soft_tol,
               std::ostream& out) {
  const ProblemFile f = load_problem(file);
  const ResultFile r = load_result(result_path);
  const LoopData d = loop_for(f, r);
  const Certificate& c = *r.certificate;
  const DisturbedSystem sys(d.M, d.N, d.G);
  const SymMat block(certificate_block(sys, d.K, c.P, c.alpha));
  const DefinitenessReport p_def = definiteness(c.P);
  const double margin = block.dim() > 0 ? max_eigenvalue(block) : -1.0;
  const double norm = spectral_norm(block.matrix());
  const Index n = d.M.rows();
  const double closure = spectral_norm(d.K * d.M * (Mat::Identity(n, n) - pinv(d.K) * d.K));

  out << "P is " << to_string(p_def.kind) << " (eigenvalues in [" << p_def.min_eigenvalue << ", "
      << p_def.max_eigenvalue << "])\n";
  out << "||K M (I - K+ K)|| = " << closure << "\n";
  out << "certificate lambda_max " << margin << ", block norm " << norm << ", ratio " << margin / norm << "\n";
  if (r.controller && f.plant && r.controller->order() == f.plant->a1() && r.controller->order() > 0) {
    const ControllerParams& ctrl = *r.controller;
    out << "observer structure ||A3 - (A1 - B3 D1)|| = "
        << spectral_norm(ctrl.A3 - (f.plant->A1 - ctrl.B3 * f.plant->D1)) << "\n";
  }
  const bool pd = p_def.kind == Definiteness::kPositiveDefinite;
  const bool strict = margin < 0.0;
  const bool soft = soft_tol && margin <= *soft_tol * norm;
  if (pd && strict) {
    out << "certified\n";
    return kOk;
  }
  if (pd && soft) {
    out << "certified within soft tolerance " << *soft_tol << "\n";
    return kOk;
  }
  out << "NOT certified\n";
  return kInfeasible;
}

int cmd_image(const std::string& form, const std::string& map, std::ostream& out) {
  const Cylinder c{SymMat(parse_matrix(form))};
  const Cylinder img = image(c, parse_matrix(map));
  out << "input rank k = " << c.rank() << " in R^" << c.dim() << "\n";
  out << "image rank " << img.rank() << " in R^" << img.dim() << "\n";
  out << "R = " << format_matrix(img.form().matrix()) << "\n";
  return kOk;
}

int cmd_project(const std::string& form, const std::vector<Index>& axes, int points, double extent,
                const std::string& out_path, std::ostream& out) {
  const Cylinder c{SymMat(parse_matrix(form))};
  if (axes.size() != 2) throw InvalidInputError("--axes takes two 1-based coordinates");
  const PlaneAxes pl{axes[0] - 1, axes[1] - 1};
  const ProjectionShape shape = project_to_plane(c, pl);
  out << "kind " << to_string(shape.kind) << "\n";
  out << "R = " << format_matrix(shape.form.matrix()) << "\n";
  const ProjectionBoundary b = projection_boundary(shape, points, extent);
  std::ostringstream csv;
  csv << "curve,index,u,v\n";
  for (std::size_t k = 0; k < b.curves.size(); ++k) {
    for (std::size_t i = 0; i < b.curves[k].size(); ++i) {
      csv << k + 1 << ',' << i << ',' << format_number(b.curves[k][i].x()) << ','
          << format_number(b.curves[k][i].y()) << '\n';
    }
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_text(out_path, csv.str());
    out << "wrote " << out_path << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attracting-cylinder analysis, controller synthesis and simulation"};
  app.name("acyl");
  app.require_subcommand(1);

  std::string file, out_path, result_path, out_dir;
  bool paper_mode = false, no_refine = false;
  std::vector<double> grid;
  std::optional<double> stop_tol, dt, horizon, soft_tol;
  std::optional<int> max_iterations;

  auto* analyze = app.add_subcommand("analyze", "Find an attracting cylinder for the system section");
  analyze->add_option("file", file, "Problem file")->required()->check(CLI::ExistingFile);
  analyze->add_option("-o,--output", out_path, "Write the certificate to this file");
  analyze->add_option("--alpha-grid", grid, "Alpha values to try")->delimiter(',');
  analyze->add_flag("--paper-mode", paper_mode, "Use options.paper_alpha only");
  analyze->add_flag("--no-refine", no_refine, "Skip the golden-section refinement of alpha");

  auto* synth = app.add_subcommand("synthesize", "Synthesize a controller for the plant/target sections");
  synth->add_option("file", file, "Problem file")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--output", out_path, "Write controller and certificate to this file");
  synth->add_option("--alpha-grid", grid, "Alpha values to try")->delimiter(',');
  synth->add_flag("--paper-mode", paper_mode, "Use options.paper_alpha only");
  synth->add_option("--stop-tol", stop_tol, "Cone complementarity stop tolerance");
  synth->add_option("--max-iterations", max_iterations, "Cone complementarity iteration cap");

  auto* sim = app.add_subcommand("simulate", "Simulate the closed loop and write CSV files");
  sim->add_option("file", file, "Problem file")->required()->check(CLI::ExistingFile);
  sim->add_option("-r,--result", result_path, "Result file from analyze or synthesize")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("-d,--out-dir", out_dir, "Directory for trace.csv, projection.csv, corridor.csv");
  sim->add_option("--dt", dt, "Step size");
  sim->add_option("--T", horizon, "Horizon");

  auto* verify = app.add_subcommand("verify", "Check a stored certificate by eigenvalues");
  verify->add_option("file", file, "Problem file")->required()->check(CLI::ExistingFile);
  verify->add_option("-r,--result", result_path, "Result file")->required()->check(CLI::ExistingFile);
  verify->add_option("--soft-tol", soft_tol, "Accept lambda_max <= tol * ||block||");

  auto* geom = app.add_subcommand("geometry", "Cylinder images and plane projections");
  geom->require_subcommand(1);
  std::string form, map;
  std::vector<Index> axes;
  int points = 200;
  double extent = 10.0;
  auto* img = geom->add_subcommand("image", "Image of {x : x^T Q x <= 1} under a full-row-rank map");
  img->add_option("--form", form, "Q as a matrix literal")->required();
  img->add_option("--map", map, "C as a matrix literal")->required();
  auto* proj = geom->add_subcommand("project", "Projection onto a coordinate plane");
  proj->add_option("--form", form, "Q as a matrix literal")->required();
  proj->add_option("--axes", axes, "Two 1-based coordinates")->required()->expected(2)->delimiter(',');
  proj->add_option("--points", points, "Boundary samples");
  proj->add_option("--extent", extent, "Half-length of strip boundary lines");
  proj->add_option("-o,--output", out_path, "Write the boundary CSV here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*analyze) return cmd_analyze(file, out_path, paper_mode, grid, no_refine, out);
    if (*synth) return cmd_synthesize(file, out_path, paper_mode, grid, stop_tol, max_iterations, out);
    if (*sim) return cmd_simulate(file, result_path, out_dir, dt, horizon, out);
    if (*verify) return cmd_verify(file, result_path, soft_tol, out);
    if (*img) return cmd_image(form, map, out);
    if (*proj) return cmd_project(form, axes, points, extent, out_path, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const StructuralError& e) {
    err << "structural failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return kStructural;
  } catch (const RankError& e) {
    err << "structural failure: " << e.what() << "\n";
    return kStructural;
  } catch (const DivergedError& e) {
    err << "simulation diverged: " << e.what() << " (last valid time " << e.last_valid_time() << ")\n";
    return kInfeasible;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NotRealizableError& e) {
    err << "not realizable: " << e.what() << "\n";
    return kInfeasible;
  } catch (const Error& e) {
    err << "invalid input: " << e.what() << "\n";
    return kParse;
  }
  return kUsage;
}

}  // namespace acyl::cli
