#pragma once

// Fixed-step RK4 simulation of s' = M s + N f(t) and the post-processing
// used for plots: membership values V = (Ks)^T P (Ks), trajectory
// projections with the projected cylinder boundary, and per-coordinate
// corridors.

#include "acyl/cylinder.hpp"
#include "acyl/linalg.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace acyl {

/// One disturbance channel.
class SignalSpec {
 public:
  enum class Kind { kSine, kSquareSgnSine, kConstant, kSampled };

  /// amplitude * sin(omega t)
  static SignalSpec sine(double amplitude, double omega);
  /// offset + amplitude * sgn(sin(omega t)), sgn(0) = 0
  static SignalSpec square(double offset, double amplitude, double omega);
  static SignalSpec constant(double value);
  /// Linear interpolation, held constant outside [times.front(), times.back()].
  static SignalSpec sampled(std::vector<double> times, std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }
  double omega() const noexcept { return omega_; }
  double offset() const noexcept { return offset_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double value(double t) const;
  /// Value on an open interval free of breakpoints, identified by an interior
  /// time `inside`. Differs from value(t) only for the square wave, whose
  /// sign is taken at `inside` so the interval sees no jump.
  double value_between(double t, double inside) const;
  /// Points in (t0, t1) where the signal jumps or has a kink, ascending.
  std::vector<double> breakpoints(double t0, double t1) const;

  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;

 private:
  Kind kind_ = Kind::kConstant;
  double amplitude_ = 0.0;
  double omega_ = 0.0;
  double offset_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

using Disturbance = std::vector<SignalSpec>;

Vec evaluate(const Disturbance& d, double t);

struct SimulationTrace {
  std::vector<double> times;  ///< uniform grid k * dt
  Mat states;                 ///< one row per time
  Mat disturbances;           ///< one row per time, f(t_k)
};

/// Classical RK4 on the uniform grid; steps that straddle a signal breakpoint
/// are split there. When `bound` is given every sample must satisfy
/// f^T G f <= 1 + 1e-9 (InvalidInputError otherwise). Throws DivergedError
/// when the state becomes non-finite.
SimulationTrace simulate(const Mat& m, const Mat& n, const Disturbance& f, const Vec& s0, double dt, double horizon,
                         const std::optional<SymMat>& bound = std::nullopt);

struct MembershipSeries {
  static constexpr double kInvarianceTol = 1e-6;

  std::vector<double> V;
  std::optional<std::size_t> entry_index;  ///< first sample with V <= 1
  std::optional<double> entry_time;
  double max_after_entry = 0.0;
  bool invariance_violated = false;  ///< some V > 1 + kInvarianceTol after entry
  double tail_max = 0.0;             ///< max V over the last `tail_fraction` of samples
};

MembershipSeries membership_series(const SimulationTrace& trace, const Mat& k, const SymMat& p,
                                   double tail_fraction = 0.2);

/// max over samples of V' + alpha V - alpha f^T G f with V' = 2 (Ks)^T P K (Ms + Nf).
double lyapunov_decay_excess(const SimulationTrace& trace, const Mat& m, const Mat& n, const Mat& k, const SymMat& p,
                             double alpha, const SymMat& g);

struct ProjectionSeries {
  PlaneAxes axes;
  std::vector<Eigen::Vector2d> points;
  ProjectionShape shape;
  ProjectionBoundary boundary;
};

/// Trajectory in the (first, second) coordinate plane plus the boundary of
/// the projected cylinder, sized to cover the trajectory.
ProjectionSeries projection_series(const SimulationTrace& trace, const Cylinder& c, PlaneAxes axes,
                                   int boundary_points = 200);

/// Band for coordinate `coordinate` given the simulated value of `reference`:
/// all u with (u, s_ref(t)) inside the projection of the cylinder. Bounds
/// are +/-inf when unconstrained and NaN when the slice is empty.
struct CorridorSeries {
  Index coordinate = 0;
  Index reference = 1;
  std::vector<double> lower;
  std::vector<double> upper;
};

CorridorSeries corridor_series(const SimulationTrace& trace, const Cylinder& c, Index coordinate, Index reference);

/// CSV writers; numbers use the shortest round-trip form so output is reproducible.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace, const MembershipSeries& v);
void write_projection_csv(std::ostream& os, const std::vector<ProjectionSeries>& series);
void write_corridor_csv(std::ostream& os, const SimulationTrace& trace, const std::vector<CorridorSeries>& bands);

/// Shortest round-trip decimal form of a double ("inf", "-inf", "nan" for
/// non-finite values).
std::string format_number(double v);

}  // namespace acyl
