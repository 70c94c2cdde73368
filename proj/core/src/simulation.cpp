#include "acyl/simulation.hpp"

#include "acyl/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace acyl {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_finite_scalar(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidInputError(std::string(what) + " must be finite");
}

}  // namespace

SignalSpec SignalSpec::sine(double amplitude, double omega) {
  require_finite_scalar(amplitude, "sine amplitude");
  require_finite_scalar(omega, "sine frequency");
  SignalSpec s;
  s.kind_ = Kind::kSine;
  s.amplitude_ = amplitude;
  s.omega_ = omega;
  return s;
}

SignalSpec SignalSpec::square(double offset, double amplitude, double omega) {
  require_finite_scalar(offset, "square offset");
  require_finite_scalar(amplitude, "square amplitude");
  require_finite_scalar(omega, "square frequency");
  SignalSpec s;
  s.kind_ = Kind::kSquareSgnSine;
  s.offset_ = offset;
  s.amplitude_ = amplitude;
  s.omega_ = omega;
  return s;
}

SignalSpec SignalSpec::constant(double value) {
  require_finite_scalar(value, "constant signal");
  SignalSpec s;
  s.kind_ = Kind::kConstant;
  s.offset_ = value;
  return s;
}

SignalSpec SignalSpec::sampled(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size()) {
    throw InvalidInputError("sampled signal needs equally many (>= 1) times and values");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    require_finite_scalar(times[i], "sample time");
    require_finite_scalar(values[i], "sample value");
    if (i > 0 && !(times[i] > times[i - 1])) throw InvalidInputError("sample times must increase strictly");
  }
  SignalSpec s;
  s.kind_ = Kind::kSampled;
  s.times_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

double SignalSpec::value(double t) const { return value_between(t, t); }

double SignalSpec::value_between(double t, double inside) const {
  switch (kind_) {
    case Kind::kSine:
      return amplitude_ * std::sin(omega_ * t);
    case Kind::kSquareSgnSine:
      return offset_ + amplitude_ * sgn(std::sin(omega_ * inside));
    case Kind::kConstant:
      return offset_;
    case Kind::kSampled: {
      if (t <= times_.front()) return values_.front();
      if (t >= times_.back()) return values_.back();
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times_.begin());
      const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
      return (1.0 - w) * values_[i - 1] + w * values_[i];
    }
  }
  return 0.0;
}

std::vector<double> SignalSpec::breakpoints(double t0, double t1) const {
  std::vector<double> out;
  if (kind_ == Kind::kSquareSgnSine && omega_ != 0.0) {
    // Zeros of sin(omega t): t = j pi / |omega|.
    const double period = std::numbers::pi / std::abs(omega_);
    for (double j = std::floor(t0 / period) + 1.0;; j += 1.0) {
      const double t = j * period;
      if (t >= t1) break;
      if (t > t0) out.push_back(t);
    }
  } else if (kind_ == Kind::kSampled) {
    for (double t : times_) {
      if (t > t0 && t < t1) out.push_back(t);
    }
  }
  return out;
}

Vec evaluate(const Disturbance& d, double t) {
  Vec f(static_cast<Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) f(static_cast<Index>(i)) = d[i].value(t);
  return f;
}

SimulationTrace simulate(const Mat& m, const Mat& n, const Disturbance& f, const Vec& s0, double dt, double horizon,
                         const std::optional<SymMat>& bound) {
  const Index dim = m.rows();
  if (m.cols() != dim) throw DimensionError("M must be square");
  if (n.rows() != dim || n.cols() != static_cast<Index>(f.size())) {
    throw DimensionError("N must be " + std::to_string(dim) + "x" + std::to_string(f.size()) +
                         " (one column per disturbance channel)");
  }
  if (s0.size() != dim) throw DimensionError("initial state has the wrong dimension");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInputError("dt must be positive");
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw InvalidInputError("horizon must be at least dt");
  if (bound && bound->dim() != n.cols()) throw DimensionError("disturbance bound has the wrong dimension");
  require_finite(m, "M");
  require_finite(n, "N");
  require_finite(s0, "initial state");

  const auto steps = static_cast<Index>(std::llround(horizon / dt));
  const Index channels = n.cols();
  SimulationTrace tr;
  tr.times.resize(static_cast<std::size_t>(steps + 1));
  tr.states.resize(steps + 1, dim);
  tr.disturbances.resize(steps + 1, channels);

  auto record_input = [&](Index k, double t) {
    const Vec fk = evaluate(f, t);
    if (bound && fk.dot(bound->matrix() * fk) > 1.0 + 1e-9) {
      throw InvalidInputError("disturbance violates f^T G f <= 1 at t = " + format_number(t));
    }
    tr.disturbances.row(k) = fk.transpose();
  };

  // RK4 over [a, b] with every channel evaluated as on the open interval.
  auto rk4 = [&](const Vec& s, double a, double b) {
    const double inside = 0.5 * (a + b);
    auto input = [&](double t) {
      Vec v(channels);
      for (Index i = 0; i < channels; ++i) v(i) = f[static_cast<std::size_t>(i)].value_between(t, inside);
      return v;
    };
    const double h = b - a;
    const Vec f0 = input(a), fm = input(a + 0.5 * h), f1 = input(b);
    const Vec k1 = m * s + n * f0;
    const Vec k2 = m * (s + 0.5 * h * k1) + n * fm;
    const Vec k3 = m * (s + 0.5 * h * k2) + n * fm;
    const Vec k4 = m * (s + h * k3) + n * f1;
    return Vec(s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };

  Vec s = s0;
  tr.times[0] = 0.0;
  tr.states.row(0) = s.transpose();
  record_input(0, 0.0);
  for (Index k = 0; k < steps; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    const double t1 = static_cast<double>(k + 1) * dt;
    std::vector<double> cuts;
    for (const SignalSpec& sig : f) {
      const auto b = sig.breakpoints(t0, t1);
      cuts.insert(cuts.end(), b.begin(), b.end());
    }
    std::sort(cuts.begin(), cuts.end());
    double a = t0;
    for (double c : cuts) {
      if (c - a > 1e-14 * dt) {
        s = rk4(s, a, c);
        a = c;
      }
    }
    s = rk4(s, a, t1);
    if (!s.allFinite()) {
      throw DivergedError("simulation diverged after t = " + format_number(t0), t0);
    }
    tr.times[static_cast<std::size_t>(k + 1)] = t1;
    tr.states.row(k + 1) = s.transpose();
    record_input(k + 1, t1);
  }
  return tr;
}

MembershipSeries membership_series(const SimulationTrace& trace, const Mat& k, const SymMat& p,
                                   double tail_fraction) {
  if (k.cols() != trace.states.cols()) throw DimensionError("K does not match the state dimension");
  if (p.dim() != k.rows()) throw DimensionError("P does not match the rows of K");
  MembershipSeries out;
  const Index samples = trace.states.rows();
  out.V.resize(static_cast<std::size_t>(samples));
  for (Index i = 0; i < samples; ++i) {
    const Vec z = k * trace.states.row(i).transpose();
    out.V[static_cast<std::size_t>(i)] = z.dot(p.matrix() * z);
  }
  for (std::size_t i = 0; i < out.V.size(); ++i) {
    if (!out.entry_index && out.V[i] <= 1.0) {
      out.entry_index = i;
      out.entry_time = trace.times[i];
    }
    if (out.entry_index) out.max_after_entry = std::max(out.max_after_entry, out.V[i]);
  }
  out.invariance_violated = out.entry_index && out.max_after_entry > 1.0 + MembershipSeries::kInvarianceTol;
  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(out.V.size())));
  const std::size_t start = out.V.size() - std::min(out.V.size(), std::max<std::size_t>(tail, 1));
  out.tail_max = out.V.empty() ? 0.0 : *std::max_element(out.V.begin() + static_cast<std::ptrdiff_t>(start), out.V.end());
  return out;
}

double lyapunov_decay_excess(const SimulationTrace& trace, const Mat& m, const Mat& n, const Mat& k, const SymMat& p,
                             double alpha, const SymMat& g) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < trace.states.rows(); ++i) {
    const Vec s = trace.states.row(i).transpose();
    const Vec f = trace.disturbances.row(i).transpose();
    const Vec z = k * s;
    const Vec pz = p.matrix() * z;
    const double v = z.dot(pz);
    const double vdot = 2.0 * pz.dot(k * (m * s + n * f));
    worst = std::max(worst, vdot + alpha * v - alpha * f.dot(g.matrix() * f));
  }
  return worst;
}

ProjectionSeries projection_series(const SimulationTrace& trace, const Cylinder& c, PlaneAxes axes,
                                   int boundary_points) {
  if (trace.states.cols() != c.dim()) throw DimensionError("cylinder does not match the state dimension");
  ProjectionSeries out;
  out.axes = axes;
  out.shape = project_to_plane(c, axes);
  double extent = 1.0;
  out.points.reserve(static_cast<std::size_t>(trace.states.rows()));
  for (Index i = 0; i < trace.states.rows(); ++i) {
    const Eigen::Vector2d pt(trace.states(i, axes.first), trace.states(i, axes.second));
    out.points.push_back(pt);
    extent = std::max(extent, pt.norm());
  }
  out.boundary = projection_boundary(out.shape, boundary_points, 1.1 * extent);
  return out;
}

CorridorSeries corridor_series(const SimulationTrace& trace, const Cylinder& c, Index coordinate, Index reference) {
  if (trace.states.cols() != c.dim()) throw DimensionError("cylinder does not match the state dimension");
  const ProjectionShape shape = project_to_plane(c, PlaneAxes{coordinate, reference});
  const Mat& r = shape.form.matrix();
  const double r11 = r(0, 0), r12 = r(0, 1), r22 = r(1, 1);
  const double inf = std::numeric_limits<double>::infinity();
  const double tiny = 1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff());

  CorridorSeries out;
  out.coordinate = coordinate;
  out.reference = reference;
  out.lower.reserve(trace.times.size());
  out.upper.reserve(trace.times.size());
  for (Index i = 0; i < trace.states.rows(); ++i) {
    const double v = trace.states(i, reference);
    if (r11 <= tiny) {
      // The form does not see this coordinate.
      const bool ok = r22 * v * v <= 1.0;
      out.lower.push_back(ok ? -inf : std::nan(""));
      out.upper.push_back(ok ? inf : std::nan(""));
      continue;
    }
    const double center = -r12 * v / r11;
    const double rad2 = (1.0 - (r22 - r12 * r12 / r11) * v * v) / r11;
    if (rad2 < 0.0) {
      out.lower.push_back(std::nan(""));
      out.upper.push_back(std::nan(""));
    } else {
      const double rad = std::sqrt(rad2);
      out.lower.push_back(center - rad);
      out.upper.push_back(center + rad);
    }
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace, const MembershipSeries& v) {
  os << "t";
  for (Index j = 0; j < trace.states.cols(); ++j) os << ",s" << (j + 1);
  for (Index j = 0; j < trace.disturbances.cols(); ++j) os << ",f" << (j + 1);
  os << ",V\n";
  for (Index i = 0; i < trace.states.rows(); ++i) {
    os << format_number(trace.times[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < trace.states.cols(); ++j) os << ',' << format_number(trace.states(i, j));
    for (Index j = 0; j < trace.disturbances.cols(); ++j) os << ',' << format_number(trace.disturbances(i, j));
    os << ',' << format_number(v.V[static_cast<std::size_t>(i)]) << '\n';
  }
}

void write_projection_csv(std::ostream& os, const std::vector<ProjectionSeries>& series) {
  os << "axis_u,axis_v,kind,series,index,u,v\n";
  for (const ProjectionSeries& p : series) {
    const std::string head = std::to_string(p.axes.first + 1) + ',' + std::to_string(p.axes.second + 1) + ',' +
                             to_string(p.shape.kind) + ',';
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      os << head << "trajectory," << i << ',' << format_number(p.points[i].x()) << ','
         << format_number(p.points[i].y()) << '\n';
    }
    for (std::size_t c = 0; c < p.boundary.curves.size(); ++c) {
      const auto& curve = p.boundary.curves[c];
      for (std::size_t i = 0; i < curve.size(); ++i) {
        os << head << "boundary" << (c + 1) << ',' << i << ',' << format_number(curve[i].x()) << ','
           << format_number(curve[i].y()) << '\n';
      }
    }
  }
}

void write_corridor_csv(std::ostream& os, const SimulationTrace& trace, const std::vector<CorridorSeries>& bands) {
  os << "coordinate,reference,t,value,reference_value,lower,upper\n";
  for (const CorridorSeries& b : bands) {
    for (Index i = 0; i < trace.states.rows(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      os << (b.coordinate + 1) << ',' << (b.reference + 1) << ',' << format_number(trace.times[k]) << ','
         << format_number(trace.states(i, b.coordinate)) << ',' << format_number(trace.states(i, b.reference)) << ','
         << format_number(b.lower[k]) << ',' << format_number(b.upper[k]) << '\n';
    }
  }
}

}  // namespace acyl
