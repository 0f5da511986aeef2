// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include "husimi/classical_flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "husimi/errors.hpp"
#include "husimi/parallel.hpp"

namespace husimi {

namespace {

// zeta plus the running exponent lambda = 2 int Gamma ds.
struct FlowState {
  Complex zeta;
  double lambda = 0.0;
};

inline bool finite(const FlowState& s) {
  return std::isfinite(s.zeta.real()) && std::isfinite(s.zeta.imag()) &&
         std::isfinite(s.lambda);
}

inline FlowState derivative(const Hamiltonian& h, const FlowState& s) {
  const FlowSample f = h.flow_sample(s.zeta);
  return {f.dzeta, 2.0 * f.gamma};
}

inline FlowState axpy(const FlowState& s, double a, const FlowState& k) {
  return {{s.zeta.real() + a * k.zeta.real(), s.zeta.imag() + a * k.zeta.imag()},
          s.lambda + a * k.lambda};
}

FlowState rk4_step(const Hamiltonian& h, const FlowState& s, double step) {
  const FlowState k1 = derivative(h, s);
  const FlowState k2 = derivative(h, axpy(s, 0.5 * step, k1));
  const FlowState k3 = derivative(h, axpy(s, 0.5 * step, k2));
  const FlowState k4 = derivative(h, axpy(s, step, k3));
  const double w = step / 6.0;
  return {{s.zeta.real() + w * (k1.zeta.real() + 2.0 * k2.zeta.real() +
                                2.0 * k3.zeta.real() + k4.zeta.real()),
           s.zeta.imag() + w * (k1.zeta.imag() + 2.0 * k2.zeta.imag() +
                                2.0 * k3.zeta.imag() + k4.zeta.imag())},
          s.lambda + w * (k1.lambda + 2.0 * k2.lambda + 2.0 * k3.lambda + k4.lambda)};
}

long step_count(double duration, double dt) {
  const double n = std::ceil(std::abs(duration) / dt - 1e-9);
  return std::max(1L, static_cast<long>(n));
}

struct Diverged {
  double time;
};

using OdeState = std::array<double, 3>;

// Advances `s` by `duration` (either sign). Calls observe(t, state) after every
// accepted step. Throws Diverged when the state stops being finite.
template <typename Observer>
void advance(const Hamiltonian& h, FlowState& s, double t0, double duration,
             const IntegratorSettings& settings, Observer&& observe) {
  if (duration == 0.0) return;
  if (settings.scheme == Scheme::kRk4) {
    const long n = step_count(duration, settings.dt);
    const double step = duration / static_cast<double>(n);
    for (long k = 1; k <= n; ++k) {
      s = rk4_step(h, s, step);
      const double t = t0 + duration * (static_cast<double>(k) / static_cast<double>(n));
      if (!finite(s)) throw Diverged{t};
      observe(t, s);
    }
    return;
  }
  namespace odeint = boost::numeric::odeint;
  auto rhs = [&h](const OdeState& x, OdeState& dxdt, double t) {
    const FlowState d = derivative(h, {{x[0], x[1]}, x[2]});
    dxdt = {d.zeta.real(), d.zeta.imag(), d.lambda};
    if (!std::isfinite(dxdt[0]) || !std::isfinite(dxdt[1]) || !std::isfinite(dxdt[2])) {
      throw Diverged{t};
    }
  };
  OdeState x{s.zeta.real(), s.zeta.imag(), s.lambda};
  auto stepper = odeint::make_controlled(settings.rk45_tol, settings.rk45_tol,
                                         odeint::runge_kutta_dopri5<OdeState>());
  const double t1 = t0 + duration;
  const double first = std::copysign(std::min(settings.dt, std::abs(duration)), duration);
  odeint::integrate_adaptive(stepper, rhs, x, t0, t1, first,
                             [&](const OdeState& y, double t) {
                               if (t == t0) return;
                               observe(t, FlowState{{y[0], y[1]}, y[2]});
                             });
  s = {{x[0], x[1]}, x[2]};
  if (!finite(s)) throw Diverged{t1};
}

BacktraceResult finish(const FlowState& s, double max_log_w) {
  // The sweep ran backwards in time, so lambda holds -2 int_0^t Gamma ds.
  BacktraceResult r{PhasePoint::from_z(s.zeta), -s.lambda, BacktraceStatus::kOk};
  if (std::abs(r.log_w) > max_log_w) {
    r.log_w = std::copysign(max_log_w, r.log_w);
    r.status = BacktraceStatus::kSaturated;
  }
  return r;
}

}  // namespace

void IntegratorSettings::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integrator dt must be > 0");
  if (!(rk45_tol > 0.0)) throw ConfigError("integrator rk45_tol must be > 0");
  if (!(max_log_w > 0.0)) throw ConfigError("integrator max_log_w must be > 0");
}

Trajectory integrate_characteristic(const Hamiltonian& h, PhasePoint start, double t_final,
                                    const IntegratorSettings& settings) {
  settings.validate();
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.points.push_back(start);
  traj.log_w.push_back(0.0);
  FlowState s{start.z(), 0.0};
  try {
    advance(h, s, 0.0, t_final, settings, [&](double t, const FlowState& y) {
      traj.times.push_back(t);
      traj.points.push_back(PhasePoint::from_z(y.zeta));
      traj.log_w.push_back(y.lambda);
    });
  } catch (const Diverged& d) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "characteristic from (q=%g, p=%g) diverged at t=%.6g", start.q, start.p,
                  d.time);
    throw NonFiniteError(buf, d.time);
  }
  return traj;
}

std::vector<BacktraceResult> backtrace_times(const Hamiltonian& h, PhasePoint z,
                                             std::span<const double> times,
                                             const IntegratorSettings& settings) {
  std::vector<BacktraceResult> out;
  out.reserve(times.size());
  FlowState s{z.z(), 0.0};
  double elapsed = 0.0;
  bool diverged = false;
  for (double t : times) {
    if (!(t >= elapsed)) {
      throw ConfigError("backtrace times must be non-negative and non-decreasing");
    }
    if (!diverged) {
      try {
        advance(h, s, -elapsed, -(t - elapsed), settings, [](double, const FlowState&) {});
      } catch (const Diverged&) {
        diverged = true;
      }
    }
    elapsed = t;
    if (diverged) {
      out.push_back({PhasePoint{std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN()},
                     std::numeric_limits<double>::quiet_NaN(), BacktraceStatus::kNonFinite});
    } else if (t == 0.0) {
      out.push_back({z, 0.0, BacktraceStatus::kOk});
    } else {
      out.push_back(finish(s, settings.max_log_w));
    }
  }
  return out;
}

BacktraceResult backtrace(const Hamiltonian& h, PhasePoint z, double t,
                          const IntegratorSettings& settings) {
  settings.validate();
  if (!(t >= 0.0)) throw ConfigError("backtrace requires t >= 0");
  const double times[] = {t};
  return backtrace_times(h, z, times, settings).front();
}

std::size_t BacktraceField::invalid_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok(); }));
}

std::vector<BacktraceField> backtrace_grid(const Hamiltonian& h, const PhaseGrid& grid,
                                           std::span<const double> times,
                                           const IntegratorSettings& settings,
                                           int threads) {
  grid.validate();
  settings.validate();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || (k > 0 && !(times[k] >= times[k - 1]))) {
      throw ConfigError("backtrace times must be non-negative and non-decreasing");
    }
  }
  std::vector<BacktraceField> out(times.size());
  const std::string digest = h.digest();
  for (std::size_t k = 0; k < times.size(); ++k) {
    out[k].grid = grid;
    out[k].time = times[k];
    out[k].digest = digest;
    out[k].cells.resize(grid.size());
  }
  parallel_for(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto res = backtrace_times(h, grid.point(i), times, settings);
      for (std::size_t k = 0; k < times.size(); ++k) out[k].cells[i] = res[k];
    }
  });
  return out;
}

ScalarField classical_husimi(const BacktraceField& traces, const InitialHusimi& q0) {
  ScalarField f(traces.grid, {FieldKind::kHusimiClassical, traces.time, traces.digest, 1.0});
  for (std::size_t i = 0; i < traces.cells.size(); ++i) {
    const BacktraceResult& c = traces.cells[i];
    if (!c.ok()) {
      f.invalidate(i);
      continue;
    }
    const double q = q0(c.zeta0);
    f.values[i] = q > 0.0 ? std::exp(std::log(q) + c.log_w) : 0.0;
    if (!std::isfinite(f.values[i])) f.invalidate(i);
  }
  return f;
}

ScalarField classical_husimi(const Hamiltonian& h, const InitialHusimi& q0,
                             const PhaseGrid& grid, double t,
                             const IntegratorSettings& settings, int threads) {
  const double times[] = {t};
  return classical_husimi(backtrace_grid(h, grid, times, settings, threads).front(), q0);
}

NormLandscape norm_landscape(const BacktraceField& traces) {
  NormLandscape out{
      ScalarField(traces.grid, {FieldKind::kNormLandscape, traces.time, traces.digest, 1.0}),
      ScalarField(traces.grid,
                  {FieldKind::kLogNormLandscape, traces.time, traces.digest, 1.0})};
  for (std::size_t i = 0; i < traces.cells.size(); ++i) {
    const BacktraceResult& c = traces.cells[i];
    if (!c.ok()) {
      out.w.invalidate(i);
      out.log_w.invalidate(i);
      continue;
    }
    out.w.values[i] = std::exp(c.log_w);
    out.log_w.values[i] = c.log_w;
  }
  return out;
}

NormLandscape norm_landscape(const Hamiltonian& h, const PhaseGrid& grid, double t,
                             const IntegratorSettings& settings, int threads) {
  const double times[] = {t};
  return norm_landscape(backtrace_grid(h, grid, times, settings, threads).front());
}

// ---------------------------------------------------------------------------
// Fixed points

std::string_view to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::kCenter: return "center";
    case FixedPointKind::kStableSpiral: return "stable_spiral";
    case FixedPointKind::kUnstableSpiral: return "unstable_spiral";
    case FixedPointKind::kStableNode: return "stable_node";
    case FixedPointKind::kUnstableNode: return "unstable_node";
    case FixedPointKind::kSaddle: return "saddle";
    case FixedPointKind::kDegenerate: return "degenerate";
  }
  return "unknown";
}

FixedPointKind classify_linearization(const FlowJacobian& j) {
  const double tr = j.dq_dq + j.dp_dp;
  const double det = j.dq_dq * j.dp_dp - j.dq_dp * j.dp_dq;
  const double scale = std::max({std::abs(j.dq_dq), std::abs(j.dq_dp), std::abs(j.dp_dq),
                                 std::abs(j.dp_dp), 1e-300});
  const double eps = 1e-9 * scale;
  if (std::abs(det) <= eps * scale) return FixedPointKind::kDegenerate;
  if (det < 0.0) return FixedPointKind::kSaddle;
  const double disc = tr * tr - 4.0 * det;
  if (disc < 0.0) {
    if (std::abs(tr) <= eps) return FixedPointKind::kCenter;
    return tr > 0.0 ? FixedPointKind::kUnstableSpiral : FixedPointKind::kStableSpiral;
  }
  return tr > 0.0 ? FixedPointKind::kUnstableNode : FixedPointKind::kStableNode;
}

FixedPointSearch find_fixed_points(const Hamiltonian& h, std::span<const PhasePoint> seeds,
                                   double tol) {
  if (!(tol > 0.0)) throw ConfigError("fixed point tolerance must be > 0");
  FixedPointSearch out;
  std::vector<FixedPoint> found;
  for (const PhasePoint& seed : seeds) {
    PhasePoint x = seed;
    bool failed = false;
    for (int iter = 0; iter < 100; ++iter) {
      const Velocity v = h.flow_velocity(x);
      const FlowJacobian j = h.flow_jacobian(x);
      const double det = j.dq_dq * j.dp_dp - j.dq_dp * j.dp_dq;
      if (det == 0.0 || !std::isfinite(det)) {
        failed = true;
        break;
      }
      const double sq = (j.dp_dp * v.dq - j.dq_dp * v.dp) / det;
      const double sp = (-j.dp_dq * v.dq + j.dq_dq * v.dp) / det;
      x.q -= sq;
      x.p -= sp;
      if (!std::isfinite(x.q) || !std::isfinite(x.p) || std::hypot(x.q, x.p) > 1e8) {
        failed = true;
        break;
      }
      if (std::hypot(sq, sp) <= 1e-15 * (1.0 + std::hypot(x.q, x.p))) break;
    }
    if (failed) {
      ++out.nonconvergent;
      continue;
    }
    const Velocity v = h.flow_velocity(x);
    const double residual = std::hypot(v.dq, v.dp);
    if (!(residual <= tol)) {
      ++out.nonconvergent;
      continue;
    }
    const FlowJacobian j = h.flow_jacobian(x);
    const double tr = j.dq_dq + j.dp_dp;
    const double det = j.dq_dq * j.dp_dp - j.dq_dp * j.dp_dq;
    const Complex root = std::sqrt(Complex{tr * tr - 4.0 * det, 0.0});
    FixedPoint fp{x, {0.5 * (tr + root), 0.5 * (tr - root)}, residual,
                  classify_linearization(j)};
    auto dup = std::find_if(found.begin(), found.end(), [&](const FixedPoint& o) {
      return std::hypot(o.location.q - x.q, o.location.p - x.p) <= tol;
    });
    if (dup == found.end()) {
      found.push_back(fp);
    } else if (fp.residual < dup->residual) {
      *dup = fp;
    }
  }
  std::sort(found.begin(), found.end(), [](const FixedPoint& a, const FixedPoint& b) {
    return a.location.q != b.location.q ? a.location.q < b.location.q
                                        : a.location.p < b.location.p;
  });
  out.points = std::move(found);
  return out;
}

std::vector<PhasePoint> seed_lattice(const PhaseGrid& grid, int per_axis) {
  PhaseGrid seeds = grid;
  seeds.nq = per_axis;
  seeds.np = per_axis;
  seeds.validate();
  std::vector<PhasePoint> out;
  out.reserve(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) out.push_back(seeds.point(i));
  return out;
}

// ---------------------------------------------------------------------------
// Orbit period

OrbitReturn orbit_period(const Hamiltonian& h, PhasePoint start,
                         const IntegratorSettings& settings, double horizon) {
  settings.validate();
  const Velocity v0 = h.flow_velocity(start);
  const double speed = std::hypot(v0.dq, v0.dp);
  if (speed == 0.0) throw NoReturnError("orbit_period: start is a fixed point");
  auto section = [&](const FlowState& s) {
    const PhasePoint x = PhasePoint::from_z(s.zeta);
    return ((x.q - start.q) * v0.dq + (x.p - start.p) * v0.dp) / speed;
  };
  auto distance = [&](const FlowState& s) {
    const PhasePoint x = PhasePoint::from_z(s.zeta);
    return std::hypot(x.q - start.q, x.p - start.p);
  };

  const double step = settings.dt;
  FlowState s{start.z(), 0.0};
  double t = 0.0;
  double g = 0.0;
  double farthest = 0.0;
  while (t < horizon) {
    const FlowState next = rk4_step(h, s, step);
    if (!finite(next)) throw NoReturnError("orbit_period: trajectory diverged");
    const double g_next = section(next);
    farthest = std::max(farthest, distance(next));
    // Crossing in the direction of the initial velocity, near the start.
    if (g < 0.0 && g_next >= 0.0 && distance(next) < 0.5 * farthest) {
      // Secant refinement on the sub-step length, seeded by linear interpolation.
      double a = 0.0;
      double ga = g;
      double b = step;
      double gb = g_next;
      double tau = step * g / (g - g_next);
      FlowState hit = rk4_step(h, s, tau);
      for (int iter = 0; iter < 50; ++iter) {
        const double gt = section(hit);
        if (std::abs(gt) < 1e-15 * (1.0 + farthest)) break;
        if ((gt < 0.0) == (ga < 0.0)) {
          a = tau;
          ga = gt;
        } else {
          b = tau;
          gb = gt;
        }
        const double next_tau = a - ga * (b - a) / (gb - ga);
        if (next_tau == tau) break;
        tau = next_tau;
        hit = rk4_step(h, s, tau);
      }
      return {t + tau, PhasePoint::from_z(hit.zeta), hit.lambda};
    }
    s = next;
    g = g_next;
    t += step;
  }
  throw NoReturnError("orbit_period: no return within the horizon");
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::string text = "t,q,p,log_w\n";
  char buf[160];
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", traj.times[k],
                  traj.points[k].q, traj.points[k].p, traj.log_w[k]);
    text += buf;
  }
  write_file_atomic(path, text);
}

}  // namespace husimi
