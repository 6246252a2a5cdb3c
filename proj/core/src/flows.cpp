/* Copyright 2026 The PulseForge Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "pulseforge/flows.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulseforge/detail/flow_systems.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/integrator.hpp"

namespace pulseforge::flows {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::energy_offset: return "energy-offset";
    case Variant::time_offset: return "time-offset";
    case Variant::amplitude: return "amplitude";
    case Variant::ensemble: return "ensemble";
    case Variant::gate_time: return "gate-time";
  }
  return "unknown";
}

std::string_view to_string(CostKind c) { return c == CostKind::energy ? "energy" : "time"; }

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::energy_offset, Variant::time_offset, Variant::amplitude,
                    Variant::ensemble, Variant::gate_time}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

CostKind parse_cost(std::string_view name) {
  if (name == "energy") return CostKind::energy;
  if (name == "time") return CostKind::time;
  throw ConfigError("unknown cost kind '" + std::string(name) + "'");
}

int landscape_dimension(Variant variant, int order) {
  switch (variant) {
    case Variant::energy_offset:
    case Variant::time_offset:
    case Variant::amplitude: return 2 * order;
    case Variant::ensemble: return 2 * order - 2;
    case Variant::gate_time: return 3 * order + 2;
  }
  return 0;
}

void ShootingPoint::validate() const {
  if (order < 1) throw ConfigError("flow order must be >= 1");
  const auto expected = static_cast<std::size_t>(landscape_dimension(variant, order));
  if (params.size() != expected)
    throw ConfigError(std::string(to_string(variant)) + " at order " + std::to_string(order) +
                      " takes " + std::to_string(expected) + " parameters, got " +
                      std::to_string(params.size()));
  for (double p : params) {
    if (!std::isfinite(p)) throw ConfigError("non-finite shooting parameter");
  }
}

OmegaStack initial_stack(const ShootingPoint& point) {
  point.validate();
  const int n = point.order;
  const auto& p = point.params;
  OmegaStack s;
  switch (point.variant) {
    case Variant::energy_offset:
    case Variant::time_offset: {
      s.vectors.emplace_back(p[0], 0.0, 0.0);
      for (int k = 1; k < n; ++k) s.vectors.emplace_back(p[2 * k - 1], p[2 * k], 0.0);
      const double theta = p[2 * n - 1];
      s.vectors.emplace_back(std::cos(theta), std::sin(theta), 0.0);
      break;
    }
    case Variant::amplitude: {
      s.vectors.emplace_back(1.0, 0.0, 0.0);
      for (int k = 1; k <= n; ++k) s.vectors.emplace_back(p[2 * k - 2], p[2 * k - 1], 0.0);
      break;
    }
    case Variant::ensemble: {
      double sx = 0.0, sy = 0.0;
      for (int k = 1; k < n; ++k) {
        s.vectors.emplace_back(p[2 * k - 2], p[2 * k - 1], 0.0);
        sx += p[2 * k - 2];
        sy += p[2 * k - 1];
      }
      s.vectors.emplace_back(1.0 - sx, -sy, 0.0);
      break;
    }
    case Variant::gate_time: {
      s.vectors.emplace_back(p[0], p[1], p[2]);
      for (int k = 1; k < n; ++k) {
        const auto i = static_cast<std::size_t>(3 * k);
        s.vectors.emplace_back(p[i], p[i + 1], p[i + 2]);
      }
      const double theta = p[static_cast<std::size_t>(3 * n)];
      const double phi = p[static_cast<std::size_t>(3 * n + 1)];
      s.vectors.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                             std::cos(theta));
      break;
    }
  }
  return s;
}

std::vector<Quantity> first_integrals(const FlowContext& ctx, const OmegaStack& state) {
  const auto& w = state.vectors;
  const int n = ctx.order;
  std::vector<Quantity> q;
  auto r_of = [&](const Vec3& v) { return std::hypot(v.x(), v.y()); };
  switch (ctx.variant) {
    case Variant::energy_offset: {
      if (n == 3 && ctx.one_field) {
        q.push_back({"2H", w[0].x() * w[0].x() + 2.0 * w[1].z()});
        q.push_back({"2I", w[2].x() * w[2].x() + 2.0 * w[1].y() * w[3].y() +
                               2.0 * w[1].z() * w[3].z()});
        q.push_back({"2J", w[1].y() * w[1].y() + w[1].z() * w[1].z() +
                               2.0 * w[0].x() * w[2].x() + 2.0 * w[3].z()});
        q.push_back({"|Omega_3yz|^2", w[3].y() * w[3].y() + w[3].z() * w[3].z()});
        break;
      }
      q.push_back({"H", 0.5 * w[0].squaredNorm() + w[1].z()});
      if (n == 1) {
        q.push_back({"l", w[1].squaredNorm()});
      } else if (n == 2) {
        q.push_back({"I", w[1].dot(w[2])});
        q.push_back({"J", 0.5 * w[1].squaredNorm() + w[0].dot(w[2])});
        q.push_back({"K", w[0].dot(w[1]) + w[2].z()});
      }
      q.push_back({"Omega_0z", w[0].z()});
      if (n != 1) q.push_back({"|Omega_N|^2", w[static_cast<std::size_t>(n)].squaredNorm()});
      break;
    }
    case Variant::time_offset: {
      if (ctx.bang_bang) {
        q.push_back({"H", std::abs(w[0].x()) + w[1].z()});
        q.push_back({"l", w[1].y() * w[1].y() + w[1].z() * w[1].z()});
        break;
      }
      q.push_back({"H", r_of(w[0]) + w[1].z()});
      q.push_back({"Omega_0z", w[0].z()});
      q.push_back({"|Omega_N|^2", w[static_cast<std::size_t>(n)].squaredNorm()});
      if (n == 1) q.push_back({"I", w[0].dot(w[1])});
      break;
    }
    case Variant::amplitude: {
      q.push_back({"H", w[0].x() * w[0].x() + w[0].y() * w[0].y()});
      q.push_back({"|Omega_N|^2", w[static_cast<std::size_t>(n)].squaredNorm()});
      if (n == 1) {
        q.push_back({"Omega_0z-Omega_1z", w[0].z() - w[1].z()});
        q.push_back({"I_x", w[0].x() - 2.0 * w[1].x()});
        q.push_back({"I_y", w[0].y() - 2.0 * w[1].y()});
        q.push_back({"J", w[0].dot(w[1])});
        q.push_back({"M", w[1].norm()});
      }
      break;
    }
    case Variant::ensemble: {
      double sx = 0.0, sy = 0.0, drift = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        sx += w[k].x();
        sy += w[k].y();
        drift += ctx.offsets[k] * w[k].z();
        q.push_back({"|l_" + std::to_string(k + 1) + "|^2", w[k].squaredNorm()});
      }
      const double r2 = sx * sx + sy * sy;
      const double h = ctx.cost == CostKind::time ? std::sqrt(r2) + drift : 0.5 * r2 + drift;
      q.push_back({"H", h});
      break;
    }
    case Variant::gate_time: {
      q.push_back({"H", r_of(w[0]) + w[1].z()});
      q.push_back({"|Omega_N|^2", w[static_cast<std::size_t>(n)].squaredNorm()});
      q.push_back({"Omega_0z", w[0].z()});
      break;
    }
  }
  return q;
}

double FirstIntegralAudit::worst() const {
  double w = 0.0;
  for (double d : max_drift) w = std::max(w, d);
  return w;
}

AuditTracker::AuditTracker(FlowContext context, const OmegaStack& initial)
    : context_(std::move(context)) {
  for (auto& q : first_integrals(context_, initial)) {
    audit_.names.push_back(q.name);
    audit_.initial.push_back(q.value);
    audit_.max_drift.push_back(0.0);
  }
}

void AuditTracker::observe(const OmegaStack& state) {
  const auto q = first_integrals(context_, state);
  for (std::size_t i = 0; i < q.size(); ++i) {
    audit_.max_drift[i] = std::max(audit_.max_drift[i], std::abs(q[i].value - audit_.initial[i]));
  }
}

namespace {

std::vector<double> unwrapped_phases(const std::vector<double>& ux, const std::vector<double>& uy) {
  std::vector<double> phi(ux.size());
  for (std::size_t i = 0; i < ux.size(); ++i) {
    phi[i] = std::atan2(uy[i], ux[i]);
    if (i > 0) phi[i] += 2.0 * kPi * std::round((phi[i - 1] - phi[i]) / (2.0 * kPi));
  }
  return phi;
}

// Field samples from values at the grid nodes: each hold interval carries the
// mean of its endpoint values (renormalized for unit-norm controls).
ControlField field_from_nodes(std::vector<double> times, const std::vector<double>& ux,
                              const std::vector<double>& uy, bool unit_norm) {
  const std::size_t n = times.size();
  std::vector<double> hx(n), hy(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    hx[i] = 0.5 * (ux[i] + ux[i + 1]);
    hy[i] = 0.5 * (uy[i] + uy[i + 1]);
    if (unit_norm) {
      const double r = std::hypot(hx[i], hy[i]);
      if (r > 0.0) {
        hx[i] /= r;
        hy[i] /= r;
      } else {
        hx[i] = ux[i];
        hy[i] = uy[i];
      }
    }
  }
  hx[n - 1] = ux[n - 1];
  hy[n - 1] = uy[n - 1];
  if (unit_norm) return ControlField::phase_only(std::move(times), unwrapped_phases(hx, hy));
  return ControlField::general(std::move(times), std::move(hx), std::move(hy));
}

template <class System>
FlowRun integrate_flow(const System& sys, const OmegaStack& init, FlowContext ctx,
                       double t_final, const FlowOptions& opts, bool unit_norm) {
  if (!(t_final > 0.0)) throw ConfigError("flow horizon must be positive");
  FlowRun run;
  run.context = ctx;
  AuditTracker tracker(std::move(ctx), init);
  PackedState y = detail::pack(init);
  const std::size_t n = step_count(t_final, opts.step);
  const double h = t_final / static_cast<double>(n);
  std::vector<double> ux(n + 1), uy(n + 1);
  run.times.resize(n + 1);
  double u[3];
  sys.field(0.0, y.data(), u);
  ux[0] = u[0];
  uy[0] = u[1];
  run.times[0] = 0.0;
  if (opts.record_states) {
    run.states.reserve(n + 1);
    run.states.push_back(init);
  }
  auto rhs = [&sys](double t, const PackedState& s) {
    PackedState d(s.size());
    double uu[3];
    sys.field(t, s.data(), uu);
    sys.derivative(s.data(), uu, d.data());
    return d;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    y = rk4_step(rhs, t, y, h);
    const double t1 = h * static_cast<double>(i + 1);
    run.times[i + 1] = t1;
    sys.field(t1, y.data(), u);
    ux[i + 1] = u[0];
    uy[i + 1] = u[1];
    OmegaStack s = detail::unpack(y.data(), init.vectors.size());
    tracker.observe(s);
    if (opts.record_states) run.states.push_back(std::move(s));
  }
  run.times.back() = t_final;
  run.field = field_from_nodes(run.times, ux, uy, unit_norm);
  run.audit = tracker.audit();
  return run;
}

bool is_one_field(const OmegaStack& s) {
  // u_y = 0 sections of the energy-offset flow at orders 1..3.
  const auto& w = s.vectors;
  const std::size_t n = w.size() - 1;
  auto zero = [](double v) { return std::abs(v) < 1e-12; };
  if (!zero(w[0].y())) return false;
  if (n == 1) return zero(w[1].x());
  if (n == 2) return zero(w[1].x()) && zero(w[2].y());
  if (n == 3) return zero(w[1].x()) && zero(w[2].y()) && zero(w[3].x());
  return false;
}

}  // namespace

FlowContext make_context(const ShootingPoint& point, CostKind ensemble_cost,
                         std::span<const double> offsets) {
  const OmegaStack init = initial_stack(point);
  FlowContext ctx{point.variant, point.order, CostKind::time, {}, false, false};
  switch (point.variant) {
    case Variant::energy_offset:
      ctx.cost = CostKind::energy;
      ctx.one_field = is_one_field(init);
      break;
    case Variant::ensemble:
      ctx.cost = ensemble_cost;
      ctx.offsets.assign(offsets.begin(), offsets.end());
      break;
    default:
      break;
  }
  return ctx;
}

FlowRun flow_energy_offset(const ShootingPoint& point, double t_final, const FlowOptions& opts) {
  if (point.variant != Variant::energy_offset) throw ConfigError("expected an energy-offset point");
  const OmegaStack init = initial_stack(point);
  FlowContext ctx = make_context(point);
  return integrate_flow(detail::OffsetSystem{point.order, CostKind::energy, opts.singular_threshold},
                        init, std::move(ctx), t_final, opts, false);
}

FlowRun flow_time_offset(const ShootingPoint& point, double t_final, const FlowOptions& opts) {
  if (point.variant != Variant::time_offset) throw ConfigError("expected a time-offset point");
  const OmegaStack init = initial_stack(point);
  if (point.order == 1 && std::abs(init.vectors[1].x()) < 1e-12)
    return flow_bang_bang(init.vectors[0].x(), init.vectors[1].y(), t_final, opts);
  FlowContext ctx{Variant::time_offset, point.order, CostKind::time, {}, false, false};
  return integrate_flow(detail::OffsetSystem{point.order, CostKind::time, opts.singular_threshold},
                        init, std::move(ctx), t_final, opts, true);
}

namespace {

// Integrates a system whose control is sign * e_x with sign = sign(S(y)),
// flipping the sign at every zero of S located by bisection on the RK4
// sub-step. `rate` is dS/dt; when sign * S has a minimum inside a step the
// crossing may hide between nodes, so that minimum is checked as well.
// Returns the switching times.
template <class State, class RhsFor, class Switch, class Rate, class Observe>
std::vector<double> integrate_switched(State y, double sign, double t_final, double step,
                                       const RhsFor& rhs_for, const Switch& S, const Rate& rate,
                                       const Observe& observe) {
  std::vector<double> switches;
  const std::size_t n = step_count(t_final, step);
  const double h = t_final / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    State next = rk4_step(rhs_for(sign), t, y, h);
    double bracket = h;
    if (!(S(next) * sign < 0.0) && rate(y) * sign < 0.0 && rate(next) * sign > 0.0) {
      double lo = 0.0, hi = h;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + t); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rate(rk4_step(rhs_for(sign), t, y, mid)) * sign < 0.0) lo = mid; else hi = mid;
      }
      if (S(rk4_step(rhs_for(sign), t, y, hi)) * sign < 0.0) bracket = hi;
    }
    if (S(next) * sign < 0.0 || bracket < h) {
      double lo = 0.0, hi = bracket;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + t); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (S(rk4_step(rhs_for(sign), t, y, mid)) * sign > 0.0) lo = mid; else hi = mid;
      }
      const double tau = 0.5 * (lo + hi);
      const State at_switch = rk4_step(rhs_for(sign), t, y, tau);
      switches.push_back(t + tau);
      sign = -sign;
      next = rk4_step(rhs_for(sign), t + tau, at_switch, h - tau);
    }
    y = next;
    observe(i + 1 == n ? t_final : h * static_cast<double>(i + 1), y);
  }
  return switches;
}

// State (Omega_0x, Omega_1y, Omega_1z) with u_x = sign(Omega_0x). A nonzero omega2x adds the
// constant Omega_2 = (omega2x, 0, 0).
FlowRun bang_bang_run(FlowContext context, const Eigen::Vector3d& y, double omega2x,
                      double t_final, const FlowOptions& opts) {
  if (!(t_final > 0.0)) throw ConfigError("flow horizon must be positive");
  using State = Eigen::Vector3d;
  const double sign = y[0] > 0.0 ? 1.0 : (y[0] < 0.0 ? -1.0 : (y[1] >= 0.0 ? 1.0 : -1.0));
  const bool third = context.order == 2;
  auto to_stack = [third, omega2x](const State& s) {
    OmegaStack st{{Vec3(s[0], 0.0, 0.0), Vec3(0.0, s[1], s[2])}};
    if (third) st.vectors.push_back(Vec3(omega2x, 0.0, 0.0));
    return st;
  };
  FlowRun run;
  run.context = std::move(context);
  AuditTracker tracker(run.context, to_stack(y));
  run.times.push_back(0.0);
  if (opts.record_states) run.states.push_back(to_stack(y));
  auto rhs_for = [omega2x](double s) {
    return [s, omega2x](double, const State& v) -> State {
      return State(v[1], s * v[2] - omega2x, -s * v[1]);
    };
  };
  run.switch_times = integrate_switched(
      y, sign, t_final, opts.step, rhs_for, [](const State& v) { return v[0]; },
      [](const State& v) { return v[1]; },
      [&](double t, const State& v) {
        run.times.push_back(t);
        const OmegaStack st = to_stack(v);
        tracker.observe(st);
        if (opts.record_states) run.states.push_back(st);
      });
  run.field = ControlField::bang_bang(t_final, sign, run.switch_times);
  run.audit = tracker.audit();
  return run;
}

}  // namespace

FlowRun flow_bang_bang(double level, double omega1y_sign, double t_final,
                       const FlowOptions& opts) {
  return bang_bang_run(FlowContext{Variant::time_offset, 1, CostKind::time, {}, true, true},
                       Eigen::Vector3d(level, omega1y_sign < 0.0 ? -1.0 : 1.0, 0.0), 0.0,
                       t_final, opts);
}

FlowRun flow_ensemble_bang_bang(const ShootingPoint& point, std::span<const double> offsets,
                                double t_final, const FlowOptions& opts) {
  if (point.variant != Variant::ensemble) throw ConfigError("expected an ensemble point");
  if (offsets.size() != static_cast<std::size_t>(point.order))
    throw ConfigError("ensemble needs one offset per spin");
  if (!(t_final > 0.0)) throw ConfigError("flow horizon must be positive");
  const OmegaStack init = initial_stack(point);
  std::vector<double> d(offsets.begin(), offsets.end());
  FlowRun run;
  run.context = FlowContext{Variant::ensemble, point.order, CostKind::time, d, false, false};
  AuditTracker tracker(run.context, init);
  const std::size_t count = init.vectors.size();
  run.times.push_back(0.0);
  if (opts.record_states) run.states.push_back(init);
  auto rhs_for = [&d, count](double s) {
    return [&d, count, s](double, const PackedState& v) {
      PackedState dv(v.size());
      for (std::size_t k = 0; k < count; ++k) {
        const double w[3] = {s, 0.0, d[k]};
        detail::cross(v.data() + 3 * k, w, dv.data() + 3 * k);
      }
      return dv;
    };
  };
  auto S = [count](const PackedState& v) {
    double sx = 0.0;
    for (std::size_t k = 0; k < count; ++k) sx += v[3 * k];
    return sx;
  };
  auto rate = [&d, count](const PackedState& v) {
    double r = 0.0;
    for (std::size_t k = 0; k < count; ++k) r += d[k] * v[3 * k + 1];
    return r;
  };
  const PackedState y0 = detail::pack(init);
  const double sign = S(y0) >= 0.0 ? 1.0 : -1.0;
  run.switch_times = integrate_switched(y0, sign, t_final, opts.step, rhs_for, S, rate,
                                        [&](double t, const PackedState& v) {
                                          run.times.push_back(t);
                                          const OmegaStack st = detail::unpack(v.data(), count);
                                          tracker.observe(st);
                                          if (opts.record_states) run.states.push_back(st);
                                        });
  run.field = ControlField::bang_bang(t_final, sign, run.switch_times);
  run.audit = tracker.audit();
  return run;
}

FlowRun flow_amplitude(const ShootingPoint& point, double t_final, const FlowOptions& opts) {
  if (point.variant != Variant::amplitude) throw ConfigError("expected an amplitude point");
  const OmegaStack init = initial_stack(point);
  FlowContext ctx{Variant::amplitude, point.order, CostKind::time, {}, false, false};
  return integrate_flow(detail::AmplitudeSystem{point.order}, init, std::move(ctx), t_final, opts,
                        true);
}

FlowRun flow_ensemble(const ShootingPoint& point, std::span<const double> offsets, CostKind cost,
                      double t_final, const FlowOptions& opts) {
  if (point.variant != Variant::ensemble) throw ConfigError("expected an ensemble point");
  if (offsets.size() != static_cast<std::size_t>(point.order))
    throw ConfigError("ensemble needs one offset per spin");
  const OmegaStack init = initial_stack(point);
  std::vector<double> d(offsets.begin(), offsets.end());
  FlowContext ctx{Variant::ensemble, point.order, cost, d, false, false};
  return integrate_flow(detail::EnsembleSystem{d, cost, opts.singular_threshold}, init,
                        std::move(ctx), t_final, opts, cost == CostKind::time);
}

FlowRun flow_gate(const ShootingPoint& point, double t_final, const FlowOptions& opts) {
  if (point.variant != Variant::gate_time) throw ConfigError("expected a gate-time point");
  const OmegaStack init = initial_stack(point);
  FlowContext ctx{Variant::gate_time, point.order, CostKind::time, {}, false, false};
  // I = 0, Omega_0 on x, Omega_1 in the yz plane and Omega_2 on x: the field stays on the x axis
  // and the switches pass through r = 0.
  const auto& w = init.vectors;
  auto zero = [](double v) { return std::abs(v) < 1e-12; };
  const bool planar = zero(w[0].y()) && zero(w[0].z()) && zero(w[1].x());
  if (planar && point.order == 1)
    return bang_bang_run(std::move(ctx), Eigen::Vector3d(w[0].x(), w[1].y(), w[1].z()), 0.0,
                         t_final, opts);
  if (planar && point.order == 2 && zero(w[2].y()) && zero(w[2].z()))
    return bang_bang_run(std::move(ctx), Eigen::Vector3d(w[0].x(), w[1].y(), w[1].z()),
                         w[2].x(), t_final, opts);
  return integrate_flow(detail::GateSystem{point.order, init.vectors[0].z(), opts.singular_threshold},
                        init, std::move(ctx), t_final, opts, true);
}

}  // namespace pulseforge::flows
