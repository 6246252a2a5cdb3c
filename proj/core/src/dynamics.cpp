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

#include "pulseforge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pulseforge/detail/cascade_rhs.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/parallel.hpp"

namespace pulseforge::dynamics {

namespace {

void check_horizon(const ControlField& field, double t_final) {
  if (field.empty()) throw RangeError("empty control field");
  if (t_final < 0.0) throw RangeError("negative final time");
  if (t_final > field.duration() * (1.0 + 1e-12) + 1e-12)
    throw RangeError("t_final = " + std::to_string(t_final) + " exceeds field duration " +
                     std::to_string(field.duration()));
}

// Walks every RK4 step of a zero-order-hold field. step(t, h, w) advances the
// caller's state with the constant rotation vector w over [t, t + h].
template <class StepFn>
void for_each_step(const ControlField& field, Inhomogeneity inhom, double t_final, double step,
                   StepFn&& step_fn) {
  const double scale = 1.0 + inhom.amplitude;
  field.for_each_segment(t_final, [&](double a, double b, FieldValue u) {
    const Vec3 w(scale * u.ux, scale * u.uy, inhom.offset);
    const std::size_t n = step_count(b - a, step);
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) step_fn(a + static_cast<double>(i) * h, h, w);
  });
}

}  // namespace

BlochTrajectory propagate_bloch(const ControlField& field, Inhomogeneity inhom,
                                const BlochVector& q0, double t_final,
                                const PropagationOptions& options) {
  check_horizon(field, t_final);
  BlochTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(q0);
  Vec3 q = q0;
  for_each_step(field, inhom, t_final, options.step, [&](double t, double h, const Vec3& w) {
    auto rhs = [&w](double, const Vec3& y) -> Vec3 { return y.cross(w); };
    q = rk4_step(rhs, t, q, h);
    traj.times.push_back(t + h);
    traj.states.push_back(q);
  });
  return traj;
}

BlochVector propagate_bloch_final(const ControlField& field, Inhomogeneity inhom,
                                  const BlochVector& q0, double t_final,
                                  const PropagationOptions& options) {
  check_horizon(field, t_final);
  Vec3 q = q0;
  for_each_step(field, inhom, t_final, options.step, [&](double t, double h, const Vec3& w) {
    auto rhs = [&w](double, const Vec3& y) -> Vec3 { return y.cross(w); };
    q = rk4_step(rhs, t, q, h);
  });
  return q;
}

Mat3 propagate_rotation(const ControlField& field, Inhomogeneity inhom, double t_final,
                        const PropagationOptions& options) {
  check_horizon(field, t_final);
  Mat3 r = Mat3::Identity();
  for_each_step(field, inhom, t_final, options.step, [&](double t, double h, const Vec3& w) {
    for (int c = 0; c < 3; ++c) {
      auto rhs = [&w](double, const Vec3& y) -> Vec3 { return y.cross(w); };
      r.col(c) = rk4_step(rhs, t, Vec3(r.col(c)), h);
    }
  });
  return r;
}

std::string_view to_string(CascadeMode mode) {
  switch (mode) {
    case CascadeMode::state_offset: return "state-offset";
    case CascadeMode::state_amplitude: return "state-amplitude";
    case CascadeMode::gate_offset: return "gate-offset";
  }
  return "unknown";
}

CascadeMode parse_cascade_mode(std::string_view name) {
  if (name == "state-offset") return CascadeMode::state_offset;
  if (name == "state-amplitude") return CascadeMode::state_amplitude;
  if (name == "gate-offset") return CascadeMode::gate_offset;
  throw ConfigError("unknown cascade mode '" + std::string(name) + "'");
}

std::size_t PerturbativeStack::packed_size(CascadeMode mode, int order) {
  const std::size_t block = mode == CascadeMode::gate_offset ? 9 : 3;
  return block * static_cast<std::size_t>(order + 1);
}

PerturbativeStack::PerturbativeStack(CascadeMode mode, int order) : mode_(mode), order_(order) {
  if (order < 0) throw ConfigError("cascade order must be >= 0");
  data_.assign(packed_size(mode, order), 0.0);
}

PerturbativeStack PerturbativeStack::initial(CascadeMode mode, int order) {
  PerturbativeStack s(mode, order);
  if (s.is_gate()) {
    s.data_[0] = s.data_[4] = s.data_[8] = 1.0;
  } else {
    s.data_[2] = 1.0;
  }
  return s;
}

PerturbativeStack PerturbativeStack::from_packed(CascadeMode mode, int order,
                                                 std::span<const double> packed) {
  PerturbativeStack s(mode, order);
  if (packed.size() != s.data_.size())
    throw ConfigError("packed stack has " + std::to_string(packed.size()) +
                      " entries, expected " + std::to_string(s.data_.size()));
  std::copy(packed.begin(), packed.end(), s.data_.begin());
  return s;
}

Vec3 PerturbativeStack::vector(int k) const {
  if (is_gate()) throw ConfigError("gate stacks hold matrices");
  return Eigen::Map<const Vec3>(data_.data() + 3 * k);
}

Mat3 PerturbativeStack::matrix(int k) const {
  if (!is_gate()) throw ConfigError("state stacks hold vectors");
  return Eigen::Map<const Mat3>(data_.data() + 9 * k);
}

void cascade_derivative(CascadeMode mode, int order, const Vec3& u, const double* y,
                        double* dy) {
  switch (mode) {
    case CascadeMode::state_offset: detail::offset_cascade_rhs(order, u.data(), y, dy); return;
    case CascadeMode::state_amplitude:
      detail::amplitude_cascade_rhs(order, u.data(), y, dy);
      return;
    case CascadeMode::gate_offset: detail::gate_cascade_rhs(order, u.data(), y, dy); return;
  }
  throw ConfigError("unknown cascade mode");
}

namespace {

template <class Observer>
void integrate_cascade(const ControlField& field, PerturbativeStack& stack, double t_final,
                       const PropagationOptions& options, Observer&& observe) {
  check_horizon(field, t_final);
  const CascadeMode mode = stack.mode();
  const int order = stack.order();
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      stack.packed().data(), static_cast<Eigen::Index>(stack.packed().size()));
  for_each_step(field, {}, t_final, options.step, [&](double t, double h, const Vec3& w) {
    auto rhs = [&](double, const Eigen::VectorXd& s) -> Eigen::VectorXd {
      Eigen::VectorXd d(s.size());
      cascade_derivative(mode, order, w, s.data(), d.data());
      return d;
    };
    y = rk4_step(rhs, t, y, h);
    observe(t + h, y);
  });
  std::copy(y.data(), y.data() + y.size(), stack.packed().begin());
}

}  // namespace

CascadeTrajectory propagate_cascade(const ControlField& field, const PerturbativeStack& initial,
                                    double t_final, const PropagationOptions& options) {
  CascadeTrajectory traj;
  traj.times.push_back(0.0);
  traj.stacks.push_back(initial);
  PerturbativeStack work = initial;
  integrate_cascade(field, work, t_final, options, [&](double t, const Eigen::VectorXd& y) {
    traj.times.push_back(t);
    traj.stacks.push_back(PerturbativeStack::from_packed(
        initial.mode(), initial.order(), std::span<const double>(y.data(), y.size())));
  });
  return traj;
}

PerturbativeStack propagate_cascade_final(const ControlField& field,
                                          const PerturbativeStack& initial, double t_final,
                                          const PropagationOptions& options) {
  PerturbativeStack work = initial;
  integrate_cascade(field, work, t_final, options, [](double, const Eigen::VectorXd&) {});
  return work;
}

double inversion_fidelity(const BlochVector& q_final) { return -q_final.z(); }

double robust_fidelity(const PerturbativeStack& stack, const FidelityTarget& target) {
  if (stack.is_gate()) {
    const Mat3* g = std::get_if<Mat3>(&target);
    if (g == nullptr) throw ConfigError("gate stacks need a 3x3 gate target");
    return -(*g - stack.matrix(0)).squaredNorm() - inhomogeneous_residual(stack);
  }
  const BlochVector* q = std::get_if<BlochVector>(&target);
  if (q == nullptr) throw ConfigError("state stacks need a Bloch-vector target");
  return -(*q - stack.vector(0)).squaredNorm() - inhomogeneous_residual(stack);
}

double inhomogeneous_residual(const PerturbativeStack& stack) {
  const std::size_t block = stack.is_gate() ? 9 : 3;
  double sum = 0.0;
  auto data = stack.packed();
  for (std::size_t i = block; i < data.size(); ++i) sum += data[i] * data[i];
  return sum;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = lo;
    return grid;
  }
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return grid;
}

RobustnessProfile robustness_profile(const ControlField& field, ProfileAxis axis,
                                     std::span<const double> grid,
                                     const PropagationOptions& options) {
  if (grid.empty()) throw ConfigError("robustness profile needs a non-empty grid");
  RobustnessProfile profile;
  profile.axis = axis;
  profile.points.resize(grid.size());
  const double t_final = field.duration();
  parallel_for(grid.size(), [&](std::size_t i) {
    Inhomogeneity inhom;
    (axis == ProfileAxis::offset ? inhom.offset : inhom.amplitude) = grid[i];
    const BlochVector q = propagate_bloch_final(field, inhom, north_pole(), t_final, options);
    profile.points[i] = {grid[i], inversion_fidelity(q)};
  });
  return profile;
}

std::size_t count_local_maxima(const RobustnessProfile& profile, double prominence) {
  const auto& pts = profile.points;
  if (pts.size() < 3) return 0;
  // Hysteresis peak detection: a maximum counts once the curve has risen to it
  // by at least `prominence` and then dropped by at least `prominence`.
  std::size_t count = 0;
  double lo = pts.front().fidelity;
  double hi = lo;
  double lo_before_hi = lo;
  bool seeking_max = true;
  for (const auto& p : pts) {
    const double v = p.fidelity;
    if (seeking_max) {
      if (v > hi) {
        hi = v;
        lo_before_hi = lo;
      }
      if (v < lo) lo = v;
      if (v < hi - prominence) {
        if (hi - lo_before_hi >= prominence) ++count;
        seeking_max = false;
        lo = v;
      }
    } else {
      if (v < lo) lo = v;
      if (v > lo + prominence) {
        seeking_max = true;
        hi = v;
        lo_before_hi = lo;
      }
    }
  }
  return count;
}

}  // namespace pulseforge::dynamics
