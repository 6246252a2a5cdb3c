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

#include "pulseforge/landscape.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "pulseforge/detail/cascade_rhs.hpp"
#include "pulseforge/detail/flow_systems.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/grape.hpp"
#include "pulseforge/integrator.hpp"
#include "pulseforge/parallel.hpp"

namespace pulseforge::landscape {

std::string_view to_string(Reduction r) {
  switch (r) {
    case Reduction::none: return "none";
    case Reduction::one_field: return "one-field";
    case Reduction::bang_bang: return "bang-bang";
    case Reduction::invariants: return "invariants";
    case Reduction::unit_field: return "unit-field";
    case Reduction::mirror: return "mirror";
  }
  return "?";
}

Reduction parse_reduction(std::string_view name) {
  if (name == "none") return Reduction::none;
  if (name == "one-field") return Reduction::one_field;
  if (name == "bang-bang") return Reduction::bang_bang;
  if (name == "invariants") return Reduction::invariants;
  if (name == "unit-field") return Reduction::unit_field;
  if (name == "mirror") return Reduction::mirror;
  throw ConfigError("unknown reduction '" + std::string(name) + "'");
}

Mat3 not_gate() {
  Mat3 g;
  g << 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0;
  return g;
}

Problem default_problem(flows::Variant variant, int order) {
  Problem p;
  p.variant = variant;
  p.order = order;
  switch (variant) {
    case flows::Variant::energy_offset:
      if (order >= 1 && order <= 3) p.reduction = Reduction::one_field;
      break;
    case flows::Variant::time_offset:
      p.reduction = order == 1 ? Reduction::bang_bang : Reduction::unit_field;
      break;
    case flows::Variant::amplitude:
      if (order == 1) p.reduction = Reduction::invariants;
      break;
    case flows::Variant::ensemble:
      if (order == 2) p.reduction = Reduction::mirror;
      p.offsets.resize(static_cast<std::size_t>(std::max(order, 1)));
      for (std::size_t k = 0; k < p.offsets.size(); ++k)
        p.offsets[k] = p.offsets.size() == 1
                           ? 0.0
                           : -0.5 + static_cast<double>(k) / static_cast<double>(p.offsets.size() - 1);
      break;
    case flows::Variant::gate_time:
      p.reduction = Reduction::bang_bang;
      break;
  }
  return p;
}

std::size_t search_dimension(const Problem& problem) {
  switch (problem.reduction) {
    case Reduction::none:
      return static_cast<std::size_t>(flows::landscape_dimension(problem.variant, problem.order));
    case Reduction::one_field:
      return static_cast<std::size_t>(problem.order);
    case Reduction::bang_bang:
      return problem.variant == flows::Variant::gate_time && problem.order == 2 ? 2 : 1;
    case Reduction::invariants:
      return 2;
    case Reduction::unit_field:
      return static_cast<std::size_t>(2 * problem.order);
    case Reduction::mirror:
      return static_cast<std::size_t>(problem.order - 1);
  }
  return 0;
}

bool is_time_cost(const Problem& problem) {
  if (problem.variant == flows::Variant::energy_offset) return false;
  if (problem.variant == flows::Variant::ensemble)
    return problem.ensemble_cost == flows::CostKind::time;
  return true;
}

namespace {

void check_problem(const Problem& p) {
  if (p.order < 1) throw ConfigError("order must be >= 1");
  if (!(p.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (!(p.step > 0.0)) throw ConfigError("integrator step must be positive");
  switch (p.reduction) {
    case Reduction::none: break;
    case Reduction::one_field:
      if (p.variant != flows::Variant::energy_offset || p.order > 3)
        throw ConfigError("one-field sections exist for energy-offset orders 1..3");
      break;
    case Reduction::bang_bang:
      if (!(p.variant == flows::Variant::time_offset && p.order == 1) &&
          p.variant != flows::Variant::gate_time)
        throw ConfigError("bang-bang sections exist for time-offset order 1 and gate-time");
      break;
    case Reduction::invariants:
      if (p.variant != flows::Variant::amplitude || p.order != 1)
        throw ConfigError("invariant section exists for amplitude order 1 only");
      break;
    case Reduction::unit_field:
      if (p.variant != flows::Variant::time_offset)
        throw ConfigError("unit-field section exists for the time-offset variant only");
      break;
    case Reduction::mirror: {
      if (p.variant != flows::Variant::ensemble || p.order < 2 ||
          p.ensemble_cost != flows::CostKind::time)
        throw ConfigError("mirror section exists for time-cost ensembles of two or more spins");
      const std::size_t n = p.offsets.size();
      for (std::size_t k = 0; k < n; ++k)
        if (std::abs(p.offsets[k] + p.offsets[n - 1 - k]) > 1e-12)
          throw ConfigError("mirror section needs offsets symmetric about zero");
      break;
    }
  }
  if (p.variant == flows::Variant::ensemble && p.offsets.size() != static_cast<std::size_t>(p.order))
    throw ConfigError("ensemble needs one offset per spin");
  if (p.variant == flows::Variant::gate_time && p.order > 2)
    throw ConfigError("gate synthesis supports orders 1 and 2");
}

void check_point(const Problem& problem, std::span<const double> x) {
  if (x.size() != search_dimension(problem))
    throw ConfigError("expected " + std::to_string(search_dimension(problem)) +
                      " search parameters, got " + std::to_string(x.size()));
  for (double v : x)
    if (!std::isfinite(v)) throw ConfigError("search parameters must be finite");
}

}  // namespace

flows::ShootingPoint shooting_point(const Problem& problem, std::span<const double> x) {
  check_problem(problem);
  check_point(problem, x);
  flows::ShootingPoint pt{problem.variant, problem.order, {}};
  const double m = problem.mirrored ? -1.0 : 1.0;
  switch (problem.reduction) {
    case Reduction::none:
      pt.params.assign(x.begin(), x.end());
      break;
    case Reduction::one_field: {
      if (problem.order == 1) {
        if (x[0] < 0.0) throw DomainError("H must be non-negative");
        pt.params = {std::sqrt(2.0 * x[0]), m * kPi / 2.0};
      } else if (problem.order == 2) {
        // Omega_2 = (-1, 0, 0); J = |Omega_1|^2 / 2 + Omega_0 . Omega_2.
        if (x[0] < 0.0) throw DomainError("H must be non-negative");
        const double w0 = std::sqrt(2.0 * x[0]);
        const double sq = 2.0 * x[1] + 2.0 * w0;
        if (sq < 0.0) throw DomainError("J below -sqrt(2H)");
        pt.params = {w0, 0.0, m * std::sqrt(sq), kPi};
      } else {
        // Omega_3 = (0, -1, 0).
        pt.params = {x[0], 0.0, m * x[1], x[2], 0.0, -m * kPi / 2.0};
      }
      break;
    }
    case Reduction::bang_bang:
      if (problem.variant == flows::Variant::gate_time && problem.order == 2)
        pt.params = {x[0], 0.0, 0.0, 0.0, x[1], 0.0, kPi / 2.0, problem.mirrored ? kPi : 0.0};
      else if (problem.variant == flows::Variant::gate_time)
        pt.params = {x[0], 0.0, 0.0, kPi / 2.0, -m * kPi / 2.0};
      else
        pt.params = {x[0], m * kPi / 2.0};
      break;
    case Reduction::invariants:
      pt.params = {0.5 * (1.0 - x[0]), -0.5 * m * x[1]};
      break;
    case Reduction::unit_field: {
      const std::size_t n = x.size() / 2;
      const double rho = std::hypot(x[2 * n - 2], x[2 * n - 1]);
      if (!(rho > 0.0)) throw DomainError("Omega_N(0) must not vanish");
      pt.params.push_back(1.0 / rho);
      for (std::size_t k = 0; k + 2 < 2 * n; ++k) pt.params.push_back(x[k] / rho);
      pt.params.push_back(std::atan2(m * x[2 * n - 1], x[2 * n - 2]));
      for (std::size_t k = 2; k + 1 < pt.params.size(); k += 2) pt.params[k] *= m;
      break;
    }
    case Reduction::mirror: {
      const std::size_t n = static_cast<std::size_t>(problem.order);
      const std::size_t pairs = n / 2;
      std::vector<double> lx(n, 0.0), ly(n, 0.0);
      double paired = 0.0;
      for (std::size_t k = 0; k < pairs; ++k) {
        ly[k] = m * x[k];
        if (n % 2 == 1) lx[k] = x[pairs + k];
        else if (k > 0) lx[k] = x[pairs + k - 1];
        paired += lx[k];
      }
      if (n % 2 == 0) lx[0] = 0.5 - (paired - lx[0]);
      else lx[pairs] = 1.0 - 2.0 * paired;
      for (std::size_t k = 0; k < pairs; ++k) {
        lx[n - 1 - k] = lx[k];
        ly[n - 1 - k] = -ly[k];
      }
      for (std::size_t k = 0; k + 1 < n; ++k) {
        pt.params.push_back(lx[k]);
        pt.params.push_back(ly[k]);
      }
      break;
    }
  }
  return pt;
}

double Axis::value(std::size_t i) const {
  if (count <= 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

namespace {

using dynamics::CascadeMode;

// Quantity scored against the target: perturbative cascade or ensemble spins.
struct Tail {
  bool spins = false;
  CascadeMode mode = CascadeMode::state_offset;
  int order = 1;
  std::vector<double> offsets;
  dynamics::FidelityTarget target = south_pole();

  int size() const {
    if (spins) return 3 * static_cast<int>(offsets.size());
    return static_cast<int>(dynamics::PerturbativeStack::packed_size(mode, order));
  }

  void initial(double* y) const {
    if (spins) {
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        y[3 * k] = y[3 * k + 1] = 0.0;
        y[3 * k + 2] = 1.0;
      }
      return;
    }
    const auto s = dynamics::PerturbativeStack::initial(mode, order);
    std::copy(s.packed().begin(), s.packed().end(), y);
  }

  void derivative(const double* u, const double* y, double* dy) const {
    if (spins) {
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        const double w[3] = {u[0], u[1], offsets[k]};
        detail::cross(y + 3 * k, w, dy + 3 * k);
      }
      return;
    }
    dynamics::cascade_derivative(mode, order, Vec3(u[0], u[1], 0.0), y, dy);
  }

  void residual(const double* y, std::vector<double>& r) const {
    const int n = size();
    r.assign(y, y + n);
    if (spins) {
      for (std::size_t k = 0; k < offsets.size(); ++k) r[3 * k + 2] += 1.0;
      return;
    }
    if (mode == CascadeMode::gate_offset) {
      const Mat3& g = std::get<Mat3>(target);
      for (int c = 0; c < 3; ++c)
        for (int row = 0; row < 3; ++row) r[static_cast<std::size_t>(3 * c + row)] -= g(row, c);
    } else {
      const Vec3& q = std::get<BlochVector>(target);
      for (int i = 0; i < 3; ++i) r[static_cast<std::size_t>(i)] -= q[i];
    }
  }
};

Tail tail_for(const Problem& p) {
  Tail t;
  t.order = p.order;
  switch (p.variant) {
    case flows::Variant::energy_offset:
    case flows::Variant::time_offset:
      t.mode = CascadeMode::state_offset;
      break;
    case flows::Variant::amplitude:
      t.mode = CascadeMode::state_amplitude;
      break;
    case flows::Variant::ensemble:
      t.spins = true;
      t.offsets = p.offsets;
      break;
    case flows::Variant::gate_time:
      t.mode = CascadeMode::gate_offset;
      t.target = p.gate;
      break;
  }
  return t;
}

double score(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return -s;
}

struct Step {
  double t = 0.0;
  double h = 0.0;
  double u[2] = {0.0, 0.0};
};

// Steps of length `step` from 0 to t_end, the last one partial.
std::vector<Step> uniform_steps(double t_end, double step) {
  std::vector<Step> steps;
  const auto full = static_cast<std::size_t>(std::floor(t_end / step + 1e-12));
  steps.reserve(full + 1);
  for (std::size_t i = 0; i < full; ++i) steps.push_back(Step{step * static_cast<double>(i), step, {}});
  const double rest = t_end - step * static_cast<double>(full);
  if (rest > 1e-12 * std::max(1.0, t_end)) steps.push_back(Step{step * static_cast<double>(full), rest, {}});
  if (!steps.empty()) steps.back().h = t_end - steps.back().t;
  return steps;
}

std::vector<Step> field_steps(const ControlField& field, double t_end, double step) {
  std::vector<Step> steps;
  field.for_each_segment(t_end, [&](double a, double b, FieldValue v) {
    const std::size_t n = step_count(b - a, step);
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      steps.push_back(Step{a + h * static_cast<double>(i), h, {v.ux, v.uy}});
  });
  return steps;
}

// Follows F along the step grid and refines the argmax by a parabola through
// the best node and its neighbours.
template <class Advance, class Residual, class Observe>
ObjectiveResult track_peak(PackedState y, const std::vector<Step>& steps, const Advance& advance,
                           const Residual& residual, const Observe& observe) {
  ObjectiveResult out;
  std::vector<double> r;
  residual(y, r);
  double f_cur = score(r);
  double best_f = -std::numeric_limits<double>::infinity();
  double prev_f = f_cur, next_f = 0.0;
  PackedState best_y, prev_y;
  std::size_t best = 0;
  bool has_best = false, has_next = false;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    PackedState next = advance(y, steps[s], steps[s].h);
    residual(next, r);
    const double f = score(r);
    observe(next);
    if (f > best_f) {
      best_f = f;
      best_y = next;
      prev_y = y;
      prev_f = f_cur;
      best = s;
      has_best = true;
      has_next = false;
    } else if (has_best && !has_next && s == best + 1) {
      next_f = f;
      has_next = true;
    }
    y = std::move(next);
    f_cur = f;
  }
  if (!has_best) throw ConfigError("empty time window");
  double t_best = steps[best].t + steps[best].h;
  PackedState y_best = best_y;
  if (has_next) {
    const double h_in = steps[best].h, h_out = steps[best + 1].h;
    const double num = h_in * h_in * (best_f - next_f) - h_out * h_out * (best_f - prev_f);
    const double den = h_in * (best_f - next_f) + h_out * (best_f - prev_f);
    if (den > 0.0) {
      const double delta = std::clamp(-0.5 * num / den, -h_in, h_out);
      if (delta != 0.0) {
        PackedState cand = delta > 0.0 ? advance(best_y, steps[best + 1], delta)
                                       : advance(prev_y, steps[best], h_in + delta);
        residual(cand, r);
        const double f = score(r);
        if (f >= best_f) {
          best_f = f;
          y_best = std::move(cand);
          t_best += delta;
        }
      }
    }
  }
  out.f_star = best_f;
  out.t_star = t_best;
  residual(y_best, out.residual);
  out.area = y_best[y_best.size() - 1];
  return out;
}

template <class Sys>
struct JointRhs {
  const Sys* sys;
  const Tail* tail;
  int nf;

  PackedState operator()(double t, const PackedState& y) const {
    PackedState d(y.size());
    double u[3];
    sys->field(t, y.data(), u);
    sys->derivative(y.data(), u, d.data());
    tail->derivative(u, y.data() + nf, d.data() + nf);
    d[d.size() - 1] = std::hypot(u[0], u[1]);
    return d;
  }
};

// Calls fn(system) with the packed flow system of the problem's variant.
template <class Fn>
auto with_system(const Problem& p, const flows::OmegaStack& init, Fn&& fn) {
  using namespace flows;
  switch (p.variant) {
    case Variant::energy_offset:
      return fn(flows::detail::OffsetSystem{p.order, CostKind::energy, p.singular_threshold});
    case Variant::time_offset:
      return fn(flows::detail::OffsetSystem{p.order, CostKind::time, p.singular_threshold});
    case Variant::amplitude:
      return fn(flows::detail::AmplitudeSystem{p.order});
    case Variant::ensemble:
      return fn(flows::detail::EnsembleSystem{p.offsets, p.ensemble_cost, p.singular_threshold});
    case Variant::gate_time:
      break;
  }
  return fn(flows::detail::GateSystem{p.order, init.vectors[0].z(), p.singular_threshold});
}

constexpr double kBangBangSign = 1.0;

struct FieldScoring {
  const Tail* tail;

  PackedState advance(const PackedState& y, const Step& s, double tau) const {
    auto rhs = [this, &s](double, const PackedState& v) {
      PackedState d(v.size());
      tail->derivative(s.u, v.data(), d.data());
      d[d.size() - 1] = std::hypot(s.u[0], s.u[1]);
      return d;
    };
    return rk4_step(rhs, s.t, y, tau);
  }
};

ObjectiveResult score_field(const ControlField& field, const Tail& tail, double t_end, double step,
                            bool window) {
  const int nt = tail.size();
  if (nt + 1 > kMaxPackedState) throw ConfigError("state too large for the packed integrator");
  PackedState y(nt + 1);
  tail.initial(y.data());
  y[nt] = 0.0;
  FieldScoring fs{&tail};
  auto advance = [&fs](const PackedState& v, const Step& s, double tau) { return fs.advance(v, s, tau); };
  auto residual = [&tail](const PackedState& v, std::vector<double>& r) { tail.residual(v.data(), r); };
  auto observe = [](const PackedState&) {};
  if (window) return track_peak(y, field_steps(field, t_end, step), advance, residual, observe);
  for (const Step& s : field_steps(field, t_end, step)) y = fs.advance(y, s, s.h);
  ObjectiveResult out;
  tail.residual(y.data(), out.residual);
  out.f_star = score(out.residual);
  out.t_star = t_end;
  out.area = y[nt];
  return out;
}

// Shared body of objective() and evaluate_at(): a window search over
// (0, t_end] or a plain evaluation at t_end.
ObjectiveResult run_tail(const Problem& problem, const Tail& tail, std::span<const double> x,
                         double t_end, bool window) {
  const flows::ShootingPoint pt = shooting_point(problem, x);
  if (problem.reduction == Reduction::bang_bang) {
    flows::FlowOptions fo;
    fo.step = problem.step;
    fo.record_states = false;
    const double sign = problem.mirrored ? -kBangBangSign : kBangBangSign;
    const flows::FlowRun fr = problem.variant == flows::Variant::gate_time
                                  ? flows::flow_gate(pt, t_end, fo)
                                  : flows::flow_bang_bang(x[0], sign, t_end, fo);
    ObjectiveResult out = score_field(fr.field, tail, t_end, problem.step, window);
    out.audit = fr.audit;
    return out;
  }
  if (problem.reduction == Reduction::mirror) {
    flows::FlowOptions fo;
    fo.step = problem.step;
    fo.record_states = false;
    const flows::FlowRun fr = flows::flow_ensemble_bang_bang(pt, problem.offsets, t_end, fo);
    ObjectiveResult out = score_field(fr.field, tail, t_end, problem.step, window);
    out.audit = fr.audit;
    return out;
  }
  const flows::OmegaStack init = flows::initial_stack(pt);
  flows::AuditTracker tracker(flows::make_context(pt, problem.ensemble_cost, problem.offsets), init);
  return with_system(problem, init, [&](const auto& sys) {
    const int nf = sys.size();
    const int nt = tail.size();
    if (nf + nt + 1 > kMaxPackedState) throw ConfigError("state too large for the packed integrator");
    PackedState y(nf + nt + 1);
    y.head(nf) = flows::detail::pack(init);
    tail.initial(y.data() + nf);
    y[nf + nt] = 0.0;
    using Sys = std::decay_t<decltype(sys)>;
    const JointRhs<Sys> rhs{&sys, &tail, nf};
    const std::size_t count = init.vectors.size();
    auto advance = [&rhs](const PackedState& v, const Step& s, double tau) {
      return rk4_step(rhs, s.t, v, tau);
    };
    auto residual = [&tail, nf](const PackedState& v, std::vector<double>& r) {
      tail.residual(v.data() + nf, r);
    };
    auto observe = [&tracker, count](const PackedState& v) {
      tracker.observe(flows::detail::unpack(v.data(), count));
    };
    const std::vector<Step> steps = uniform_steps(t_end, problem.step);
    ObjectiveResult out;
    if (window) {
      out = track_peak(y, steps, advance, residual, observe);
    } else {
      for (const Step& s : steps) {
        y = advance(y, s, s.h);
        observe(y);
      }
      residual(y, out.residual);
      out.f_star = score(out.residual);
      out.t_star = t_end;
      out.area = y[nf + nt];
    }
    out.audit = tracker.audit();
    return out;
  });
}

ObjectiveResult run(const Problem& problem, std::span<const double> x, double t_end, bool window) {
  return run_tail(problem, tail_for(problem), x, t_end, window);
}

std::string describe(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "]";
  return os.str();
}

ObjectiveResult try_objective(const Problem& problem, std::span<const double> x) {
  try {
    return objective(problem, x);
  } catch (const SingularFlowError& e) {
    ObjectiveResult out;
    out.failed = true;
    out.failure = e.what();
    return out;
  } catch (const DomainError& e) {
    ObjectiveResult out;
    out.failed = true;
    out.failure = e.what();
    return out;
  }
}

ObjectiveResult evaluate_at(const Problem& problem, std::span<const double> x, double t) {
  return run(problem, x, t, false);
}

}  // namespace

ObjectiveResult objective(const Problem& problem, std::span<const double> x) {
  try {
    return run(problem, x, problem.t_max, true);
  } catch (const SingularFlowError& e) {
    throw SingularFlowError(std::string(e.what()) + " for parameters " + describe(x), e.time());
  }
}

ObjectiveResult field_objective(const ControlField& field, dynamics::CascadeMode mode, int order,
                                const dynamics::FidelityTarget& target, double t_max,
                                double step) {
  if (!(t_max > 0.0) || t_max > field.duration() * (1.0 + 1e-12))
    throw RangeError("time window exceeds the field duration");
  Tail tail;
  tail.mode = mode;
  tail.order = order;
  tail.target = target;
  if ((mode == CascadeMode::gate_offset) != std::holds_alternative<Mat3>(target))
    throw ConfigError("fidelity target does not match the cascade mode");
  return score_field(field, tail, std::min(t_max, field.duration()), step, true);
}

std::vector<BlochVector> spins_at(const Problem& problem, std::span<const double> x, double t,
                                  std::span<const double> offsets) {
  if (!(t > 0.0)) throw ConfigError("evaluation time must be positive");
  Tail tail;
  tail.spins = true;
  tail.offsets.assign(offsets.begin(), offsets.end());
  const ObjectiveResult r = run_tail(problem, tail, x, t, false);
  std::vector<BlochVector> out(offsets.size());
  for (std::size_t k = 0; k < offsets.size(); ++k)
    out[k] = BlochVector(r.residual[3 * k], r.residual[3 * k + 1], r.residual[3 * k + 2] - 1.0);
  return out;
}

std::vector<double> residual_at(const Problem& problem, std::span<const double> x, double t) {
  if (!(t > 0.0)) throw ConfigError("evaluation time must be positive");
  return evaluate_at(problem, x, t).residual;
}

double solution_cost(const Problem& problem, const ObjectiveResult& result) {
  return is_time_cost(problem) ? result.t_star : result.area;
}

ControlField synthesize_field(const Problem& problem, std::span<const double> x, double t_end) {
  const flows::ShootingPoint pt = shooting_point(problem, x);
  flows::FlowOptions fo;
  fo.step = problem.step;
  fo.singular_threshold = problem.singular_threshold;
  fo.record_states = false;
  switch (problem.variant) {
    case flows::Variant::energy_offset: return flows::flow_energy_offset(pt, t_end, fo).field;
    case flows::Variant::time_offset:
      if (problem.reduction == Reduction::bang_bang)
        return flows::flow_bang_bang(x[0], problem.mirrored ? -kBangBangSign : kBangBangSign,
                                     t_end, fo)
            .field;
      return flows::flow_time_offset(pt, t_end, fo).field;
    case flows::Variant::amplitude: return flows::flow_amplitude(pt, t_end, fo).field;
    case flows::Variant::ensemble:
      if (problem.reduction == Reduction::mirror)
        return flows::flow_ensemble_bang_bang(pt, problem.offsets, t_end, fo).field;
      return flows::flow_ensemble(pt, problem.offsets, problem.ensemble_cost, t_end, fo).field;
    case flows::Variant::gate_time: return flows::flow_gate(pt, t_end, fo).field;
  }
  throw ConfigError("unknown variant");
}

SynthesisRecord refine(const Problem& problem, std::span<const double> x0,
                       const RefineOptions& options) {
  check_problem(problem);
  check_point(problem, x0);
  const auto d = static_cast<Eigen::Index>(x0.size());
  SynthesisRecord rec;
  rec.problem = problem;
  rec.x.assign(x0.begin(), x0.end());
  ObjectiveResult start;
  if (options.initial_time > 0.0) {
    start.t_star = options.initial_time;
  } else {
    start = try_objective(problem, x0);
  }
  if (start.failed) {
    rec.result = start;
    return rec;
  }
  rec.point = shooting_point(problem, x0);

  Eigen::VectorXd lo = Eigen::VectorXd::Constant(d + 1, -std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(d + 1, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < d; ++i) {
    if (static_cast<std::size_t>(i) < options.lower.size()) lo[i] = options.lower[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(i) < options.upper.size()) hi[i] = options.upper[static_cast<std::size_t>(i)];
  }
  lo[d] = problem.step;
  auto project = [&](Eigen::VectorXd z) { return Eigen::VectorXd(z.cwiseMax(lo).cwiseMin(hi)); };

  auto eval = [&](const Eigen::VectorXd& z, Eigen::VectorXd& r) {
    try {
      const std::vector<double> v =
          residual_at(problem, std::span<const double>(z.data(), static_cast<std::size_t>(d)), z[d]);
      r = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      return r.allFinite();
    } catch (const SingularFlowError&) {
      return false;
    } catch (const DomainError&) {
      return false;
    }
  };

  Eigen::VectorXd z(d + 1);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = x0[static_cast<std::size_t>(i)];
  z[d] = start.t_star;
  z = project(z);
  Eigen::VectorXd r;
  bool ok = eval(z, r);
  double cost = ok ? r.squaredNorm() : std::numeric_limits<double>::infinity();
  bool converged = false;
  double lambda = 1e-3;
  int it = 0;
  for (; ok && it < options.max_iterations; ++it) {
    if (cost <= options.fidelity_tolerance) {
      converged = true;
      break;
    }
    Eigen::MatrixXd jac(r.size(), d + 1);
    bool jac_ok = true;
    for (Eigen::Index j = 0; j <= d && jac_ok; ++j) {
      const double eps = options.fd_step * std::max(1.0, std::abs(z[j]));
      Eigen::VectorXd zp = z, zm = z;
      zp[j] = std::min(z[j] + eps, hi[j]);
      zm[j] = std::max(z[j] - eps, lo[j]);
      Eigen::VectorXd rp, rm;
      jac_ok = zp[j] > zm[j] && eval(zp, rp) && eval(zm, rm);
      if (jac_ok) jac.col(j) = (rp - rm) / (zp[j] - zm[j]);
    }
    if (!jac_ok) break;
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool accepted = false, stop = false;
    while (!accepted) {
      Eigen::MatrixXd m = a;
      for (Eigen::Index i = 0; i <= d; ++i) m(i, i) += lambda * std::max(a(i, i), 1e-12);
      const Eigen::VectorXd delta = m.ldlt().solve(-g);
      const Eigen::VectorXd zn = project(z + delta);
      if ((zn - z).norm() <= options.step_tolerance) {
        converged = true;
        stop = true;
        break;
      }
      Eigen::VectorXd rn;
      if (eval(zn, rn) && rn.squaredNorm() < cost) {
        z = zn;
        r = rn;
        cost = rn.squaredNorm();
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 4.0;
        if (lambda > 1e12) {
          stop = true;
          break;
        }
      }
    }
    if (stop) {
      ++it;
      break;
    }
  }
  if (ok && cost <= options.fidelity_tolerance) converged = true;

  rec.iterations = it;
  rec.converged = converged;
  rec.x.assign(z.data(), z.data() + d);
  rec.point = shooting_point(problem, rec.x);
  try {
    rec.result = evaluate_at(problem, rec.x, z[d]);
  } catch (const SingularFlowError& e) {
    rec.result = ObjectiveResult{};
    rec.result.failed = true;
    rec.result.failure = e.what();
    rec.converged = false;
  }
  return rec;
}

LandscapeScan grid_scan(const Problem& problem, const Axis& x, const Axis& y) {
  check_problem(problem);
  if (search_dimension(problem) != 2)
    throw ConfigError("grid scans need a two-parameter problem");
  if (x.count == 0 || y.count == 0) throw ConfigError("scan axes need at least one point");
  LandscapeScan scan{x, y, {}};
  scan.cells.resize(x.count * y.count);
  parallel_for(scan.cells.size(), [&](std::size_t i) {
    const double p[2] = {x.value(i % x.count), y.value(i / x.count)};
    scan.cells[i] = try_objective(problem, p);
  });
  return scan;
}

Box default_box(const Problem& problem) {
  const std::size_t d = search_dimension(problem);
  Box b{std::vector<double>(d, -4.0), std::vector<double>(d, 4.0)};
  switch (problem.reduction) {
    case Reduction::one_field:
      if (problem.order <= 2) {
        b.lower[0] = 1e-6;
        b.upper[0] = 1.5;
      }
      if (problem.order == 2) {
        b.lower[1] = 1e-6;
        b.upper[1] = 2.0;
      }
      return b;
    case Reduction::bang_bang:
      if (d == 2) return b;
      b.lower[0] = 0.0;
      b.upper[0] = 1.0 - 1e-10;
      return b;
    case Reduction::invariants:
      // Reflection y -> -y maps I_y to -I_y at equal time.
      b.lower[1] = 0.0;
      return b;
    case Reduction::unit_field:
      return b;
    case Reduction::mirror:
      return b;
    case Reduction::none:
      break;
  }
  const int n = problem.order;
  switch (problem.variant) {
    case flows::Variant::energy_offset:
      b.lower[d - 1] = -kPi;
      b.upper[d - 1] = kPi;
      break;
    case flows::Variant::time_offset:
      // u -> -u maps extremals onto extremals, so Omega_0x(0) >= 0 suffices.
      b.lower[0] = 0.0;
      b.upper[0] = 8.0;
      b.lower[d - 1] = -kPi;
      b.upper[d - 1] = kPi;
      break;
    case flows::Variant::gate_time:
      b.lower[2] = -1.0;
      b.upper[2] = 1.0;
      b.lower[static_cast<std::size_t>(3 * n)] = 0.0;
      b.upper[static_cast<std::size_t>(3 * n)] = kPi;
      b.lower[static_cast<std::size_t>(3 * n + 1)] = -kPi;
      b.upper[static_cast<std::size_t>(3 * n + 1)] = kPi;
      break;
    default:
      break;
  }
  return b;
}

std::vector<std::vector<double>> halton_points(std::size_t dim, std::size_t count,
                                               std::uint64_t seed) {
  static constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                         37, 41, 43, 47, 53, 59, 61, 67, 71, 73};
  if (dim > std::size(kPrimes)) throw ConfigError("quasi-random sequence supports up to 21 dimensions");
  const std::uint64_t offset = 20 + 4099 * seed;
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const unsigned base = kPrimes[j];
      std::uint64_t k = offset + i;
      double f = 1.0, v = 0.0;
      while (k > 0) {
        f /= base;
        v += f * static_cast<double>(k % base);
        k /= base;
      }
      pts[i][j] = v;
    }
  }
  return pts;
}

FindResult find_global(const Problem& problem, const FindOptions& options) {
  check_problem(problem);
  const std::size_t d = search_dimension(problem);
  const Box box = options.box ? *options.box : default_box(problem);
  if (box.lower.size() != d || box.upper.size() != d) throw ConfigError("search box dimension mismatch");
  const std::size_t starts = options.starts ? options.starts : (d <= 4 ? 64 : 256);
  double time_lo = options.time_lo, time_hi = options.time_hi;
  if (!(time_hi > time_lo) && is_time_cost(problem) &&
      !(problem.reduction == Reduction::bang_bang && d == 1)) {
    time_lo = kPi;
    time_hi = std::min(4.0 * kPi, problem.t_max);
  }
  const bool seeded_time = time_hi > time_lo;

  Problem coarse = problem;
  if (options.search_step > 0.0) coarse.step = options.search_step;

  std::vector<std::vector<double>> points = halton_points(d + (seeded_time ? 1 : 0), starts, options.seed);
  std::vector<double> times(starts, 0.0);
  for (std::size_t i = 0; i < starts; ++i) {
    auto& p = points[i];
    for (std::size_t j = 0; j < d; ++j) p[j] = box.lower[j] + (box.upper[j] - box.lower[j]) * p[j];
    if (seeded_time) {
      times[i] = time_lo + (time_hi - time_lo) * p[d];
      p.pop_back();
    }
  }

  std::vector<std::size_t> order(starts);
  std::iota(order.begin(), order.end(), 0);
  if (options.refine_count && options.refine_count < starts) {
    std::vector<double> first(starts);
    parallel_for(starts, [&](std::size_t i) {
      const ObjectiveResult r = try_objective(coarse, points[i]);
      first[i] = r.failed ? -std::numeric_limits<double>::infinity() : r.f_star;
    });
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return first[a] > first[b]; });
    order.resize(options.refine_count);
    std::sort(order.begin(), order.end());
  }
  const std::size_t keep = order.size();

  RefineOptions ro = options.refine;
  ro.lower = box.lower;
  ro.upper = box.upper;
  FindResult out;
  out.candidates.resize(keep);
  parallel_for(keep, [&](std::size_t i) {
    RefineOptions search = ro;
    search.initial_time = times[order[i]];
    search.max_iterations = std::min(options.search_iterations, ro.max_iterations);
    SynthesisRecord rec = refine(coarse, points[order[i]], search);
    if (!rec.result.failed && rec.result.f_star >= -options.polish_threshold) {
      RefineOptions fine = ro;
      fine.initial_time = rec.result.t_star;
      SynthesisRecord polished = refine(problem, rec.x, fine);
      polished.iterations += rec.iterations;
      rec = std::move(polished);
    }
    rec.problem = problem;
    out.candidates[i] = std::move(rec);
  });

  const SynthesisRecord* best = nullptr;
  for (const auto& c : out.candidates) {
    if (c.result.failed || !(std::abs(c.result.f_star) <= options.robust_tolerance)) continue;
    if (!best || solution_cost(problem, c.result) < solution_cost(problem, best->result)) best = &c;
  }
  if (!best) {
    std::vector<const SynthesisRecord*> sorted;
    for (const auto& c : out.candidates)
      if (!c.result.failed) sorted.push_back(&c);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
      return a->result.f_star > b->result.f_star;
    });
    std::ostringstream os;
    os << "no robust solution among " << keep << " refined starts";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, sorted.size()); ++i)
      os << "; F* = " << sorted[i]->result.f_star << " at " << describe(sorted[i]->x)
         << " t* = " << sorted[i]->result.t_star;
    throw NotFoundError(os.str());
  }
  out.best = *best;
  return out;
}

std::vector<double> grape_seed(const Problem& problem, double duration,
                               const GrapeSeedOptions& options) {
  check_problem(problem);
  if (!(duration > 0.0)) throw ConfigError("seed duration must be positive");
  if (options.samples < 2 || options.restarts < 1) throw ConfigError("GRAPE seed needs samples and restarts");
  if (problem.variant != flows::Variant::ensemble || problem.reduction != Reduction::none ||
      problem.ensemble_cost != flows::CostKind::time || problem.order < 2)
    throw ConfigError("GRAPE seeds exist for time-cost ensembles of two or more spins");
  grape::GrapeProblem gp;
  gp.offsets = problem.offsets;
  gp.samples = options.samples;
  grape::GrapeOptions go;
  go.iterations = options.iterations;
  for (int attempt = 0; attempt < 8; ++attempt, duration *= 0.9) {
    gp.duration = duration;
    double best = -2.0;
    std::vector<double> phases;
    for (int r = 0; r < options.restarts; ++r) {
      gp.initial_phase = grape::smooth_perturbation(gp.samples, 3.0, options.seed + static_cast<std::uint64_t>(r), 6);
      grape::GrapeResult g = grape::grape_optimize(gp, go);
      if (g.history.back() > best) {
        best = g.history.back();
        phases = std::move(g.phases);
      }
    }
    if (1.0 - best < 1e-6) continue;
    const std::vector<Vec3> p0 = grape::initial_costates(gp, phases);
    double sx = 0.0, sy = 0.0;
    for (const Vec3& p : p0) {
      sx += p.y();
      sy -= p.x();
    }
    const double r = std::hypot(sx, sy);
    if (!(r > 0.0)) continue;
    const double c = sx / (r * r), s = -sy / (r * r);
    std::vector<double> x;
    for (std::size_t k = 0; k + 1 < p0.size(); ++k) {
      const double lx = p0[k].y(), ly = -p0[k].x();
      x.push_back(c * lx - s * ly);
      x.push_back(s * lx + c * ly);
    }
    return x;
  }
  throw NotFoundError("phase pulses invert every spin at all tried seed durations");
}

}  // namespace pulseforge::landscape
