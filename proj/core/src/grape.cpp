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

#include "pulseforge/grape.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <random>
#include <string>

#include "pulseforge/parallel.hpp"

namespace pulseforge::grape {

namespace {

void check(const GrapeProblem& p, std::span<const double> phases) {
  if (p.samples < 2) throw ConfigError("GRAPE needs at least two phase samples");
  if (!(p.duration > 0.0)) throw ConfigError("GRAPE needs a positive duration");
  if (p.offsets.empty()) throw ConfigError("GRAPE needs at least one offset");
  if (phases.size() != p.samples) throw ConfigError("phase count does not match the sample count");
}

// Exact hold segment of dq/dt = q x w with w = (cos phi, sin phi, delta):
// a rotation by -|w| h about w / |w|.
struct Segment {
  Vec3 n;
  Vec3 dn;  // d n / d phi
  double s;
  double c1;  // 1 - cos
  double c;

  Segment(double phi, double delta, double h) {
    const double norm = std::sqrt(1.0 + delta * delta);
    n = Vec3(std::cos(phi), std::sin(phi), delta) / norm;
    dn = Vec3(-std::sin(phi), std::cos(phi), 0.0) / norm;
    const double a = -norm * h;
    s = std::sin(a);
    c = std::cos(a);
    c1 = 1.0 - c;
  }

  Vec3 apply(const Vec3& v) const { return c * v + s * n.cross(v) + c1 * n.dot(v) * n; }
  Vec3 apply_transpose(const Vec3& v) const { return c * v - s * n.cross(v) + c1 * n.dot(v) * n; }
  Vec3 derivative(const Vec3& v) const {
    return s * dn.cross(v) + c1 * (dn * n.dot(v) + n * dn.dot(v));
  }
};

double spin_gradient(double delta, double h, std::span<const double> phases, double* grad) {
  const std::size_t k = phases.size();
  std::vector<Vec3> q(k + 1);
  q[0] = Vec3(0.0, 0.0, 1.0);
  for (std::size_t j = 0; j < k; ++j) q[j + 1] = Segment(phases[j], delta, h).apply(q[j]);
  Vec3 lambda(0.0, 0.0, -1.0);
  for (std::size_t j = k; j-- > 0;) {
    const Segment seg(phases[j], delta, h);
    grad[j] = lambda.dot(seg.derivative(q[j]));
    lambda = seg.apply_transpose(lambda);
  }
  return -q[k].z();
}

}  // namespace

double mean_fidelity(const GrapeProblem& problem, std::span<const double> phases) {
  check(problem, phases);
  const double h = problem.duration / static_cast<double>(problem.samples);
  double sum = 0.0;
  for (double delta : problem.offsets) {
    Vec3 q(0.0, 0.0, 1.0);
    for (double phi : phases) q = Segment(phi, delta, h).apply(q);
    sum -= q.z();
  }
  return sum / static_cast<double>(problem.offsets.size());
}

double fidelity_gradient(const GrapeProblem& problem, std::span<const double> phases,
                         std::vector<double>& gradient) {
  check(problem, phases);
  const std::size_t m = problem.offsets.size(), k = problem.samples;
  const double h = problem.duration / static_cast<double>(k);
  std::vector<double> per_spin(m * k);
  std::vector<double> fidelity(m);
  parallel_for(m, [&](std::size_t i) {
    fidelity[i] = spin_gradient(problem.offsets[i], h, phases, per_spin.data() + i * k);
  });
  gradient.assign(k, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sum += fidelity[i];
    for (std::size_t j = 0; j < k; ++j) gradient[j] += per_spin[i * k + j];
  }
  const double inv = 1.0 / static_cast<double>(m);
  for (double& g : gradient) g *= inv;
  return sum * inv;
}

std::vector<Vec3> initial_costates(const GrapeProblem& problem, std::span<const double> phases) {
  check(problem, phases);
  const double h = problem.duration / static_cast<double>(problem.samples);
  std::vector<Vec3> out(problem.offsets.size());
  parallel_for(out.size(), [&](std::size_t i) {
    Vec3 p(0.0, 0.0, -1.0);
    for (std::size_t j = phases.size(); j-- > 0;) p = Segment(phases[j], problem.offsets[i], h).apply_transpose(p);
    out[i] = p;
  });
  return out;
}

namespace {

constexpr std::size_t kMemory = 10;

// fg(phases, gradient) returns the payoff and fills its gradient.
template <class ValueGradient>
GrapeResult ascend(std::vector<double> phi, double duration, const ValueGradient& fg,
                   const GrapeOptions& options) {
  GrapeResult out;
  const std::size_t n = phi.size();
  std::vector<double> grad, trial(n), trial_grad, dir(n);
  double f = fg(phi, grad);
  out.history.push_back(f);
  // L-BFGS ascent with a backtracking Armijo line search.
  std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;
  double step = options.initial_step;
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
    return sum;
  };
  for (int it = 0; it < options.iterations; ++it) {
    const double norm2 = dot(grad, grad);
    if (!std::isfinite(norm2) || !std::isfinite(f))
      throw GradientError("non-finite GRAPE gradient at iteration " + std::to_string(it), it, phi);
    if (std::sqrt(norm2) <= options.gradient_tolerance) {
      out.converged = true;
      break;
    }
    dir = grad;
    std::vector<double> alpha(memory.size());
    for (std::size_t m = memory.size(); m-- > 0;) {
      const auto& [sv, yv] = memory[m];
      alpha[m] = dot(sv, dir) / dot(yv, sv);
      for (std::size_t j = 0; j < n; ++j) dir[j] -= alpha[m] * yv[j];
    }
    double t0 = step;
    if (!memory.empty()) {
      const auto& [sv, yv] = memory.back();
      const double gamma = dot(sv, yv) / dot(yv, yv);
      for (double& d : dir) d *= gamma;
      for (std::size_t m = 0; m < memory.size(); ++m) {
        const auto& [sm, ym] = memory[m];
        const double beta = dot(ym, dir) / dot(ym, sm);
        for (std::size_t j = 0; j < n; ++j) dir[j] += (alpha[m] - beta) * sm[j];
      }
      t0 = 1.0;
    }
    double slope = dot(grad, dir);
    if (!(slope > 0.0)) {
      memory.clear();
      dir = grad;
      slope = norm2;
      t0 = step;
    }
    bool accepted = false;
    for (double t = t0; t >= options.min_step; t *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = phi[j] + t * dir[j];
      const double ft = fg(trial, trial_grad);
      if (std::isfinite(ft) && ft >= f + 1e-4 * t * slope) {
        std::vector<double> sv(n), yv(n);
        for (std::size_t j = 0; j < n; ++j) {
          sv[j] = trial[j] - phi[j];
          yv[j] = grad[j] - trial_grad[j];
        }
        if (dot(sv, yv) > 1e-300) memory.emplace_back(std::move(sv), std::move(yv));
        if (memory.size() > kMemory) memory.pop_front();
        if (memory.empty()) step = 1.5 * t;
        phi.swap(trial);
        grad.swap(trial_grad);
        f = ft;
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      out.converged = true;
      break;
    }
    out.history.push_back(f);
  }
  out.field = phase_field(duration, phi);
  out.phases = std::move(phi);
  return out;
}

}  // namespace

GrapeResult grape_optimize(const GrapeProblem& problem, const GrapeOptions& options) {
  std::vector<double> phi = problem.initial_phase;
  if (phi.empty()) phi.assign(problem.samples, 0.0);
  check(problem, phi);
  return ascend(std::move(phi), problem.duration,
                [&](std::span<const double> x, std::vector<double>& g) { return fidelity_gradient(problem, x, g); },
                options);
}

namespace {

constexpr int kMaxGateOrder = 4;

void check(const GateGrapeProblem& p, std::span<const double> phases) {
  if (p.order < 1 || p.order > kMaxGateOrder) throw ConfigError("gate GRAPE supports orders 1 to 4");
  if (p.samples < 2) throw ConfigError("GRAPE needs at least two phase samples");
  if (!(p.duration > 0.0)) throw ConfigError("GRAPE needs a positive duration");
  if (phases.size() != p.samples) throw ConfigError("phase count does not match the sample count");
}

using Block = Eigen::MatrixXd;

// Power series in delta truncated after the order.
struct Series {
  std::array<double, kMaxGateOrder + 1> c{};
  int n = 0;

  Series operator*(const Series& o) const {
    Series r{{}, n};
    for (int k = 0; k <= n; ++k)
      for (int j = 0; j <= k; ++j) r.c[k] += c[j] * o.c[k - j];
    return r;
  }
  Series operator+(const Series& o) const {
    Series r = *this;
    for (int k = 0; k <= n; ++k) r.c[k] += o.c[k];
    return r;
  }
  Series scaled(double a) const {
    Series r = *this;
    for (double& v : r.c) v *= a;
    return r;
  }
};

Series series_sqrt(const Series& a) {
  Series s{{}, a.n};
  s.c[0] = std::sqrt(a.c[0]);
  for (int k = 1; k <= a.n; ++k) {
    double acc = a.c[k];
    for (int j = 1; j < k; ++j) acc -= s.c[j] * s.c[k - j];
    s.c[k] = acc / (2.0 * s.c[0]);
  }
  return s;
}

Series series_inverse(const Series& a) {
  Series q{{}, a.n};
  q.c[0] = 1.0 / a.c[0];
  for (int k = 1; k <= a.n; ++k) {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc -= a.c[j] * q.c[k - j];
    q.c[k] = acc / a.c[0];
  }
  return q;
}

void series_sincos(const Series& a, Series& sn, Series& cs) {
  sn = Series{{}, a.n};
  cs = Series{{}, a.n};
  sn.c[0] = std::sin(a.c[0]);
  cs.c[0] = std::cos(a.c[0]);
  for (int k = 1; k <= a.n; ++k) {
    double s_acc = 0.0, c_acc = 0.0;
    for (int j = 1; j <= k; ++j) {
      s_acc += j * a.c[j] * cs.c[k - j];
      c_acc -= j * a.c[j] * sn.c[k - j];
    }
    sn.c[k] = s_acc / k;
    cs.c[k] = c_acc / k;
  }
}

Eigen::Matrix3d cross_matrix(const Vec3& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// Hold segment with w = (cos phi, sin phi, delta): the rotation
// R(delta) = c I + s [n]x + (1 - c) n n^T, angle -|w| h, axis n = w / |w|.
// Its delta-Taylor coefficients R^(m) propagate the stacked cascade exactly:
// R_k <- sum_m R^(m) R_{k-m}. dr holds d R^(m) / d phi.
struct CascadeSegment {
  std::vector<Mat3> r;
  std::vector<Mat3> dr;

  CascadeSegment(double phi, int order, double h) : r(order + 1), dr(order + 1) {
    Series one_plus{{}, order};
    one_plus.c[0] = 1.0;
    if (order >= 2) one_plus.c[2] = 1.0;
    const Series norm = series_sqrt(one_plus);
    const Series inv = series_inverse(norm);
    Series sn, cs;
    series_sincos(norm.scaled(-h), sn, cs);
    Series one_minus = cs.scaled(-1.0);
    one_minus.c[0] += 1.0;
    Series dz{{}, order};
    if (order >= 1) dz.c[1] = 1.0;
    // n = (cos phi inv, sin phi inv, delta inv), dn = (-sin phi inv, cos phi inv, 0).
    const double cp = std::cos(phi), sp = std::sin(phi);
    const std::array<Series, 3> n{inv.scaled(cp), inv.scaled(sp), dz * inv};
    const std::array<Series, 3> dn{inv.scaled(-sp), inv.scaled(cp), Series{{}, order}};
    for (int m = 0; m <= order; ++m) {
      r[m].setZero();
      dr[m].setZero();
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const Series nn = one_minus * (n[i] * n[j]);
        const Series dnn = one_minus * (dn[i] * n[j] + n[i] * dn[j]);
        for (int m = 0; m <= order; ++m) {
          r[m](i, j) += nn.c[m];
          dr[m](i, j) += dnn.c[m];
        }
      }
    }
    for (int m = 0; m <= order; ++m) {
      r[m] += cs.c[m] * Mat3::Identity();
      for (int j = 0; j <= m; ++j) {
        Vec3 nj(n[0].c[j], n[1].c[j], n[2].c[j]), dnj(dn[0].c[j], dn[1].c[j], dn[2].c[j]);
        r[m] += sn.c[m - j] * cross_matrix(nj);
        dr[m] += sn.c[m - j] * cross_matrix(dnj);
      }
    }
  }

  Block apply(const std::vector<Mat3>& mats, const Block& y) const {
    const int order = static_cast<int>(r.size()) - 1;
    Block out = Block::Zero(y.rows(), y.cols());
    for (int k = 0; k <= order; ++k)
      for (int i = 0; i <= k; ++i) out.middleRows(3 * k, 3) += mats[k - i] * y.middleRows(3 * i, 3);
    return out;
  }
  Block apply_transpose(const std::vector<Mat3>& mats, const Block& y) const {
    const int order = static_cast<int>(r.size()) - 1;
    Block out = Block::Zero(y.rows(), y.cols());
    for (int k = 0; k <= order; ++k)
      for (int i = 0; i <= k; ++i) out.middleRows(3 * i, 3) += mats[k - i].transpose() * y.middleRows(3 * k, 3);
    return out;
  }
};

Block gate_initial(int order) {
  Block y = Block::Zero(3 * (order + 1), 3);
  y.topRows(3).setIdentity();
  return y;
}

Block gate_target(const GateGrapeProblem& p) {
  Block t = Block::Zero(3 * (p.order + 1), 3);
  t.topRows(3) = p.target;
  return t;
}

std::vector<CascadeSegment> segments(const GateGrapeProblem& p, std::span<const double> phases) {
  const double h = p.duration / static_cast<double>(p.samples);
  std::vector<CascadeSegment> out;
  out.reserve(phases.size());
  for (double phi : phases) out.emplace_back(phi, p.order, h);
  return out;
}

}  // namespace

double gate_fidelity(const GateGrapeProblem& problem, std::span<const double> phases) {
  check(problem, phases);
  Block y = gate_initial(problem.order);
  for (const auto& seg : segments(problem, phases)) y = seg.apply(seg.r, y);
  return -(y - gate_target(problem)).squaredNorm();
}

double gate_fidelity_gradient(const GateGrapeProblem& problem, std::span<const double> phases,
                              std::vector<double>& gradient) {
  check(problem, phases);
  const auto segs = segments(problem, phases);
  const std::size_t k = segs.size();
  std::vector<Block> y(k + 1);
  y[0] = gate_initial(problem.order);
  for (std::size_t j = 0; j < k; ++j) y[j + 1] = segs[j].apply(segs[j].r, y[j]);
  const Block miss = y[k] - gate_target(problem);
  Block lambda = -2.0 * miss;
  gradient.assign(k, 0.0);
  for (std::size_t j = k; j-- > 0;) {
    gradient[j] = (lambda.array() * segs[j].apply(segs[j].dr, y[j]).array()).sum();
    lambda = segs[j].apply_transpose(segs[j].r, lambda);
  }
  return -miss.squaredNorm();
}

std::vector<Mat3> gate_initial_costates(const GateGrapeProblem& problem,
                                        std::span<const double> phases) {
  check(problem, phases);
  Block y = gate_initial(problem.order);
  const auto segs = segments(problem, phases);
  for (const auto& seg : segs) y = seg.apply(seg.r, y);
  Block lambda = -2.0 * (y - gate_target(problem));
  for (std::size_t j = segs.size(); j-- > 0;) lambda = segs[j].apply_transpose(segs[j].r, lambda);
  std::vector<Mat3> out;
  for (int i = 0; i <= problem.order; ++i) out.push_back(lambda.block(3 * i, 0, 3, 3));
  return out;
}

GrapeResult grape_optimize(const GateGrapeProblem& problem, const GrapeOptions& options) {
  std::vector<double> phi = problem.initial_phase;
  if (phi.empty()) phi.assign(problem.samples, 0.0);
  check(problem, phi);
  return ascend(std::move(phi), problem.duration,
                [&](std::span<const double> x, std::vector<double>& g) {
                  return gate_fidelity_gradient(problem, x, g);
                },
                options);
}

ControlField phase_field(double duration, std::span<const double> phases) {
  const std::size_t k = phases.size();
  std::vector<double> t(k + 1), p(k + 1);
  for (std::size_t j = 0; j <= k; ++j) t[j] = duration * static_cast<double>(j) / static_cast<double>(k);
  std::copy(phases.begin(), phases.end(), p.begin());
  p[k] = phases.empty() ? 0.0 : phases.back();
  return ControlField::phase_only(std::move(t), std::move(p));
}

std::vector<double> resample_phase(const ControlField& field, double duration, std::size_t samples) {
  if (samples == 0) throw ConfigError("resampling needs at least one sample");
  if (duration > field.duration()) throw RangeError("resampling past the end of the field");
  std::vector<double> out(samples);
  const double h = duration / static_cast<double>(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    const FieldValue v = field.at((static_cast<double>(j) + 0.5) * h);
    out[j] = std::atan2(v.uy, v.ux);
  }
  return out;
}

std::vector<double> smooth_perturbation(std::size_t samples, double amplitude, std::uint64_t seed,
                                        int modes) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0), shift(0.0, 2.0 * kPi);
  std::vector<double> out(samples, 0.0);
  for (int m = 1; m <= modes; ++m) {
    const double a = coeff(rng) / m, b = shift(rng);
    for (std::size_t j = 0; j < samples; ++j) {
      const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(samples);
      out[j] += a * std::sin(kPi * m * x + b);
    }
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : out) v *= amplitude / peak;
  return out;
}

}  // namespace pulseforge::grape
