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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "pulseforge/dynamics.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/grape.hpp"

using namespace pulseforge;
using namespace pulseforge::grape;

namespace {

GrapeProblem small_problem() {
  GrapeProblem p;
  p.offsets = {-0.4, -0.1, 0.2, 0.5};
  p.duration = 4.0;
  p.samples = 24;
  p.initial_phase = smooth_perturbation(p.samples, 1.5, 7);
  return p;
}

}  // namespace

TEST_CASE("mean fidelity agrees with direct propagation") {
  const GrapeProblem p = small_problem();
  const ControlField f = phase_field(p.duration, p.initial_phase);
  double mean = 0.0;
  for (double d : p.offsets) mean -= dynamics::propagate_bloch_final(f, {d, 0.0}, north_pole(), p.duration, {1e-4}).z();
  mean /= static_cast<double>(p.offsets.size());
  CHECK(mean_fidelity(p, p.initial_phase) == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("adjoint gradient matches central differences") {
  const GrapeProblem p = small_problem();
  std::vector<double> g;
  const double f = fidelity_gradient(p, p.initial_phase, g);
  CHECK(f == doctest::Approx(mean_fidelity(p, p.initial_phase)).epsilon(1e-14));
  REQUIRE(g.size() == p.samples);
  const double h = 1e-6;
  for (std::size_t j = 0; j < p.samples; j += 5) {
    std::vector<double> a = p.initial_phase, b = p.initial_phase;
    a[j] += h;
    b[j] -= h;
    CAPTURE(j);
    CHECK(g[j] == doctest::Approx((mean_fidelity(p, a) - mean_fidelity(p, b)) / (2.0 * h)).epsilon(1e-6));
  }
}

TEST_CASE("initial costates are the gradient with respect to the initial state") {
  const GrapeProblem p = small_problem();
  const auto costates = initial_costates(p, p.initial_phase);
  const ControlField f = phase_field(p.duration, p.initial_phase);
  const double h = 1e-6;
  for (std::size_t k = 0; k < p.offsets.size(); ++k)
    for (int axis = 0; axis < 3; ++axis) {
      BlochVector e = BlochVector::Zero();
      e[axis] = h;
      // -z(t_f) is linear in q(0).
      const double fp = -dynamics::propagate_bloch_final(f, {p.offsets[k], 0.0}, north_pole() + e, p.duration, {1e-4}).z();
      const double fm = -dynamics::propagate_bloch_final(f, {p.offsets[k], 0.0}, north_pole() - e, p.duration, {1e-4}).z();
      CHECK(costates[k][axis] == doctest::Approx((fp - fm) / (2.0 * h)).epsilon(1e-6));
    }
}

TEST_CASE("optimization increases the mean fidelity monotonically") {
  GrapeProblem p = small_problem();
  p.duration = 6.0;
  GrapeOptions o;
  o.iterations = 200;
  const GrapeResult r = grape_optimize(p, o);
  REQUIRE(r.history.size() >= 2);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1]);
  CHECK(r.history.back() > r.history.front() + 1.0);
  CHECK(r.history.back() == doctest::Approx(mean_fidelity(p, r.phases)).epsilon(1e-12));
  // Stationary at the end.
  std::vector<double> g;
  fidelity_gradient(p, r.phases, g);
  double norm2 = 0.0;
  for (double v : g) norm2 += v * v;
  CHECK(std::sqrt(norm2) < 1e-6);
}

TEST_CASE("phase sampling helpers") {
  const auto a = smooth_perturbation(50, 0.3, 3), b = smooth_perturbation(50, 0.3, 3);
  CHECK(a == b);
  double peak = 0.0;
  for (double v : a) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(0.3));
  const ControlField f = phase_field(2.0, a);
  const auto back = resample_phase(f, 2.0, 50);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::remainder(back[j] - a[j], 2.0 * kPi) == doctest::Approx(0.0));
}

TEST_CASE("gate fidelity agrees with cascade propagation") {
  for (int order : {1, 2, 3}) {
    CAPTURE(order);
    GateGrapeProblem p;
    p.order = order;
    p.duration = 5.0;
    p.samples = 30;
    const auto phases = smooth_perturbation(p.samples, 2.0, 11);
    const auto stack = dynamics::propagate_cascade_final(
        phase_field(p.duration, phases),
        dynamics::PerturbativeStack::initial(dynamics::CascadeMode::gate_offset, order), p.duration, {1e-4});
    CHECK(gate_fidelity(p, phases) == doctest::Approx(dynamics::robust_fidelity(stack, p.target)).epsilon(1e-9));
  }
}

TEST_CASE("gate segment propagator matches the block matrix exponential") {
  // One segment; the cascade generator on (q_0, q_1, q_2) is block lower
  // bidiagonal with q x u on the diagonal and q x e_z below it.
  const double phi = 0.7, h = 0.9;
  GateGrapeProblem p;
  p.order = 2;
  p.duration = h;
  p.samples = 2;
  const std::vector<double> phases{phi, phi};
  auto cross = [](const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return m;
  };
  Eigen::Matrix<double, 9, 9> a = Eigen::Matrix<double, 9, 9>::Zero();
  for (int k = 0; k < 3; ++k) {
    a.block<3, 3>(3 * k, 3 * k) = -cross(Vec3(std::cos(phi), std::sin(phi), 0.0));
    if (k > 0) a.block<3, 3>(3 * k, 3 * k - 3) = -cross(Vec3(0.0, 0.0, 1.0));
  }
  const Eigen::Matrix<double, 9, 9> e = (h * a).exp();
  Eigen::Matrix<double, 9, 3> y = Eigen::Matrix<double, 9, 3>::Zero();
  y.topRows<3>().setIdentity();
  y = e * y;
  Eigen::Matrix<double, 9, 3> t = Eigen::Matrix<double, 9, 3>::Zero();
  t.topRows<3>() = p.target;
  CHECK(gate_fidelity(p, phases) == doctest::Approx(-(y - t).squaredNorm()).epsilon(1e-13));
}

TEST_CASE("gate gradient and costates match central differences") {
  GateGrapeProblem p;
  p.order = 2;
  p.duration = 6.0;
  p.samples = 40;
  const auto phases = smooth_perturbation(p.samples, 2.0, 5);
  std::vector<double> g;
  const double f = gate_fidelity_gradient(p, phases, g);
  CHECK(f == doctest::Approx(gate_fidelity(p, phases)).epsilon(1e-14));
  const double h = 1e-6;
  for (std::size_t j = 0; j < p.samples; j += 7) {
    std::vector<double> a = phases, b = phases;
    a[j] += h;
    b[j] -= h;
    CAPTURE(j);
    CHECK(g[j] == doctest::Approx((gate_fidelity(p, a) - gate_fidelity(p, b)) / (2.0 * h)).epsilon(1e-6));
  }
  // p_k(0) = dF / dR_k(0): perturb one entry of the initial stack.
  const auto costates = gate_initial_costates(p, phases);
  REQUIRE(costates.size() == 3);
  const ControlField field = phase_field(p.duration, phases);
  for (int k = 0; k < 3; ++k) {
    auto fid = [&](double eps) {
      auto s0 = dynamics::PerturbativeStack::initial(dynamics::CascadeMode::gate_offset, 2);
      std::vector<double> packed(s0.packed().begin(), s0.packed().end());
      packed[static_cast<std::size_t>(9 * k + 4)] += eps;  // column 1, row 1
      const auto s = dynamics::PerturbativeStack::from_packed(dynamics::CascadeMode::gate_offset, 2, packed);
      return dynamics::robust_fidelity(dynamics::propagate_cascade_final(field, s, p.duration, {1e-4}), p.target);
    };
    CAPTURE(k);
    CHECK(costates[static_cast<std::size_t>(k)](1, 1) == doctest::Approx((fid(h) - fid(-h)) / (2.0 * h)).epsilon(1e-5));
  }
}

TEST_CASE("gate optimization ascends") {
  GateGrapeProblem p;
  p.order = 1;
  p.duration = 7.0;
  p.samples = 60;
  p.initial_phase = smooth_perturbation(p.samples, 2.0, 2);
  GrapeOptions o;
  o.iterations = 300;
  const GrapeResult r = grape_optimize(p, o);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1]);
  CHECK(r.history.back() > r.history.front());
  CHECK(r.history.back() == doctest::Approx(gate_fidelity(p, r.phases)).epsilon(1e-12));
}

TEST_CASE("bad problems are rejected") {
  GrapeProblem p = small_problem();
  p.initial_phase.pop_back();
  CHECK_THROWS_AS(grape_optimize(p), ConfigError);
  GrapeProblem q = small_problem();
  q.offsets.clear();
  CHECK_THROWS_AS(mean_fidelity(q, q.initial_phase), ConfigError);
}
