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

#include "pulseforge/control_field.hpp"
#include "pulseforge/dynamics.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/integrator.hpp"

using namespace pulseforge;
using namespace pulseforge::dynamics;

namespace {

ControlField wobbly_field(double duration) {
  std::vector<double> t, ux, uy;
  const std::size_t n = 400;
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = duration * static_cast<double>(i) / static_cast<double>(n);
    t.push_back(s);
    ux.push_back(0.8 * std::cos(0.7 * s) + 0.1);
    uy.push_back(0.5 * std::sin(1.3 * s));
  }
  return ControlField::general(t, ux, uy);
}

}  // namespace

TEST_CASE("rk4 converges at fourth order") {
  auto rhs = [](double t, const Eigen::Vector2d& y) { return Eigen::Vector2d(y[1], -y[0] + 0.1 * t); };
  auto run = [&](double h) {
    Eigen::Vector2d y(1.0, 0.0);
    const std::size_t n = step_count(2.0, h);
    const double dt = 2.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) y = rk4_step(rhs, dt * static_cast<double>(i), y, dt);
    return y;
  };
  // y'' = -y + 0.1 t, y(0) = 1, y'(0) = 0.
  const double exact = std::cos(2.0) + 0.1 * (2.0 - std::sin(2.0));
  const double e1 = std::abs(run(0.1)[0] - exact), e2 = std::abs(run(0.05)[0] - exact);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("a constant x field of duration pi inverts the resonant spin") {
  const ControlField f = ControlField::constant(kPi, 1.0, 0.0);
  const BlochVector q = propagate_bloch_final(f, {}, north_pole(), kPi);
  CHECK((q - south_pole()).norm() < 1e-12);
  CHECK(inversion_fidelity(q) == doctest::Approx(1.0));
}

TEST_CASE("off-resonance rotation matches the closed form") {
  const double d = 0.4, t = 3.1;
  const ControlField f = ControlField::constant(t, 1.0, 0.0);
  const BlochVector q = propagate_bloch_final(f, {d, 0.0}, north_pole(), t);
  // dq/dt = q x w is a rotation by -|w| t about w.
  const Vec3 w(1.0, 0.0, d);
  const Eigen::AngleAxisd rot(-w.norm() * t, w.normalized());
  CHECK((q - rot * north_pole()).norm() < 1e-12);
}

TEST_CASE("propagation preserves the norm and the rotation is orthogonal") {
  const ControlField f = wobbly_field(5.0);
  const BlochVector q = propagate_bloch_final(f, {0.3, -0.2}, north_pole(), 5.0);
  CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-10));
  const Mat3 r = propagate_rotation(f, {0.3, -0.2}, 5.0);
  CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-10);
  CHECK((r * north_pole() - q).norm() < 1e-10);
}

TEST_CASE("state cascade coefficients are the Taylor coefficients in the offset") {
  const double T = 5.0, h = 1e-4;
  const ControlField f = wobbly_field(T);
  const auto stack = propagate_cascade_final(f, PerturbativeStack::initial(CascadeMode::state_offset, 2), T);
  const BlochVector qp = propagate_bloch_final(f, {h, 0.0}, north_pole(), T);
  const BlochVector q0 = propagate_bloch_final(f, {0.0, 0.0}, north_pole(), T);
  const BlochVector qm = propagate_bloch_final(f, {-h, 0.0}, north_pole(), T);
  CHECK((stack.vector(0) - q0).norm() < 1e-10);
  CHECK((stack.vector(1) - (qp - qm) / (2.0 * h)).norm() < 1e-6);
  CHECK((stack.vector(2) - (qp - 2.0 * q0 + qm) / (2.0 * h * h)).norm() < 1e-3);
}

TEST_CASE("amplitude cascade coefficients are the Taylor coefficients in alpha") {
  const double T = 4.0, h = 1e-4;
  const ControlField f = wobbly_field(T);
  const auto stack = propagate_cascade_final(f, PerturbativeStack::initial(CascadeMode::state_amplitude, 1), T);
  const BlochVector qp = propagate_bloch_final(f, {0.0, h}, north_pole(), T);
  const BlochVector qm = propagate_bloch_final(f, {0.0, -h}, north_pole(), T);
  CHECK((stack.vector(1) - (qp - qm) / (2.0 * h)).norm() < 1e-6);
}

TEST_CASE("gate cascade matches finite differences of the rotation") {
  const double T = 4.0, h = 1e-4;
  const ControlField f = wobbly_field(T);
  const auto stack = propagate_cascade_final(f, PerturbativeStack::initial(CascadeMode::gate_offset, 1), T);
  const Mat3 rp = propagate_rotation(f, {h, 0.0}, T);
  const Mat3 rm = propagate_rotation(f, {-h, 0.0}, T);
  CHECK((stack.matrix(0) - propagate_rotation(f, {}, T)).norm() < 1e-10);
  CHECK((stack.matrix(1) - (rp - rm) / (2.0 * h)).norm() < 1e-6);
}

TEST_CASE("robust fidelity and residual") {
  auto s = PerturbativeStack::initial(CascadeMode::state_offset, 1);
  CHECK(robust_fidelity(s, BlochVector(north_pole())) == doctest::Approx(0.0));
  CHECK(robust_fidelity(s, BlochVector(south_pole())) == doctest::Approx(-4.0));
  s.packed()[3] = 0.5;
  CHECK(inhomogeneous_residual(s) == doctest::Approx(0.25));
  CHECK(robust_fidelity(s, BlochVector(north_pole())) == doctest::Approx(-0.25));
  CHECK_THROWS_AS(robust_fidelity(s, Mat3(Mat3::Identity())), ConfigError);
}

TEST_CASE("profile grid and local maxima") {
  const auto grid = uniform_grid(-1.0, 1.0, 5);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == -1.0);
  CHECK(grid.back() == 1.0);
  CHECK(grid[2] == doctest::Approx(0.0));
  RobustnessProfile p;
  for (double x : uniform_grid(-3.0, 3.0, 601)) p.points.push_back({x, std::cos(2.0 * kPi * x / 2.0)});
  // cos(pi x) on [-3, 3]: maxima at -2, 0, 2.
  CHECK(count_local_maxima(p) == 3);
  RobustnessProfile flat;
  for (double x : uniform_grid(0.0, 1.0, 50)) flat.points.push_back({x, 1.0 + 1e-10 * std::sin(40.0 * x)});
  CHECK(count_local_maxima(flat) == 0);
}

TEST_CASE("robustness profile of a hard pulse peaks on resonance") {
  const ControlField f = ControlField::constant(kPi, 1.0, 0.0);
  const auto p = robustness_profile(f, ProfileAxis::offset, uniform_grid(-0.5, 0.5, 101));
  CHECK(p.points[50].fidelity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.points[0].fidelity < 1.0);
  CHECK(p.points[0].fidelity == doctest::Approx(p.points[100].fidelity).epsilon(1e-12));
}

TEST_CASE("field sampling rejects times outside the pulse") {
  const ControlField f = ControlField::constant(1.0, 1.0, 0.0);
  CHECK_THROWS_AS(f.at(1.5), RangeError);
  CHECK(f.at(0.5).ux == 1.0);
  const ControlField b = ControlField::bang_bang(3.0, 1.0, {1.0, 2.0});
  CHECK(b.at(0.5).ux == 1.0);
  CHECK(b.at(1.5).ux == -1.0);
  CHECK(b.at(2.5).ux == 1.0);
  CHECK(b.area(3.0) == doctest::Approx(3.0));
  CHECK(parse_cascade_mode(to_string(CascadeMode::gate_offset)) == CascadeMode::gate_offset);
  CHECK_THROWS_AS(parse_cascade_mode("nope"), ConfigError);
}
