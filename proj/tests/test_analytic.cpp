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

#include "pulseforge/analytic.hpp"
#include "pulseforge/dynamics.hpp"
#include "pulseforge/error.hpp"

using namespace pulseforge;
using dynamics::CascadeMode;
using dynamics::PerturbativeStack;

namespace {

// Planar state (theta, x_1) read off a propagated order-1 cascade:
// q_0 = (0, sin theta, cos theta), x_1 = q_1x.
analytic::PlanarState propagated(const ControlField& f, double t) {
  const auto s = dynamics::propagate_cascade_final(f, PerturbativeStack::initial(CascadeMode::state_offset, 1), t);
  return {std::atan2(s.vector(0).y(), s.vector(0).z()), s.vector(1).x()};
}

}  // namespace

TEST_CASE("energy solution: period and planar state agree with propagation") {
  const auto s = analytic::energy_o1(0.4);
  CHECK(s.m == doctest::Approx(0.7));
  CHECK(s.t_star == doctest::Approx(2.0 * std::comp_ellint_1(std::sqrt(0.7))).epsilon(1e-12));
  const ControlField f = analytic::energy_o1_field(s, 1e-4);
  for (double t : {0.3, 1.1, 2.0, s.t_star - 0.1}) {
    CAPTURE(t);
    const auto p = propagated(f, t);
    CHECK(std::remainder(p.theta - s.theta(t), 2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(p.x1 == doctest::Approx(s.x1(t)).epsilon(1e-6));
  }
  CHECK(std::abs(s.theta(s.t_star)) == doctest::Approx(kPi).epsilon(1e-10));
}

TEST_CASE("energy solution: adjoint field satisfies the flow first integrals") {
  const auto s = analytic::energy_o1(0.3);
  for (double t : {0.0, 0.7, 1.9, 3.3}) {
    const double w0 = s.omega0x(t), w1y = s.omega1y(t), w1z = s.omega1z(t);
    // |Omega_1|^2 and H = Omega_0x^2 / 2 + Omega_1z are conserved.
    CHECK(w1y * w1y + w1z * w1z == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(0.5 * w0 * w0 + w1z == doctest::Approx(s.H).epsilon(1e-10));
  }
}

TEST_CASE("robust energy-optimal inversion") {
  // The excitation-transfer root is where x_1 vanishes on the inverting branch.
  const auto s = analytic::energy_o1(0.652226);
  const auto f = analytic::energy_o1_field(s, 1e-4);
  const auto st = dynamics::propagate_cascade_final(f, PerturbativeStack::initial(CascadeMode::state_offset, 1), s.t_star);
  CHECK((st.vector(0) - south_pole()).norm() < 1e-6);
  CHECK(st.vector(1).norm() < 1e-4);
  CHECK(s.area == doctest::Approx(f.area(s.t_star)).epsilon(1e-6));
}

TEST_CASE("bang-bang solution agrees with propagation") {
  const auto b = analytic::bangbang_o1(0.5);
  CHECK(b.control(0.1) == 1.0);
  CHECK(b.control(b.T1 + 0.1) == -1.0);
  CHECK(b.control(b.T2 + 0.1) == 1.0);
  const auto f = analytic::bangbang_o1_field(b);
  for (double t : {0.5, b.T1 + 0.3, b.T2 + 0.2}) {
    CAPTURE(t);
    const auto p = propagated(f, t);
    CHECK(std::remainder(p.theta - b.theta(t), 2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(p.x1 == doctest::Approx(b.x1(t)).epsilon(1e-9));
  }
  // The field switches where Omega_0x = H + ... changes sign; theta returns to pi at 2 T1 - pi.
  CHECK(std::abs(std::remainder(b.theta(b.inversion_time()), 2.0 * kPi)) == doctest::Approx(kPi).epsilon(1e-10));
}

TEST_CASE("amplitude solution is a unit phase pulse of period 4K / omega") {
  const auto a = analytic::alpha_o1(0.3, 0.4);
  CHECK(a.omega == doctest::Approx(std::sqrt(0.5)));
  CHECK(a.m == doctest::Approx(0.5 - 0.3 / (2.0 * 0.5)));
  CHECK(a.t_f == doctest::Approx(4.0 * std::comp_ellint_1(std::sqrt(a.m)) / a.omega).epsilon(1e-12));
  const auto f = analytic::alpha_o1_field(a);
  CHECK(f.representation() == FieldRepresentation::phase_only);
  for (double t : {0.2, 3.0, 7.5}) {
    const auto v = f.at(t);
    CHECK(std::hypot(v.ux, v.uy) == doctest::Approx(1.0));
  }
}

TEST_CASE("domain checks") {
  CHECK_THROWS_AS(analytic::energy_o1(1.0), DomainError);
  CHECK_THROWS_AS(analytic::energy_o1(0.0), DomainError);
  CHECK_THROWS_AS(analytic::bangbang_o1(1.0), DomainError);
  CHECK_THROWS_AS(analytic::alpha_o1(0.0, 0.0), DomainError);
}
