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
#include <random>
#include <vector>

#include "pulseforge/analytic.hpp"
#include "pulseforge/dynamics.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/flows.hpp"

using namespace pulseforge;
using namespace pulseforge::flows;

namespace {

ShootingPoint random_point(Variant v, int n, std::uint64_t seed, double scale = 0.8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  ShootingPoint p{v, n, {}};
  p.params.resize(static_cast<std::size_t>(landscape_dimension(v, n)));
  for (double& x : p.params) x = u(rng);
  // Keep r away from zero for the time-cost flows.
  if (v == Variant::time_offset || v == Variant::gate_time) p.params[0] = 1.5;
  return p;
}

}  // namespace

TEST_CASE("landscape dimensions") {
  CHECK(landscape_dimension(Variant::energy_offset, 3) == 6);
  CHECK(landscape_dimension(Variant::time_offset, 2) == 4);
  CHECK(landscape_dimension(Variant::amplitude, 1) == 2);
  CHECK(landscape_dimension(Variant::ensemble, 4) == 6);
  CHECK(landscape_dimension(Variant::gate_time, 2) == 8);
  CHECK(parse_variant(to_string(Variant::gate_time)) == Variant::gate_time);
  CHECK_THROWS_AS(parse_variant("nope"), ConfigError);
  ShootingPoint bad{Variant::energy_offset, 2, {1.0}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("ensemble initial costates close sum l = e_x") {
  const ShootingPoint p{Variant::ensemble, 3, {0.2, 0.5, -0.4, 0.1}};
  const OmegaStack s = initial_stack(p);
  REQUIRE(s.vectors.size() == 3);
  Vec3 sum = Vec3::Zero();
  for (const Vec3& l : s.vectors) sum += l;
  CHECK((sum - Vec3(1.0, 0.0, 0.0)).norm() < 1e-15);
}

TEST_CASE("first integrals are conserved along every flow") {
  FlowOptions fo;
  fo.record_states = false;
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    CHECK(flow_energy_offset(random_point(Variant::energy_offset, n, 11), 6.0, fo).audit.worst() < 1e-8);
    CHECK(flow_time_offset(random_point(Variant::time_offset, n, 12), 3.0, fo).audit.worst() < 1e-8);
    CHECK(flow_amplitude(random_point(Variant::amplitude, n, 13, 0.5), 4.0, fo).audit.worst() < 1e-8);
  }
  for (int n = 1; n <= 2; ++n)
    CHECK(flow_gate(random_point(Variant::gate_time, n, 14, 0.5), 3.0, fo).audit.worst() < 1e-8);
  const std::vector<double> offsets{-0.5, 0.0, 0.5};
  CHECK(flow_ensemble(random_point(Variant::ensemble, 3, 15), offsets, CostKind::energy, 5.0, fo).audit.worst() < 1e-8);
}

TEST_CASE("flow fields reproduce the flow: energy-offset u = Omega_0xy") {
  const ShootingPoint p = random_point(Variant::energy_offset, 2, 21);
  const FlowRun run = flow_energy_offset(p, 2.0);
  REQUIRE(run.states.size() == run.times.size());
  const std::size_t i = run.times.size() / 2;
  const double t = 0.5 * (run.times[i] + run.times[i + 1]);
  const Vec3 w = 0.5 * (run.states[i].vectors[0] + run.states[i + 1].vectors[0]);
  const FieldValue u = run.field.at(t);
  CHECK(u.ux == doctest::Approx(w.x()).epsilon(1e-12));
  CHECK(u.uy == doctest::Approx(w.y()).epsilon(1e-12));
}

TEST_CASE("bang-bang flow switches where the closed form does") {
  for (double h : {0.1, 0.5, 0.9}) {
    CAPTURE(h);
    const auto s = analytic::bangbang_o1(h);
    const FlowRun run = flow_bang_bang(h, 1.0, s.period);
    REQUIRE(run.switch_times.size() == 2);
    CHECK(run.switch_times[0] == doctest::Approx(s.T1).epsilon(1e-9));
    CHECK(run.switch_times[1] == doctest::Approx(s.T2).epsilon(1e-9));
    CHECK(run.audit.worst() < 1e-10);
  }
  // Starting exactly at Omega_0x = 0 the rate picks the sign.
  CHECK(flow_bang_bang(0.0, 1.0, 1.0).field.at(0.5).ux == 1.0);
}

TEST_CASE("gate flow in the I = 0 plane is the bang-bang system") {
  // Omega_0 = (H, 0, 0), I = 0, Omega_1 = (0, -1, 0): Omega_0x = H - sin t until
  // asin H, then the reversed rotation brings it back to zero at 2 pi (H = sqrt 3 / 2).
  const double h = std::sqrt(3.0) / 2.0;
  const ShootingPoint pt{Variant::gate_time, 1, {h, 0.0, 0.0, kPi / 2.0, -kPi / 2.0}};
  const FlowRun run = flow_gate(pt, 7.0 * kPi / 3.0);
  REQUIRE(run.switch_times.size() == 2);
  CHECK(run.switch_times[0] == doctest::Approx(kPi / 3.0).epsilon(1e-9));
  CHECK(run.switch_times[1] == doctest::Approx(2.0 * kPi).epsilon(1e-9));
  CHECK(run.audit.names.size() == 3);
  CHECK(run.audit.worst() < 1e-12);
  // Off the plane the smooth flow runs.
  const ShootingPoint off{Variant::gate_time, 1, {h, 0.1, 0.05, kPi / 2.0, -kPi / 2.0}};
  CHECK(flow_gate(off, 1.0).switch_times.empty());
}

TEST_CASE("mirror ensemble bang-bang flow agrees with the smooth flow before the first switch") {
  // l_1 = (0.5, b), l_2 = (0.5, -b): sum l_y = 0 for all t.
  const ShootingPoint p{Variant::ensemble, 2, {0.5, 1.5}};
  const std::vector<double> offsets{-0.5, 0.5};
  const FlowRun bb = flow_ensemble_bang_bang(p, offsets, 10.0);
  REQUIRE(!bb.switch_times.empty());
  const double t1 = bb.switch_times.front();
  const FlowRun smooth = flow_ensemble(p, offsets, CostKind::time, 0.9 * t1);
  const FlowRun early = flow_ensemble_bang_bang(p, offsets, 0.9 * t1);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK((smooth.states.back().vectors[k] - early.states.back().vectors[k]).norm() < 1e-12);
  // sum l_x changes sign at every switch.
  for (double ts : bb.switch_times) {
    std::size_t i = 0;
    while (bb.times[i + 1] < ts) ++i;
    const double s0 = bb.states[i].vectors[0].x() + bb.states[i].vectors[1].x();
    const double s1 = bb.states[i + 1].vectors[0].x() + bb.states[i + 1].vectors[1].x();
    CHECK(s0 * s1 <= 0.0);
  }
  CHECK(bb.audit.worst() < 1e-8);
  const ShootingPoint asym{Variant::ensemble, 2, {0.5, 0.3}};
  CHECK_THROWS_AS(flow_ensemble_bang_bang(ShootingPoint{Variant::time_offset, 1, {0.5, 0.3}},
                                          std::vector<double>{0.0}, 1.0),
                  ConfigError);
  CHECK_THROWS_AS(flow_ensemble_bang_bang(asym, std::vector<double>{0.1}, 1.0), ConfigError);
}

TEST_CASE("singular time flows are reported") {
  FlowOptions fo;
  fo.singular_threshold = 0.5;
  const ShootingPoint p{Variant::time_offset, 2, {0.1, 0.0, 0.0, 0.0}};
  CHECK_THROWS_AS(flow_time_offset(p, 2.0, fo), SingularFlowError);
}
