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

#include "pulseforge/analytic.hpp"
#include "pulseforge/dynamics.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/landscape.hpp"
#include "pulseforge/special_functions.hpp"

using namespace pulseforge;
using namespace pulseforge::landscape;
using flows::Variant;

TEST_CASE("default problems and their sections") {
  CHECK(default_problem(Variant::energy_offset, 2).reduction == Reduction::one_field);
  CHECK(default_problem(Variant::time_offset, 1).reduction == Reduction::bang_bang);
  CHECK(default_problem(Variant::time_offset, 2).reduction == Reduction::unit_field);
  CHECK(default_problem(Variant::amplitude, 1).reduction == Reduction::invariants);
  CHECK(default_problem(Variant::ensemble, 2).reduction == Reduction::mirror);
  CHECK(default_problem(Variant::ensemble, 4).reduction == Reduction::none);
  CHECK(search_dimension(default_problem(Variant::ensemble, 2)) == 1);
  CHECK(search_dimension(default_problem(Variant::ensemble, 4)) == 6);
  CHECK(search_dimension(default_problem(Variant::time_offset, 3)) == 6);
  CHECK(default_problem(Variant::gate_time, 2).reduction == Reduction::bang_bang);
  CHECK(search_dimension(default_problem(Variant::gate_time, 2)) == 2);
  for (Reduction r : {Reduction::none, Reduction::one_field, Reduction::bang_bang, Reduction::invariants,
                      Reduction::unit_field, Reduction::mirror})
    CHECK(parse_reduction(to_string(r)) == r);
  const auto offsets = default_problem(Variant::ensemble, 4).offsets;
  REQUIRE(offsets.size() == 4);
  CHECK(offsets[0] == doctest::Approx(-0.5));
  CHECK(offsets[1] == doctest::Approx(-1.0 / 6.0));
  const Box b = default_box(default_problem(Variant::energy_offset, 1));
  CHECK(b.lower.size() == 1);
  CHECK(b.lower[0] > 0.0);
}

TEST_CASE("mirror section maps onto mirror-paired costates") {
  for (int n : {2, 3, 4, 5}) {
    CAPTURE(n);
    Problem p = default_problem(Variant::ensemble, n);
    p.reduction = Reduction::mirror;
    std::vector<double> x;
    for (std::size_t i = 0; i < search_dimension(p); ++i) x.push_back(0.1 * static_cast<double>(i + 1));
    const auto stack = flows::initial_stack(shooting_point(p, x));
    Vec3 sum = Vec3::Zero();
    for (const Vec3& l : stack.vectors) sum += l;
    CHECK((sum - Vec3(1.0, 0.0, 0.0)).norm() < 1e-14);
    const auto k = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(stack.vectors[i].x() == doctest::Approx(stack.vectors[k - 1 - i].x()));
      CHECK(stack.vectors[i].y() == doctest::Approx(-stack.vectors[k - 1 - i].y()));
    }
  }
  Problem skew = default_problem(Variant::ensemble, 2);
  skew.offsets = {-0.5, 0.3};
  const std::vector<double> x{0.2};
  CHECK_THROWS_AS(objective(skew, x), ConfigError);
}

TEST_CASE("one-field energy objective reproduces the elliptic solution") {
  const Problem p = default_problem(Variant::energy_offset, 1);
  const double h = 0.652226;
  const std::vector<double> x{h};
  const ObjectiveResult r = objective(p, x);
  REQUIRE(!r.failed);
  const double m = 0.5 * (1.0 + h);
  CHECK(r.t_star == doctest::Approx(2.0 * special::ellip_k(m)).epsilon(1e-5));
  CHECK(r.area == doctest::Approx(analytic::energy_o1(h).area).epsilon(1e-5));
  CHECK(r.f_star > -1e-8);
  CHECK(r.audit.worst() < 1e-8);
  CHECK(solution_cost(p, r) == r.area);
}

TEST_CASE("refine converges from a perturbed start") {
  const Problem p = default_problem(Variant::energy_offset, 1);
  const std::vector<double> x0{0.62};
  const SynthesisRecord rec = refine(p, x0);
  CHECK(rec.converged);
  CHECK(rec.x[0] == doctest::Approx(0.652226).epsilon(1e-4));
  CHECK(rec.result.f_star > -1e-9);
}

TEST_CASE("order-2 gate section refines to a palindromic robust NOT") {
  const Problem p = default_problem(Variant::gate_time, 2);
  const std::vector<double> x0{-0.98, 1.72};
  RefineOptions ro;
  ro.initial_time = 4.28 * kPi;
  const SynthesisRecord rec = refine(p, x0, ro);
  CHECK(rec.result.f_star > -1e-9);
  CHECK(rec.result.t_star / kPi == doctest::Approx(4.28173).epsilon(1e-5));
  flows::FlowOptions fo;
  fo.step = p.step;
  const flows::FlowRun run = flows::flow_gate(shooting_point(p, rec.x), rec.result.t_star, fo);
  REQUIRE(run.switch_times.size() == 4);
  CHECK(run.switch_times[0] + run.switch_times[3] == doctest::Approx(rec.result.t_star).epsilon(1e-6));
  CHECK(run.switch_times[1] + run.switch_times[2] == doctest::Approx(rec.result.t_star).epsilon(1e-6));
  CHECK(run.audit.worst() < 1e-10);
  const ControlField f = synthesize_field(p, rec.x, rec.result.t_star);
  const auto stack = dynamics::propagate_cascade_final(
      f, dynamics::PerturbativeStack::initial(dynamics::CascadeMode::gate_offset, 2), rec.result.t_star);
  CHECK(dynamics::inhomogeneous_residual(stack) < 1e-8);
}

TEST_CASE("joint spin propagation matches direct propagation of the synthesized field") {
  Problem p = default_problem(Variant::energy_offset, 2);
  const std::vector<double> x{0.72, 0.79};
  const double t = 5.0;
  const std::vector<double> offsets{-0.3, 0.05, 0.4};
  const auto joint = spins_at(p, x, t, offsets);
  const ControlField f = synthesize_field(p, x, t);
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const BlochVector q = dynamics::propagate_bloch_final(f, {offsets[k], 0.0}, north_pole(), t);
    CHECK((q - joint[k]).norm() < 1e-5);
  }
}

TEST_CASE("grid scans flag failed cells instead of zeroing them") {
  Problem p = default_problem(Variant::energy_offset, 2);
  p.t_max = 3.0;
  const Axis ax{"H", 0.2, 1.2, 3}, ay{"J", -2.0, 0.8, 3};
  const LandscapeScan scan = grid_scan(p, ax, ay);
  REQUIRE(scan.cells.size() == 9);
  // J = -2 lies below -sqrt(2H) for every H on the axis.
  for (std::size_t ix = 0; ix < 3; ++ix) {
    CHECK(scan.at(ix, 0).failed);
    CHECK(!scan.at(ix, 0).failure.empty());
  }
  CHECK(!scan.at(1, 2).failed);
  CHECK(std::isfinite(scan.at(1, 2).f_star));
}

TEST_CASE("malformed problems are rejected") {
  Problem p = default_problem(Variant::energy_offset, 1);
  CHECK_THROWS_AS(objective(p, std::vector<double>{0.1, 0.2}), ConfigError);
  CHECK_THROWS_AS(objective(p, std::vector<double>{std::nan("")}), ConfigError);
  p.reduction = Reduction::invariants;
  CHECK_THROWS_AS(objective(p, std::vector<double>{0.1, 0.2}), ConfigError);
  Problem e = default_problem(Variant::ensemble, 3);
  CHECK_THROWS_AS(grape_seed(e, -1.0), ConfigError);
  e.reduction = Reduction::mirror;
  CHECK_THROWS_AS(grape_seed(e, 1.0), ConfigError);
}
