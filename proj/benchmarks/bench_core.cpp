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

#include <benchmark/benchmark.h>

#include <vector>

#include "pulseforge/dynamics.hpp"
#include "pulseforge/grape.hpp"
#include "pulseforge/landscape.hpp"
#include "pulseforge/special_functions.hpp"

using namespace pulseforge;

static void BM_EllipticF(benchmark::State& state) {
  double phi = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(special::ellip_f(phi, 0.8));
    phi += 1e-6;
  }
}
BENCHMARK(BM_EllipticF);

static void BM_JacobiAm(benchmark::State& state) {
  double u = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(special::jacobi_am(u, 0.8));
    u += 1e-6;
  }
}
BENCHMARK(BM_JacobiAm);

static void BM_PropagateBloch(benchmark::State& state) {
  const ControlField f = ControlField::constant(2.0 * kPi, 0.8, 0.6);
  for (auto _ : state)
    benchmark::DoNotOptimize(dynamics::propagate_bloch_final(f, {0.3, 0.0}, north_pole(), 2.0 * kPi));
}
BENCHMARK(BM_PropagateBloch);

static void BM_Cascade(benchmark::State& state) {
  const ControlField f = ControlField::constant(2.0 * kPi, 0.8, 0.6);
  const auto init = dynamics::PerturbativeStack::initial(dynamics::CascadeMode::state_offset,
                                                         static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dynamics::propagate_cascade_final(f, init, 2.0 * kPi));
}
BENCHMARK(BM_Cascade)->DenseRange(1, 3);

static void BM_EnergyObjective(benchmark::State& state) {
  const auto p = landscape::default_problem(flows::Variant::energy_offset, 2);
  const std::vector<double> x{0.72, 0.79};
  for (auto _ : state) benchmark::DoNotOptimize(landscape::objective(p, x));
}
BENCHMARK(BM_EnergyObjective)->Unit(benchmark::kMillisecond);

static void BM_GrapeGradient(benchmark::State& state) {
  grape::GrapeProblem p;
  p.offsets = dynamics::uniform_grid(-0.5, 0.5, 100);
  p.duration = 3.0 * kPi;
  p.samples = static_cast<std::size_t>(state.range(0));
  const auto phases = grape::smooth_perturbation(p.samples, 2.0, 1);
  std::vector<double> g;
  for (auto _ : state) benchmark::DoNotOptimize(grape::fidelity_gradient(p, phases, g));
}
BENCHMARK(BM_GrapeGradient)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
