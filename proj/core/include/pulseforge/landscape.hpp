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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulseforge/control_field.hpp"
#include "pulseforge/dynamics.hpp"
#include "pulseforge/flows.hpp"
#include "pulseforge/types.hpp"

namespace pulseforge::landscape {

// Lower-dimensional sections of a variant's shooting space.
enum class Reduction {
  none,        // the variant's own ShootingPoint parameters
  one_field,   // energy-offset with u_y = 0: N=1 [H], N=2 [H, J], N=3 [Omega_0x, Omega_1y, Omega_2x]
  bang_bang,   // bang-bang along x: time-offset N = 1 [H]; gate N = 1 [H], N = 2 [Omega_0x, Omega_1y]
  invariants,  // amplitude N = 1 through its first integrals: [I_x, I_y]
  // time-offset with r(0) = Omega_0x(0) = 1 and Omega_N(0) free:
  // [(Omega_kx, Omega_ky) k = 1..N]; mapped back onto |Omega_N| = 1 by scaling.
  unit_field,
  // time-cost ensemble with offsets symmetric about zero and l_{N+1-k} the
  // x-axis mirror image of l_k, so u = +-e_x. With m = N / 2 pairs:
  // [l_ky k = 1..m, l_kx k = 2..m] for even N, [l_ky, l_kx k = 1..m] for odd N.
  mirror,
};

std::string_view to_string(Reduction r);
Reduction parse_reduction(std::string_view name);

Mat3 not_gate();

struct Problem {
  flows::Variant variant = flows::Variant::energy_offset;
  int order = 1;
  Reduction reduction = Reduction::none;
  flows::CostKind ensemble_cost = flows::CostKind::time;
  std::vector<double> offsets;  // ensemble spin offsets
  Mat3 gate = not_gate();
  // Use the mirrored sign branch of the one-field / bang-bang sections.
  bool mirrored = false;
  double t_max = 6.0 * kPi;
  double step = 1e-3;
  double singular_threshold = 1e-9;
};

// Problem with the defaults used for each variant (one-field energy sections,
// bang-bang time-offset at N = 1, mirror ensemble of two spins).
Problem default_problem(flows::Variant variant, int order);

std::size_t search_dimension(const Problem& problem);
bool is_time_cost(const Problem& problem);
flows::ShootingPoint shooting_point(const Problem& problem, std::span<const double> x);

struct ObjectiveResult {
  double f_star = -1.0e300;  // best robust fidelity over (0, t_max]
  double t_star = 0.0;
  double area = 0.0;         // int |u| dt over [0, t*]
  flows::FirstIntegralAudit audit;
  std::vector<double> residual;  // target residual at t*
  bool failed = false;
  std::string failure;
};

// Integrates the variant flow jointly with its cascade (or ensemble spins, or
// Bloch-matrix cascade), tracks F(t) on the step grid and refines the argmax by
// a three-point parabola. Singular flows are reported through `failed`.
ObjectiveResult objective(const Problem& problem, std::span<const double> x);

// Same scoring for an explicit field (analytic pulses, GRAPE output).
ObjectiveResult field_objective(const ControlField& field, dynamics::CascadeMode mode, int order,
                                const dynamics::FidelityTarget& target, double t_max,
                                double step = 1e-3);

// Residual vector at a prescribed time t (used by the shooting solver).
std::vector<double> residual_at(const Problem& problem, std::span<const double> x, double t);

// Cost minimized among robust solutions: area for energy variants, t* for time variants.
// Bloch vectors at time t of spins with the given offsets, started at the north
// pole and driven by the flow's field on the same integration grid as the cascade.
std::vector<BlochVector> spins_at(const Problem& problem, std::span<const double> x, double t,
                                  std::span<const double> offsets);

double solution_cost(const Problem& problem, const ObjectiveResult& result);

// Field of the extremal over [0, t_end].
ControlField synthesize_field(const Problem& problem, std::span<const double> x, double t_end);

struct SynthesisRecord {
  Problem problem;
  std::vector<double> x;  // search parameters
  flows::ShootingPoint point;
  ObjectiveResult result;
  bool converged = false;
  int iterations = 0;
};

struct RefineOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;
  double fidelity_tolerance = 1e-9;  // stop once F* >= -tolerance
  double fd_step = 1e-6;
  // Start time of the shooting unknown t (0: argmax of the objective window).
  double initial_time = 0.0;
  // Optional box on the search parameters (empty = unbounded).
  std::vector<double> lower;
  std::vector<double> upper;
};

// Local maximization of F* by Levenberg-Marquardt on the target residual with
// (parameters, t) as unknowns and a central-difference Jacobian.
SynthesisRecord refine(const Problem& problem, std::span<const double> x0,
                       const RefineOptions& options = {});

struct Axis {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 10;

  double value(std::size_t i) const;
};

struct LandscapeScan {
  Axis x;
  Axis y;
  // Row-major: cells[iy * x.count + ix].
  std::vector<ObjectiveResult> cells;

  const ObjectiveResult& at(std::size_t ix, std::size_t iy) const { return cells[iy * x.count + ix]; }
};

// Full-factorial objective over a two-parameter problem.
LandscapeScan grid_scan(const Problem& problem, const Axis& x, const Axis& y);

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Default search box of a problem.
Box default_box(const Problem& problem);

struct FindOptions {
  std::optional<Box> box;
  std::size_t starts = 0;         // 0: 64 for dim <= 4, else 256
  std::size_t refine_count = 0;   // refine the best starts only (0: all)
  std::uint64_t seed = 1;
  double robust_tolerance = 1e-6; // |F*| bound for a solution to count
  double search_step = 4e-3;      // coarse step of the search stage (0: problem.step)
  int search_iterations = 40;     // iteration cap of the search stage
  double polish_threshold = 1e-3; // search results with F* >= -threshold are polished
  // Start times of the shooting unknown t, drawn with the parameters. An empty
  // range uses the objective's argmax (default for energy costs); time costs
  // default to [pi, 4 pi].
  double time_lo = 0.0;
  double time_hi = 0.0;
  RefineOptions refine;
};

struct FindResult {
  SynthesisRecord best;
  std::vector<SynthesisRecord> candidates;  // every refined start, in start order
};

// Multistart refine in two stages (coarse capped search, then polishing at the
// problem step); returns the robust solution of least cost.
// Throws NotFoundError when no start reaches |F*| <= robust_tolerance.
FindResult find_global(const Problem& problem, const FindOptions& options = {});

struct GrapeSeedOptions {
  std::size_t samples = 400;
  int restarts = 4;       // random smooth initial phases; the best is kept
  int iterations = 5000;
  std::uint64_t seed = 1;
};

// Shooting parameters (reduction none) read off a fidelity-maximizing phase
// pulse of the given duration, which must lie below the minimum time.
// Time-cost ensembles only: l_k(0) = p_k(0) x e_z, rotated and scaled so sum l = e_x.
// The duration is shortened while the pulse reaches the target, since the
// costates vanish there.
std::vector<double> grape_seed(const Problem& problem, double duration,
                               const GrapeSeedOptions& options = {});

// Deterministic quasi-random points in the unit cube (Halton, seed-dependent offset).
std::vector<std::vector<double>> halton_points(std::size_t dim, std::size_t count,
                                               std::uint64_t seed);

}  // namespace pulseforge::landscape
