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
#include <span>
#include <vector>

#include "pulseforge/control_field.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/types.hpp"

namespace pulseforge::grape {

// Phase-only pulse of unit amplitude on `samples` equal segments of [0, duration],
// optimized for inversion of every spin in `offsets` from the north pole.
struct GrapeProblem {
  std::vector<double> offsets;
  double duration = 0.0;
  std::size_t samples = 0;
  std::vector<double> initial_phase;  // one value per segment
};

struct GrapeOptions {
  int iterations = 2000;
  double initial_step = 1.0;
  double min_step = 1e-14;
  double gradient_tolerance = 1e-10;
};

struct GrapeResult {
  std::vector<double> phases;
  ControlField field;
  std::vector<double> history;  // mean fidelity after each accepted step, starting with the guess
  int iterations = 0;
  bool converged = false;
};

// Thrown when the gradient stops being finite; carries the offending iterate.
class GradientError : public NumericalError {
 public:
  GradientError(const std::string& what, int iteration, std::vector<double> iterate)
      : NumericalError(what), iteration_(iteration), iterate_(std::move(iterate)) {}
  int iteration() const noexcept { return iteration_; }
  const std::vector<double>& iterate() const noexcept { return iterate_; }

 private:
  int iteration_;
  std::vector<double> iterate_;
};

// Mean of -z_k(t_f) over the offsets.
double mean_fidelity(const GrapeProblem& problem, std::span<const double> phases);

// Mean fidelity and its gradient with respect to every phase sample (adjoint).
double fidelity_gradient(const GrapeProblem& problem, std::span<const double> phases,
                         std::vector<double>& gradient);

// Costate p_k(0) of every spin for the terminal payoff -z_k(t_f), i.e. the
// adjoint propagated back from p_k(t_f) = -e_z.
std::vector<Vec3> initial_costates(const GrapeProblem& problem, std::span<const double> phases);

// Limited-memory BFGS ascent with backtracking; initial_step sizes the
// steepest-ascent steps taken while no curvature pairs are stored.
GrapeResult grape_optimize(const GrapeProblem& problem, const GrapeOptions& options = {});

// Phase-only pulse for a gate robust to offsets up to `order`: each column of
// the Bloch-matrix cascade R_0..R_N starts at (e_c, 0, ..., 0) and is scored by
// -||G - R_0||_F^2 - sum_k ||R_k||_F^2.
struct GateGrapeProblem {
  Mat3 target = Mat3::Identity();
  int order = 1;
  double duration = 0.0;
  std::size_t samples = 0;
  std::vector<double> initial_phase;
};

double gate_fidelity(const GateGrapeProblem& problem, std::span<const double> phases);

double gate_fidelity_gradient(const GateGrapeProblem& problem, std::span<const double> phases,
                              std::vector<double>& gradient);

// Costates of R_0..R_N at t = 0 (column c pairs with column c of R_k).
std::vector<Mat3> gate_initial_costates(const GateGrapeProblem& problem,
                                        std::span<const double> phases);

// As above; history holds the gate fidelity.
GrapeResult grape_optimize(const GateGrapeProblem& problem, const GrapeOptions& options = {});

ControlField phase_field(double duration, std::span<const double> phases);

// Phase of `field` at the midpoint of each of `samples` equal segments.
std::vector<double> resample_phase(const ControlField& field, double duration, std::size_t samples);

// Sum of a few low-frequency sines with seeded random amplitudes and phases,
// scaled so the largest |value| equals `amplitude`.
std::vector<double> smooth_perturbation(std::size_t samples, double amplitude, std::uint64_t seed,
                                        int modes = 4);

}  // namespace pulseforge::grape
