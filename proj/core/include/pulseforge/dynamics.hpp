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
#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "pulseforge/control_field.hpp"
#include "pulseforge/integrator.hpp"
#include "pulseforge/types.hpp"

namespace pulseforge::dynamics {

using PropagationOptions = IntegratorOptions;

// Offset delta (detuning) and relative amplitude error alpha.
struct Inhomogeneity {
  double offset = 0.0;
  double amplitude = 0.0;
};

struct BlochTrajectory {
  std::vector<double> times;
  std::vector<BlochVector> states;
};

// Integrates dq/dt = q x ((1 + alpha) u + delta e_z) from q(0) = q0 to t_final.
BlochTrajectory propagate_bloch(const ControlField& field, Inhomogeneity inhom,
                                const BlochVector& q0, double t_final,
                                const PropagationOptions& options = {});

// Same integration, final state only.
BlochVector propagate_bloch_final(const ControlField& field, Inhomogeneity inhom,
                                  const BlochVector& q0, double t_final,
                                  const PropagationOptions& options = {});

// Rotation (Bloch matrix) generated by the field, R(0) = identity.
Mat3 propagate_rotation(const ControlField& field, Inhomogeneity inhom, double t_final,
                        const PropagationOptions& options = {});

enum class CascadeMode { state_offset, state_amplitude, gate_offset };

std::string_view to_string(CascadeMode mode);
// Throws ConfigError for unknown tags.
CascadeMode parse_cascade_mode(std::string_view name);

// Taylor coefficients q_0..q_N (state modes) or R_0..R_N (gate mode) of the
// state in the inhomogeneity parameter, stored packed (see detail/cascade_rhs.hpp).
class PerturbativeStack {
 public:
  // q_0 = north pole, q_k = 0; or R_0 = identity, R_k = 0.
  static PerturbativeStack initial(CascadeMode mode, int order);
  static PerturbativeStack from_packed(CascadeMode mode, int order,
                                       std::span<const double> packed);

  CascadeMode mode() const noexcept { return mode_; }
  int order() const noexcept { return order_; }
  bool is_gate() const noexcept { return mode_ == CascadeMode::gate_offset; }

  Vec3 vector(int k) const;
  Mat3 matrix(int k) const;

  std::span<const double> packed() const noexcept { return data_; }
  std::span<double> packed() noexcept { return data_; }

  static std::size_t packed_size(CascadeMode mode, int order);

 private:
  PerturbativeStack(CascadeMode mode, int order);

  CascadeMode mode_;
  int order_;
  std::vector<double> data_;
};

// Writes d(stack)/dt for the nominal (delta = alpha = 0) cascade under field value u.
void cascade_derivative(CascadeMode mode, int order, const Vec3& u, const double* y, double* dy);

struct CascadeTrajectory {
  std::vector<double> times;
  std::vector<PerturbativeStack> stacks;
};

CascadeTrajectory propagate_cascade(const ControlField& field, const PerturbativeStack& initial,
                                    double t_final, const PropagationOptions& options = {});

PerturbativeStack propagate_cascade_final(const ControlField& field,
                                          const PerturbativeStack& initial, double t_final,
                                          const PropagationOptions& options = {});

// F = -z, the inversion merit.
double inversion_fidelity(const BlochVector& q_final);

using FidelityTarget = std::variant<BlochVector, Mat3>;

// -||target - q_0||^2 - sum_k ||q_k||^2, or the Frobenius analogue for gates.
// Throws ConfigError when the target kind does not match the stack mode.
double robust_fidelity(const PerturbativeStack& stack, const FidelityTarget& target);

// Sum of ||q_k||^2 (or ||R_k||_F^2) over k >= 1 only.
double inhomogeneous_residual(const PerturbativeStack& stack);

enum class ProfileAxis { offset, amplitude };

struct ProfilePoint {
  double parameter = 0.0;
  double fidelity = 0.0;
};

struct RobustnessProfile {
  ProfileAxis axis = ProfileAxis::offset;
  std::vector<ProfilePoint> points;
};

// n uniformly spaced values covering [lo, hi] (n = 1 gives lo).
std::vector<double> uniform_grid(double lo, double hi, std::size_t n = 1000);

// One propagation per grid value from the north pole; fidelity -z(t_f).
RobustnessProfile robustness_profile(const ControlField& field, ProfileAxis axis,
                                     std::span<const double> grid,
                                     const PropagationOptions& options = {});

// Number of interior strict local maxima of the fidelity curve. Plateaus count
// once; excursions smaller than `prominence` (integration noise) are ignored.
std::size_t count_local_maxima(const RobustnessProfile& profile, double prominence = 1e-8);

}  // namespace pulseforge::dynamics
