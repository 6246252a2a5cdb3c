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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulseforge/control_field.hpp"
#include "pulseforge/types.hpp"

namespace pulseforge::flows {

enum class Variant { energy_offset, time_offset, amplitude, ensemble, gate_time };
enum class CostKind { energy, time };

std::string_view to_string(Variant v);
std::string_view to_string(CostKind c);
Variant parse_variant(std::string_view name);
CostKind parse_cost(std::string_view name);

// Free shooting parameters of a variant at order N (for the ensemble, N is
// the number of spins): 2N, 2N, 2N, 2N - 2 and 3N + 2.
int landscape_dimension(Variant variant, int order);

// Free initial adjoint data of one extremal.
//   energy/time offset: Omega_0x, (Omega_kx, Omega_ky) k = 1..N-1, theta
//                       with Omega_N(0) = (cos theta, sin theta, 0)
//   amplitude:          (Omega_kx, Omega_ky) k = 1..N, Omega_0(0) = (1, 0, 0)
//   ensemble:           (l_kx, l_ky) k = 1..N-1; l_N closes sum l_x = 1, sum l_y = 0
//   gate-time:          Omega_0x, Omega_0y, I = Omega_0z, (Omega_kx, Omega_ky,
//                       Omega_kz) k = 1..N-1, angles theta, phi with
//                       Omega_N(0) = (sin theta cos phi, sin theta sin phi, cos theta)
struct ShootingPoint {
  Variant variant = Variant::energy_offset;
  int order = 1;
  std::vector<double> params;

  // Throws ConfigError on a bad order or parameter count.
  void validate() const;
};

// Omega_0..Omega_N, or l_1..l_N for the ensemble variant.
struct OmegaStack {
  std::vector<Vec3> vectors;
};

OmegaStack initial_stack(const ShootingPoint& point);

struct FlowOptions {
  double step = 1e-3;
  // Flows whose field is Omega_0 / r abort when r drops below this.
  double singular_threshold = 1e-9;
  bool record_states = true;
};

// Everything needed to pick the first-integral catalog of a run.
struct FlowContext {
  Variant variant = Variant::energy_offset;
  int order = 1;
  CostKind cost = CostKind::energy;
  std::vector<double> offsets;  // ensemble only
  bool bang_bang = false;       // reduced one-field time-offset system, N = 1
  bool one_field = false;       // u_y = 0 reductions of the energy-offset flow
};

// Catalog context of an extremal started at `point`.
FlowContext make_context(const ShootingPoint& point, CostKind ensemble_cost = CostKind::time,
                         std::span<const double> offsets = {});

struct Quantity {
  std::string name;
  double value = 0.0;
};

// Conserved quantities of the variant evaluated at one state.
std::vector<Quantity> first_integrals(const FlowContext& context, const OmegaStack& state);

struct FirstIntegralAudit {
  std::vector<std::string> names;
  std::vector<double> initial;
  std::vector<double> max_drift;

  double worst() const;
};

// Tracks max |Q(t) - Q(0)| of every catalog entry along a trajectory.
class AuditTracker {
 public:
  AuditTracker(FlowContext context, const OmegaStack& initial);
  void observe(const OmegaStack& state);
  const FirstIntegralAudit& audit() const noexcept { return audit_; }
  const FlowContext& context() const noexcept { return context_; }

 private:
  FlowContext context_;
  FirstIntegralAudit audit_;
};

struct FlowRun {
  FlowContext context;
  std::vector<double> times;
  std::vector<OmegaStack> states;  // empty unless options.record_states
  ControlField field;
  FirstIntegralAudit audit;
  std::vector<double> switch_times;
};

// dOmega_0 = Omega_1 x e_z, dOmega_k = Omega_k x Omega_0 + Omega_{k+1} x e_z,
// dOmega_N = Omega_N x Omega_0; u = (Omega_0x, Omega_0y).
FlowRun flow_energy_offset(const ShootingPoint& point, double t_final,
                           const FlowOptions& options = {});

// Time-minimum offset flow, u = (Omega_0x, Omega_0y) / r. At N = 1 with
// Omega_1x(0) = 0 the reduced bang-bang system u_x = sign(Omega_0x) is used
// and its switching times are located by bisection.
FlowRun flow_time_offset(const ShootingPoint& point, double t_final,
                         const FlowOptions& options = {});

// Reduced N = 1 bang-bang flow started at Omega_0x = level, Omega_1y = +-1.
FlowRun flow_bang_bang(double level, double omega1y_sign, double t_final,
                       const FlowOptions& options = {});

// dOmega_k = (Omega_k + Omega_{k+1}) x u, dOmega_N = Omega_N x u, u = (Omega_0x, Omega_0y).
FlowRun flow_amplitude(const ShootingPoint& point, double t_final,
                       const FlowOptions& options = {});

// dl_k = l_k x u + Delta_k l_k x e_z with u = sum l_xy (energy) or its unit vector (time).
FlowRun flow_ensemble(const ShootingPoint& point, std::span<const double> offsets, CostKind cost,
                      double t_final, const FlowOptions& options = {});

// Time-minimum ensemble flow restricted to sum l_y = 0 (mirror-paired spins),
// where u = sign(sum l_x) e_x and the switches are located by bisection.
FlowRun flow_ensemble_bang_bang(const ShootingPoint& point, std::span<const double> offsets,
                                double t_final, const FlowOptions& options = {});

// Time-minimum gate flow with constant Omega_0z = I.
FlowRun flow_gate(const ShootingPoint& point, double t_final, const FlowOptions& options = {});

}  // namespace pulseforge::flows
