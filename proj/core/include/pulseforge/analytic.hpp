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

#include "pulseforge/control_field.hpp"

// Closed-form order-1 extremals: the elliptic energy-minimum offset pulse, the
// bang-bang time-minimum offset pulse and the elliptic amplitude-robust pulse.

namespace pulseforge::analytic {

// Oscillating one-field solution of the order-1 energy flow,
//   Omega_0x = 2 sqrt(m) cos nu, nu(t) = am(t + rho, m), m = (1 + H) / 2.
struct EnergyO1Solution {
  double H = 0.0;
  double m = 0.0;
  double rho = 0.0;     // +-F(arcsin(1 / sqrt(2m)), m)
  double t_star = 0.0;  // 2 K(m)
  double area = 0.0;    // int_0^t* |Omega_0x| dt

  double nu(double t) const;
  double omega0x(double t) const;
  double omega1y(double t) const;
  double omega1z(double t) const;
  // Bloch angle of q_0 in the y-z plane: theta(0) = 0, theta(t*) = -sign(rho) pi.
  double theta(double t) const;
  // Offset component x_1(t) = int_0^t sin theta, by adaptive quadrature.
  double x1(double t) const;
};

// rho_sign < 0 selects Omega_1y(0) = +1, the branch ending at theta = +pi.
// Throws DomainError unless 0 < H < 1.
EnergyO1Solution energy_o1(double H, double rho_sign = -1.0);

// x-only field on [0, t*] sampled at interval midpoints with the given step.
ControlField energy_o1_field(const EnergyO1Solution& s, double step = 1e-3);

struct PlanarState {
  double theta = 0.0;
  double x1 = 0.0;
};

PlanarState energy_o1_state(const EnergyO1Solution& s, double t);

// The rho > 0 family reaches theta = -pi/2 at t = 2K - rho; the excitation
// transfer is the H where x_1 vanishes there.
struct ExcitationTransfer {
  double H = 0.0;
  double t = 0.0;
  double x1 = 0.0;
};

// Bisection over H for the sign change of x_1(2K - rho) in [h_lo, h_hi].
// Throws NotFoundError when the bracket holds no sign change.
ExcitationTransfer locate_excitation_transfer(double h_lo = 0.05, double h_hi = 0.95,
                                              double tolerance = 1e-10);

// Bang-bang order-1 time-minimum extremal from Omega_0x(0) = H, Omega_1y(0) = 1.
struct BangBangSolution {
  double H = 0.0;
  double T1 = 0.0;
  double T2 = 0.0;
  double period = 0.0;

  double control(double t) const;  // +1 on [0, T1), -1 on [T1, T2), +1 after
  double theta(double t) const;
  double x1(double t) const;
  // Time at which theta first returns to pi after the first switch: 2 T1 - pi.
  double inversion_time() const { return 2.0 * T1 - kPi; }
};

// Throws DomainError unless 0 <= H < 1.
BangBangSolution bangbang_o1(double H);

// Field over [0, duration] (default one period).
ControlField bangbang_o1_field(const BangBangSolution& s, double duration = 0.0);

// Amplitude-robust order-1 extremal parameterized by I_x, I_y.
struct AlphaO1Solution {
  double Ix = 0.0;
  double Iy = 0.0;
  double omega = 0.0;  // (I_x^2 + I_y^2)^(1/4)
  double m = 0.0;      // 1/2 - I_x / (2 omega^2)
  double K = 0.0;
  double t_f = 0.0;    // 4 K / omega

  double nu(double t) const;
  double phase(double t) const;
  double omega0z(double t) const;
};

// Throws DomainError when omega = 0 or m leaves [0, 1).
AlphaO1Solution alpha_o1(double Ix, double Iy);

// Phase-only field on [0, t_f] sampled at interval midpoints.
ControlField alpha_o1_field(const AlphaO1Solution& s, double step = 1e-3);

}  // namespace pulseforge::analytic
