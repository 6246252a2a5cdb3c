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

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace pulseforge {

struct IntegratorOptions {
  // Fixed RK4 step in normalized time units (max field amplitude = 1).
  double step = 1e-3;
};

// Number of equal RK4 steps covering a span no longer than `step` each.
inline std::size_t step_count(double span, double step) {
  if (span <= 0.0) return 0;
  const double n = std::ceil(span / step - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, n));
}

// One classical fourth-order Runge-Kutta step. `rhs(t, y)` returns dy/dt.
template <class State, class Rhs>
State rk4_step(const Rhs& rhs, double t, const State& y, double h) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = rhs(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace pulseforge
