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

// Packed Omega-flow systems. Each system exposes
//   int size() const                          packed length
//   void field(double t, const double* y, double* u) const
//   void derivative(const double* y, const double* u, double* dy) const
// field() writes (u_x, u_y, 0) and throws SingularFlowError when the unit
// control direction is undefined.

#include <cmath>
#include <string>
#include <vector>

#include "pulseforge/detail/cascade_rhs.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/flows.hpp"

namespace pulseforge::flows::detail {

using pulseforge::detail::cross;
using pulseforge::detail::cross_add;
using pulseforge::detail::cross_ez_add;

inline PackedState pack(const OmegaStack& s) {
  PackedState y(static_cast<Eigen::Index>(3 * s.vectors.size()));
  for (std::size_t k = 0; k < s.vectors.size(); ++k)
    y.segment<3>(static_cast<Eigen::Index>(3 * k)) = s.vectors[k];
  return y;
}

inline OmegaStack unpack(const double* y, std::size_t count) {
  OmegaStack s;
  s.vectors.resize(count);
  for (std::size_t k = 0; k < count; ++k) s.vectors[k] = Vec3(y[3 * k], y[3 * k + 1], y[3 * k + 2]);
  return s;
}

inline void unit_field(double t, double x, double y, double threshold, double* u) {
  const double r = std::hypot(x, y);
  if (!(r >= threshold))
    throw SingularFlowError("singular flow: r = " + std::to_string(r) + " at t = " +
                                std::to_string(t),
                            t);
  u[0] = x / r;
  u[1] = y / r;
  u[2] = 0.0;
}

// Energy- and time-minimum offset flows.
struct OffsetSystem {
  int order = 1;
  CostKind cost = CostKind::energy;
  double threshold = 1e-9;

  int size() const { return 3 * (order + 1); }

  void field(double t, const double* y, double* u) const {
    if (cost == CostKind::energy) {
      u[0] = y[0];
      u[1] = y[1];
      u[2] = 0.0;
    } else {
      unit_field(t, y[0], y[1], threshold, u);
    }
  }

  void derivative(const double* y, const double* u, double* dy) const {
    (void)u;
    const double inv_r = cost == CostKind::time ? 1.0 / std::hypot(y[0], y[1]) : 1.0;
    // dOmega_0 = Omega_1 x e_z
    dy[0] = dy[1] = dy[2] = 0.0;
    cross_ez_add(y + 3, dy);
    for (int k = 1; k <= order; ++k) {
      const double* w = y + 3 * k;
      double* d = dy + 3 * k;
      cross(w, y, d);
      d[0] *= inv_r;
      d[1] *= inv_r;
      d[2] *= inv_r;
      if (k < order) cross_ez_add(w + 3, d);
    }
  }
};

// Gate flow: Omega_0z = I is a constant of the motion and is held fixed.
struct GateSystem {
  int order = 1;
  double invariant = 0.0;  // I
  double threshold = 1e-9;

  int size() const { return 3 * (order + 1); }

  void field(double t, const double* y, double* u) const {
    unit_field(t, y[0], y[1], threshold, u);
  }

  void derivative(const double* y, const double* u, double* dy) const {
    const double r = std::hypot(y[0], y[1]);
    const double ir = invariant / r;
    // dOmega_0 = (Omega_1 - (I / r) Omega_0) x e_z
    dy[0] = y[4] - ir * y[1];
    dy[1] = -(y[3] - ir * y[0]);
    dy[2] = 0.0;
    (void)u;
    for (int k = 1; k <= order; ++k) {
      const double* w = y + 3 * k;
      double* d = dy + 3 * k;
      cross(w, y, d);
      d[0] /= r;
      d[1] /= r;
      d[2] /= r;
      // (Omega_{k+1} - (I / r) Omega_k) x e_z
      double s[3] = {-ir * w[0], -ir * w[1], 0.0};
      if (k < order) {
        s[0] += w[3];
        s[1] += w[4];
      }
      cross_ez_add(s, d);
    }
  }
};

struct AmplitudeSystem {
  int order = 1;

  int size() const { return 3 * (order + 1); }

  void field(double, const double* y, double* u) const {
    u[0] = y[0];
    u[1] = y[1];
    u[2] = 0.0;
  }

  void derivative(const double* y, const double* u, double* dy) const {
    for (int k = 0; k <= order; ++k) {
      const double* w = y + 3 * k;
      if (k < order) {
        const double s[3] = {w[0] + w[3], w[1] + w[4], w[2] + w[5]};
        cross(s, u, dy + 3 * k);
      } else {
        cross(w, u, dy + 3 * k);
      }
    }
  }
};

struct EnsembleSystem {
  std::vector<double> offsets;
  CostKind cost = CostKind::time;
  double threshold = 1e-9;

  int size() const { return 3 * static_cast<int>(offsets.size()); }

  void field(double t, const double* y, double* u) const {
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      sx += y[3 * k];
      sy += y[3 * k + 1];
    }
    if (cost == CostKind::energy) {
      u[0] = sx;
      u[1] = sy;
      u[2] = 0.0;
    } else {
      unit_field(t, sx, sy, threshold, u);
    }
  }

  void derivative(const double* y, const double* u, double* dy) const {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const double* l = y + 3 * k;
      const double w[3] = {u[0], u[1], offsets[k]};
      cross(l, w, dy + 3 * k);
    }
  }
};

}  // namespace pulseforge::flows::detail
