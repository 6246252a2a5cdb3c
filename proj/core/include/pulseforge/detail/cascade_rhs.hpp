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

// Packed right-hand sides shared by the cascade propagator and the joint
// flow + cascade systems of the landscape search. Layouts:
//   state modes: [q_0 | q_1 | ... | q_N], 3 doubles each
//   gate mode:   [R_0 | R_1 | ... | R_N], 9 doubles each, column-major

namespace pulseforge::detail {

// out = a x b
inline void cross(const double* a, const double* b, double* out) {
  out[0] = a[1] * b[2] - a[2] * b[1];
  out[1] = a[2] * b[0] - a[0] * b[2];
  out[2] = a[0] * b[1] - a[1] * b[0];
}

// out += a x b
inline void cross_add(const double* a, const double* b, double* out) {
  out[0] += a[1] * b[2] - a[2] * b[1];
  out[1] += a[2] * b[0] - a[0] * b[2];
  out[2] += a[0] * b[1] - a[1] * b[0];
}

// out += a x e_z
inline void cross_ez_add(const double* a, double* out) {
  out[0] += a[1];
  out[1] -= a[0];
}

// Offset cascade on `blocks` vectors with stride 3 * stride_vectors:
// dq_0 = q_0 x u,  dq_k = q_k x u + q_{k-1} x e_z.
inline void offset_cascade_rhs(int order, const double* u, const double* y, double* dy,
                               int stride = 3) {
  for (int k = 0; k <= order; ++k) {
    const double* q = y + k * stride;
    double* d = dy + k * stride;
    cross(q, u, d);
    if (k > 0) cross_ez_add(y + (k - 1) * stride, d);
  }
}

// Amplitude cascade: dq_0 = q_0 x u,  dq_k = (q_k + q_{k-1}) x u.
inline void amplitude_cascade_rhs(int order, const double* u, const double* y, double* dy) {
  for (int k = 0; k <= order; ++k) {
    const double* q = y + 3 * k;
    double* d = dy + 3 * k;
    if (k == 0) {
      cross(q, u, d);
    } else {
      const double s[3] = {q[0] + q[-3], q[1] + q[-2], q[2] + q[-1]};
      cross(s, u, d);
    }
  }
}

// Gate cascade: each column of the Bloch matrices follows the offset cascade.
inline void gate_cascade_rhs(int order, const double* u, const double* y, double* dy) {
  for (int c = 0; c < 3; ++c) offset_cascade_rhs(order, u, y + 3 * c, dy + 3 * c, 9);
}

}  // namespace pulseforge::detail
