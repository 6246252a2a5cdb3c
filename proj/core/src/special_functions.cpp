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

#include "pulseforge/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pulseforge/error.hpp"

namespace pulseforge::special {

namespace {

constexpr double kPi = std::numbers::pi;

void check_parameter(double m) {
  if (!(m >= 0.0 && m < 1.0))
    throw DomainError("elliptic parameter m = " + std::to_string(m) + " outside [0, 1)");
}

constexpr int kAgmIterations = 64;
constexpr double kAgmTolerance = 4.0 * std::numeric_limits<double>::epsilon();

double agm_limit(double m) {
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  for (int it = 0; it < kAgmIterations && std::abs(a - b) > kAgmTolerance * a; ++it) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return a;
}

// Landen descent for phi in [0, pi/2].
double ellip_f_reduced(double phi, double m) {
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  double scale = 1.0;
  for (int it = 0; it < kAgmIterations && std::abs(a - b) > kAgmTolerance * a; ++it) {
    double psi = std::atan2(b * std::sin(phi), a * std::cos(phi));
    // Keep psi in the same revolution as phi so the doubled angle stays continuous.
    psi += 2.0 * kPi * std::round((phi - psi) / (2.0 * kPi));
    phi += psi;
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    scale *= 2.0;
  }
  return phi / (scale * a);
}

}  // namespace

double ellip_k(double m) {
  check_parameter(m);
  return kPi / (2.0 * agm_limit(m));
}

double ellip_f(double phi, double m) {
  check_parameter(m);
  if (!std::isfinite(phi)) throw DomainError("ellip_f: non-finite amplitude");
  const double periods = std::round(phi / kPi);
  const double reduced = phi - periods * kPi;  // in [-pi/2, pi/2]
  const double base = reduced < 0.0 ? -ellip_f_reduced(-reduced, m) : ellip_f_reduced(reduced, m);
  if (periods == 0.0) return base;
  return base + 2.0 * periods * ellip_k(m);
}

double jacobi_am(double u, double m) {
  check_parameter(m);
  if (!std::isfinite(u)) throw DomainError("jacobi_am: non-finite argument");
  if (m == 0.0) return u;
  const double k = ellip_k(m);
  // F(j pi) = 2 j K, so am(u) lies within pi/2 of j pi for j = round(u / 2K).
  const double j = std::round(u / (2.0 * k));
  double lo = j * kPi - 0.5 * kPi;
  double hi = j * kPi + 0.5 * kPi;
  double phi = u * kPi / (2.0 * k);
  if (phi < lo || phi > hi) phi = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double s = std::sin(phi);
    const double g = ellip_f(phi, m) - u;
    if (g > 0.0) hi = phi; else lo = phi;
    double next = phi - g * std::sqrt(1.0 - m * s * s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double delta = std::abs(next - phi);
    phi = next;
    if (delta <= 1e-15 * (1.0 + std::abs(phi))) break;
  }
  return phi;
}

}  // namespace pulseforge::special
