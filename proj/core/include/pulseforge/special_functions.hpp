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

// Elliptic integrals of the first kind and the Jacobi amplitude, parameter
// convention m (integrand 1 / sqrt(1 - m sin^2 t)), restricted to 0 <= m < 1.
// Arguments outside that range raise DomainError.

namespace pulseforge::special {

// Complete integral K(m) = F(pi/2, m), by the arithmetic-geometric mean.
double ellip_k(double m);

// Incomplete integral F(phi, m) = int_0^phi dt / sqrt(1 - m sin^2 t), by
// descending Landen transformation. Odd in phi; F(phi + pi) = F(phi) + 2K.
double ellip_f(double phi, double m);

// Jacobi amplitude: the phi with ellip_f(phi, m) = u.
double jacobi_am(double u, double m);

}  // namespace pulseforge::special
