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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pulseforge/error.hpp"
#include "pulseforge/special_functions.hpp"
#include "pulseforge/types.hpp"

using namespace pulseforge;

// libstdc++ takes the modulus k = sqrt(m).
TEST_CASE("complete integral matches the standard library") {
  for (double m : {0.0, 1e-8, 0.1, 0.5, 0.826, 0.99}) {
    CAPTURE(m);
    CHECK(special::ellip_k(m) == doctest::Approx(std::comp_ellint_1(std::sqrt(m))).epsilon(1e-13));
  }
  CHECK(special::ellip_k(0.0) == doctest::Approx(kPi / 2.0).epsilon(1e-15));
}

// Near m = 1, K = L + (1 - m)(L - 1) / 4 + O((1 - m)^2 L) with L = ln(4 / sqrt(1 - m)).
TEST_CASE("complete integral follows the logarithmic asymptote near m = 1") {
  for (double gap : {1e-6, 1e-8, 1e-10}) {
    const double m = 1.0 - gap, m1 = 1.0 - m;
    const double L = std::log(4.0 / std::sqrt(m1));
    CHECK(special::ellip_k(m) == doctest::Approx(L + 0.25 * m1 * (L - 1.0)).epsilon(1e-11));
  }
}

TEST_CASE("incomplete integral matches the standard library inside the first quadrant") {
  for (double m : {0.0, 0.3, 0.75, 0.97})
    for (double phi : {0.0, 0.1, 0.7, 1.2, kPi / 2.0}) {
      CAPTURE(m);
      CAPTURE(phi);
      CHECK(special::ellip_f(phi, m) == doctest::Approx(std::ellint_1(std::sqrt(m), phi)).epsilon(1e-13));
    }
}

TEST_CASE("incomplete integral is odd and quasi-periodic") {
  const double m = 0.6;
  const double k2 = 2.0 * special::ellip_k(m);
  for (double phi : {0.3, 1.1, 2.9, 7.5}) {
    CHECK(special::ellip_f(-phi, m) == doctest::Approx(-special::ellip_f(phi, m)).epsilon(1e-14));
    CHECK(special::ellip_f(phi + kPi, m) == doctest::Approx(special::ellip_f(phi, m) + k2).epsilon(1e-13));
  }
}

TEST_CASE("amplitude inverts the incomplete integral") {
  for (double m : {0.0, 0.2, 0.9, 0.9999})
    for (double u : {-9.0, -1.3, 0.0, 0.4, 2.0, 11.0}) {
      CAPTURE(m);
      CAPTURE(u);
      CHECK(special::ellip_f(special::jacobi_am(u, m), m) == doctest::Approx(u).epsilon(1e-12));
    }
  CHECK(special::jacobi_am(1.234, 0.0) == doctest::Approx(1.234).epsilon(1e-15));
}

TEST_CASE("parameters outside [0, 1) are rejected") {
  CHECK_THROWS_AS(special::ellip_k(1.0), DomainError);
  CHECK_THROWS_AS(special::ellip_k(-0.1), DomainError);
  CHECK_THROWS_AS(special::ellip_f(0.5, 1.5), DomainError);
  CHECK_THROWS_AS(special::jacobi_am(0.5, std::nan("")), DomainError);
}
