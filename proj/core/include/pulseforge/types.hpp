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

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <numbers>

namespace pulseforge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Bloch vector q = (x, y, z).
using BlochVector = Eigen::Vector3d;

// Packed ODE state with inline storage; large enough for every joint
// flow + cascade system the toolkit integrates (gate N = 2 needs 37 slots).
inline constexpr int kMaxPackedState = 64;
using PackedState = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPackedState, 1>;

inline constexpr double kPi = std::numbers::pi;

inline BlochVector north_pole() { return {0.0, 0.0, 1.0}; }
inline BlochVector south_pole() { return {0.0, 0.0, -1.0}; }
inline Vec3 unit_z() { return {0.0, 0.0, 1.0}; }

}  // namespace pulseforge
