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
#include <span>
#include <string_view>
#include <vector>

#include "pulseforge/types.hpp"

namespace pulseforge {

enum class FieldRepresentation { general, phase_only, bang_bang };

std::string_view to_string(FieldRepresentation rep);

// Control amplitudes (u_x, u_y) at one instant.
struct FieldValue {
  double ux = 0.0;
  double uy = 0.0;
};

// Sampled pulse under a zero-order hold: the value of sample i is applied on
// [t_i, t_{i+1}). The last sample time is the end of the pulse; its value is
// only used when a caller asks for the field exactly at that instant.
//
// Fields produced from continuous flows store the mean of the two endpoint
// values of each interval, which keeps the hold second-order accurate.
class ControlField {
 public:
  ControlField() = default;

  static ControlField general(std::vector<double> times, std::vector<double> ux,
                              std::vector<double> uy);
  static ControlField phase_only(std::vector<double> times, std::vector<double> phases);
  // x-axis field of amplitude +-1 starting with `initial_sign`, flipping at
  // every entry of `switch_times` and ending at `duration`.
  static ControlField bang_bang(double duration, double initial_sign,
                                std::vector<double> switch_times);
  static ControlField constant(double duration, double ux, double uy);

  FieldRepresentation representation() const noexcept { return rep_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double duration() const noexcept { return times_.empty() ? 0.0 : times_.back(); }

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> ux() const noexcept { return ux_; }
  std::span<const double> uy() const noexcept { return uy_; }
  // Empty unless the representation is phase_only.
  std::span<const double> phases() const noexcept { return phases_; }
  // Empty unless the representation is bang_bang.
  std::span<const double> switch_times() const noexcept { return switches_; }

  // Held value at time t; throws RangeError outside [0, duration].
  FieldValue at(double t) const;

  // Calls fn(t_begin, t_end, value) for each hold interval clipped to [0, t_final].
  template <class Fn>
  void for_each_segment(double t_final, Fn&& fn) const {
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
      const double a = times_[i];
      if (a >= t_final) break;
      const double b = times_[i + 1] < t_final ? times_[i + 1] : t_final;
      fn(a, b, FieldValue{ux_[i], uy_[i]});
    }
  }

  // int |u| dt and int |u|^2 dt over [0, t_end].
  double area(double t_end) const;
  double energy(double t_end) const;

  // Same samples with (u_x, u_y) rotated by a constant angle.
  ControlField rotated(double angle) const;

 private:
  void validate() const;

  FieldRepresentation rep_ = FieldRepresentation::general;
  std::vector<double> times_;
  std::vector<double> ux_;
  std::vector<double> uy_;
  std::vector<double> phases_;
  std::vector<double> switches_;
};

}  // namespace pulseforge
