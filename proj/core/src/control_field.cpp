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

#include "pulseforge/control_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulseforge/error.hpp"

namespace pulseforge {

std::string_view to_string(FieldRepresentation rep) {
  switch (rep) {
    case FieldRepresentation::general: return "general";
    case FieldRepresentation::phase_only: return "phase-only";
    case FieldRepresentation::bang_bang: return "bang-bang";
  }
  return "unknown";
}

ControlField ControlField::general(std::vector<double> times, std::vector<double> ux,
                                   std::vector<double> uy) {
  ControlField f;
  f.rep_ = FieldRepresentation::general;
  f.times_ = std::move(times);
  f.ux_ = std::move(ux);
  f.uy_ = std::move(uy);
  f.validate();
  return f;
}

ControlField ControlField::phase_only(std::vector<double> times, std::vector<double> phases) {
  ControlField f;
  f.rep_ = FieldRepresentation::phase_only;
  f.times_ = std::move(times);
  f.phases_ = std::move(phases);
  f.ux_.resize(f.phases_.size());
  f.uy_.resize(f.phases_.size());
  for (std::size_t i = 0; i < f.phases_.size(); ++i) {
    f.ux_[i] = std::cos(f.phases_[i]);
    f.uy_[i] = std::sin(f.phases_[i]);
  }
  f.validate();
  return f;
}

ControlField ControlField::bang_bang(double duration, double initial_sign,
                                     std::vector<double> switch_times) {
  if (!(duration > 0.0)) throw ConfigError("bang-bang field needs a positive duration");
  ControlField f;
  f.rep_ = FieldRepresentation::bang_bang;
  double sign = initial_sign < 0.0 ? -1.0 : 1.0;
  f.times_.push_back(0.0);
  f.ux_.push_back(sign);
  for (double ts : switch_times) {
    if (ts <= f.times_.back() || ts >= duration) continue;
    sign = -sign;
    f.times_.push_back(ts);
    f.ux_.push_back(sign);
    f.switches_.push_back(ts);
  }
  f.times_.push_back(duration);
  f.ux_.push_back(sign);
  f.uy_.assign(f.ux_.size(), 0.0);
  f.validate();
  return f;
}

ControlField ControlField::constant(double duration, double ux, double uy) {
  return general({0.0, duration}, {ux, ux}, {uy, uy});
}

void ControlField::validate() const {
  if (times_.size() < 2) throw ConfigError("a control field needs at least two samples");
  if (ux_.size() != times_.size() || uy_.size() != times_.size())
    throw ConfigError("control field sample arrays differ in length");
  if (times_.front() != 0.0) throw ConfigError("control field time grid must start at 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1]))
      throw ConfigError("control field time grid must be strictly increasing (sample " +
                        std::to_string(i) + ")");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(ux_[i]) || !std::isfinite(uy_[i]))
      throw ConfigError("non-finite control amplitude at sample " + std::to_string(i));
  }
}

FieldValue ControlField::at(double t) const {
  if (times_.empty() || t < 0.0 || t > times_.back())
    throw RangeError("field requested at t = " + std::to_string(t) + " outside [0, " +
                     std::to_string(duration()) + "]");
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  return {ux_[i], uy_[i]};
}

double ControlField::area(double t_end) const {
  double a = 0.0;
  for_each_segment(t_end, [&](double t0, double t1, FieldValue u) {
    a += (t1 - t0) * std::hypot(u.ux, u.uy);
  });
  return a;
}

double ControlField::energy(double t_end) const {
  double e = 0.0;
  for_each_segment(t_end, [&](double t0, double t1, FieldValue u) {
    e += (t1 - t0) * (u.ux * u.ux + u.uy * u.uy);
  });
  return e;
}

ControlField ControlField::rotated(double angle) const {
  if (rep_ == FieldRepresentation::phase_only) {
    std::vector<double> phi(phases_);
    for (double& p : phi) p += angle;
    return phase_only(times_, std::move(phi));
  }
  const double c = std::cos(angle), s = std::sin(angle);
  std::vector<double> ux(ux_.size()), uy(uy_.size());
  for (std::size_t i = 0; i < ux_.size(); ++i) {
    ux[i] = c * ux_[i] - s * uy_[i];
    uy[i] = s * ux_[i] + c * uy_[i];
  }
  return general(times_, std::move(ux), std::move(uy));
}

}  // namespace pulseforge
