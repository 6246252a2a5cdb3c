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

#include "pulseforge/analytic.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "pulseforge/error.hpp"
#include "pulseforge/integrator.hpp"
#include "pulseforge/special_functions.hpp"

namespace pulseforge::analytic {

namespace {

template <class F>
double integrate(F f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-13);
}

// Midpoint samples of f on an even grid over [0, duration].
template <class F>
void sample_midpoints(double duration, double step, F f, std::vector<double>& times,
                      std::vector<double>& values) {
  const std::size_t n = step_count(duration, step);
  const double h = duration / static_cast<double>(n);
  times.resize(n + 1);
  values.resize(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    times[i] = h * static_cast<double>(i);
    values[i] = f(times[i] + 0.5 * h);
  }
  times[n] = duration;
  values[n] = f(duration);
}

}  // namespace

EnergyO1Solution energy_o1(double H, double rho_sign) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("energy order-1 pulse needs 0 < H < 1");
  EnergyO1Solution s;
  s.H = H;
  s.m = 0.5 * (1.0 + H);
  const double nu0 = std::asin(1.0 / std::sqrt(2.0 * s.m));
  s.rho = (rho_sign < 0.0 ? -1.0 : 1.0) * special::ellip_f(nu0, s.m);
  s.t_star = 2.0 * special::ellip_k(s.m);
  // int |2 sqrt(m) cos nu| dt over half a period of nu.
  s.area = 4.0 * std::asin(std::sqrt(s.m));
  return s;
}

double EnergyO1Solution::nu(double t) const { return special::jacobi_am(t + rho, m); }

double EnergyO1Solution::omega0x(double t) const { return 2.0 * std::sqrt(m) * std::cos(nu(t)); }

double EnergyO1Solution::omega1y(double t) const {
  const double v = nu(t);
  const double sn = std::sin(v);
  return -2.0 * std::sqrt(m) * sn * std::sqrt(1.0 - m * sn * sn);
}

double EnergyO1Solution::omega1z(double t) const {
  const double sn = std::sin(nu(t));
  return 2.0 * m * sn * sn - 1.0;
}

double EnergyO1Solution::theta(double t) const {
  const double sign = rho < 0.0 ? -1.0 : 1.0;
  return 2.0 * std::asin(std::sqrt(m) * std::sin(nu(t))) - sign * kPi / 2.0;
}

double EnergyO1Solution::x1(double t) const {
  // dt = d nu / sqrt(1 - m sin^2 nu) and sin theta = -sign(rho) (1 - 2 m sin^2 nu).
  const double sign = rho < 0.0 ? -1.0 : 1.0;
  const double mm = m;
  auto f = [mm](double v) {
    const double s2 = std::sin(v) * std::sin(v);
    return (1.0 - 2.0 * mm * s2) / std::sqrt(1.0 - mm * s2);
  };
  return -sign * integrate(f, nu(0.0), nu(t));
}

ControlField energy_o1_field(const EnergyO1Solution& s, double step) {
  std::vector<double> times, ux;
  sample_midpoints(s.t_star, step, [&s](double t) { return s.omega0x(t); }, times, ux);
  std::vector<double> uy(ux.size(), 0.0);
  return ControlField::general(std::move(times), std::move(ux), std::move(uy));
}

PlanarState energy_o1_state(const EnergyO1Solution& s, double t) { return {s.theta(t), s.x1(t)}; }

ExcitationTransfer locate_excitation_transfer(double h_lo, double h_hi, double tolerance) {
  auto probe = [](double h) {
    const EnergyO1Solution s = energy_o1(h, 1.0);
    const double t = s.t_star - s.rho;
    return ExcitationTransfer{h, t, s.x1(t)};
  };
  ExcitationTransfer lo = probe(h_lo), hi = probe(h_hi);
  if (lo.x1 * hi.x1 > 0.0) throw NotFoundError("no excitation transfer between the given H values");
  while (hi.H - lo.H > tolerance) {
    const ExcitationTransfer mid = probe(0.5 * (lo.H + hi.H));
    if ((mid.x1 < 0.0) == (lo.x1 < 0.0)) lo = mid; else hi = mid;
  }
  return std::abs(lo.x1) < std::abs(hi.x1) ? lo : hi;
}

BangBangSolution bangbang_o1(double H) {
  if (!(H >= 0.0 && H < 1.0)) throw DomainError("bang-bang order-1 pulse needs 0 <= H < 1 (no switch otherwise)");
  BangBangSolution s;
  s.H = H;
  s.T1 = kPi + std::atan(H / std::sqrt(1.0 - H * H));
  s.T2 = 3.0 * s.T1 - kPi;
  s.period = 4.0 * s.T1 - 2.0 * kPi;
  return s;
}

double BangBangSolution::control(double t) const {
  if (t < 0.0 || t > period) throw RangeError("time outside one period of the bang-bang pulse");
  return (t < T1 || t >= T2) ? 1.0 : -1.0;
}

double BangBangSolution::theta(double t) const {
  if (t < 0.0 || t > period) throw RangeError("time outside one period of the bang-bang pulse");
  if (t <= T1) return t;
  if (t <= T2) return -t + 2.0 * T1;
  return t + 2.0 * (T1 - T2);
}

double BangBangSolution::x1(double t) const {
  if (t < 0.0 || t > period) throw RangeError("time outside one period of the bang-bang pulse");
  const double w = std::sqrt(1.0 - H * H);
  if (t <= T1) return 1.0 - std::cos(t);
  if (t <= T2) return 1.0 + 2.0 * w + std::cos(t - 2.0 * T1);
  return 1.0 + 4.0 * w - std::cos(t + 2.0 * (T1 - T2));
}

ControlField bangbang_o1_field(const BangBangSolution& s, double duration) {
  if (duration <= 0.0) duration = s.period;
  std::vector<double> switches;
  for (double base = 0.0; base < duration; base += s.period) {
    for (double ts : {s.T1, s.T2}) {
      if (base + ts < duration) switches.push_back(base + ts);
    }
  }
  return ControlField::bang_bang(duration, 1.0, std::move(switches));
}

AlphaO1Solution alpha_o1(double Ix, double Iy) {
  AlphaO1Solution s;
  s.Ix = Ix;
  s.Iy = Iy;
  s.omega = std::pow(Ix * Ix + Iy * Iy, 0.25);
  if (!(s.omega > 0.0)) throw DomainError("amplitude order-1 pulse needs (I_x, I_y) != 0");
  s.m = 0.5 - Ix / (2.0 * s.omega * s.omega);
  if (!(s.m >= 0.0 && s.m < 1.0)) throw DomainError("elliptic parameter outside [0, 1)");
  s.K = special::ellip_k(s.m);
  s.t_f = 4.0 * s.K / s.omega;
  return s;
}

double AlphaO1Solution::nu(double t) const { return special::jacobi_am(omega * t + K, m); }

double AlphaO1Solution::phase(double t) const {
  const double v = nu(t);
  const double sn = std::sin(v);
  // sign(sin nu) is the parity of the half period of am holding omega t + K.
  const double j = std::floor((omega * t + K) / (2.0 * K));
  const double sign = std::fmod(j, 2.0) == 0.0 ? 1.0 : -1.0;
  return -2.0 * (sign * std::acos(std::sqrt(1.0 - m * sn * sn)) - std::acos(std::sqrt(1.0 - m)));
}

double AlphaO1Solution::omega0z(double t) const { return -omega * std::sqrt(m) * std::cos(nu(t)); }

ControlField alpha_o1_field(const AlphaO1Solution& s, double step) {
  std::vector<double> times, phases;
  sample_midpoints(s.t_f, step, [&s](double t) { return s.phase(t); }, times, phases);
  return ControlField::phase_only(std::move(times), std::move(phases));
}

}  // namespace pulseforge::analytic
