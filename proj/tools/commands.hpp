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

#include <cstdint>
#include <string>
#include <vector>

#include "pulseforge/io.hpp"
#include "pulseforge/landscape.hpp"

namespace pulseforge::cli {

enum ExitCode { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

// Options shared by the subcommands, on top of the serialized RunConfig.
struct Options {
  io::RunConfig config;
  std::vector<std::string> box;  // "lo:hi" per search parameter, or one entry for all
  std::string time_range;        // "lo:hi" in units of pi
  // profile
  std::string pulse;
  std::string axis = "offset";
  std::string range = "-1:1";
  std::size_t points = 1000;
  // landscape
  std::size_t nx = 10, ny = 10;
  // grape
  std::string record;
  double duration = 0.0;
  std::size_t spins = 100;
  std::size_t samples = 400;
  int iterations = 2000;
  std::string guess = "pmp";
  // validate
  std::string criteria;
  std::string artifacts;
  bool recompute = false;
};

landscape::Problem problem_from_config(const io::RunConfig& config);
std::vector<std::string> parameter_names(const landscape::Problem& problem);

int cmd_synthesize(Options& o);
int cmd_profile(Options& o);
int cmd_landscape(Options& o);
int cmd_grape(Options& o);
int cmd_validate(Options& o);

}  // namespace pulseforge::cli
