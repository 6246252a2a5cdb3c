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

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "pulseforge/error.hpp"

namespace {

using pulseforge::cli::Options;

void add_problem_flags(CLI::App* sub, Options& o) {
  sub->add_option("--variant", o.config.variant, "energy-offset | time-offset | amplitude | ensemble | gate-time")
      ->required();
  sub->add_option("--order", o.config.order, "perturbative order N (spins for the ensemble)");
  sub->add_option("--cost", o.config.cost, "ensemble cost: time | energy");
  sub->add_option("--gate", o.config.gate, "target gate (NOT)");
  sub->add_option("--box", o.box, "search box as lo:hi, once for all parameters or once per parameter");
  sub->add_option("--tmax", o.config.t_max, "longest admissible time");
}

void add_common_flags(CLI::App* sub, Options& o) {
  sub->add_option("--step", o.config.step, "integrator step")->capture_default_str();
  sub->add_option("--out", o.config.out_dir, "output directory");
  sub->add_option("--seed", o.config.seed, "random seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = pulseforge::cli;
  CLI::App app{"pulseforge: robust control pulses from geometric optimal control"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synthesize", "search, refine and export an optimal pulse");
  add_problem_flags(synth, o);
  add_common_flags(synth, o);
  synth->add_option("--start", o.config.start, "refine from these search parameters");
  synth->add_option("--starts", o.config.starts, "multistart count");
  synth->add_option("--time-range", o.time_range, "start times lo:hi in units of pi");

  auto* profile = app.add_subcommand("profile", "fidelity of a pulse file along an offset or amplitude grid");
  add_common_flags(profile, o);
  profile->add_option("--pulse", o.pulse, "pulse CSV")->required();
  profile->add_option("--axis", o.axis, "offset | amplitude")->capture_default_str();
  profile->add_option("--range", o.range, "grid range lo:hi")->capture_default_str();
  profile->add_option("--points", o.points, "grid points")->capture_default_str();

  auto* scan = app.add_subcommand("landscape", "F*, t* and A* maps over a two-parameter section");
  add_problem_flags(scan, o);
  add_common_flags(scan, o);
  scan->add_option("--nx", o.nx, "cells along the first parameter")->capture_default_str();
  scan->add_option("--ny", o.ny, "cells along the second parameter")->capture_default_str();

  auto* grape = app.add_subcommand("grape", "gradient ascent on piecewise-constant phases for an offset ensemble");
  add_common_flags(grape, o);
  grape->add_option("--record", o.record, "synthesis record JSON supplying duration and initial guess");
  grape->add_option("--duration", o.duration, "pulse duration in units of pi (without --record)");
  grape->add_option("--spins", o.spins, "offsets spread uniformly over [-0.5, 0.5]")->capture_default_str();
  grape->add_option("--samples", o.samples, "phase samples")->capture_default_str();
  grape->add_option("--iterations", o.iterations, "iteration cap")->capture_default_str();
  grape->add_option("--guess", o.guess, "pmp | random")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "run the acceptance criteria or check artifacts");
  add_common_flags(validate, o);
  validate->add_option("--criteria", o.criteria, "comma-separated criterion ids (default: all)");
  validate->add_option("--artifacts", o.artifacts, "directory of artifacts to verify");
  validate->add_flag("--recompute", o.recompute, "also recompute records from their embedded configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kSuccess : cli::kUsageError;
  }

  try {
    if (*synth) {
      o.config.subcommand = "synthesize";
      return cli::cmd_synthesize(o);
    }
    if (*profile) {
      o.config.subcommand = "profile";
      return cli::cmd_profile(o);
    }
    if (*scan) {
      o.config.subcommand = "landscape";
      return cli::cmd_landscape(o);
    }
    if (*grape) {
      o.config.subcommand = "grape";
      return cli::cmd_grape(o);
    }
    o.config.subcommand = "validate";
    return cli::cmd_validate(o);
  } catch (const pulseforge::ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return cli::kUsageError;
  } catch (const pulseforge::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return cli::kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kNumericalFailure;
  }
}
