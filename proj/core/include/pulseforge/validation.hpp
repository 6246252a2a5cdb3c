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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pulseforge/landscape.hpp"

namespace pulseforge::validation {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct ValidationOptions {
  double step = 1e-3;  // integrator step of every synthesis
  std::uint64_t seed = 1;
  std::function<void(const std::string&)> log;  // progress messages, may be empty
};

inline constexpr int kCriterionCount = 12;

// Runs the acceptance criteria, sharing synthesized records between them.
class Suite {
 public:
  explicit Suite(ValidationOptions options = {});

  CriterionResult run(int id);
  std::vector<CriterionResult> run_all();

  // Records behind the criteria; computed on first use.
  const landscape::SynthesisRecord& energy(int order);
  const landscape::SynthesisRecord& time(int order);
  const landscape::SynthesisRecord& amplitude(int order);
  const landscape::SynthesisRecord& ensemble(int spins);
  const landscape::SynthesisRecord& gate(int order);

 private:
  using Key = std::pair<int, int>;
  const landscape::SynthesisRecord& cached(flows::Variant v, int order,
                                           const std::function<landscape::SynthesisRecord()>& make);
  landscape::Problem problem(flows::Variant v, int order) const;
  void log(const std::string& message) const;

  ValidationOptions options_;
  std::map<Key, landscape::SynthesisRecord> records_;
};

std::string title(int id);

// Least-squares slope of log ||q(t*; delta) - target|| against log delta over
// [lo, hi] after polishing the record's shooting residual.
double scaling_slope(const landscape::SynthesisRecord& record, double lo = 1e-3, double hi = 1e-2);

std::string format_line(const CriterionResult& r);
nlohmann::json to_json(const std::vector<CriterionResult>& results);

}  // namespace pulseforge::validation
