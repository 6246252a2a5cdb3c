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

// Runs the acceptance criteria and prints one pass/fail line per criterion.
// Usage: pulseforge_acceptance [--step h] [--seed s] [id ...]

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "pulseforge/validation.hpp"

int main(int argc, char** argv) {
  using namespace pulseforge::validation;
  ValidationOptions options;
  options.log = [](const std::string& m) { std::fprintf(stderr, "  .. %s\n", m.c_str()); };
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--step" && i + 1 < argc) {
      options.step = std::atof(argv[++i]);
    } else if (a == "--seed" && i + 1 < argc) {
      options.seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      ids.push_back(std::atoi(a.c_str()));
    }
  }
  if (ids.empty())
    for (int id = 1; id <= kCriterionCount; ++id) ids.push_back(id);

  Suite suite(options);
  int failed = 0;
  for (int id : ids) {
    const CriterionResult r = suite.run(id);
    std::printf("%s\n", format_line(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%zu criteria, %d failed\n", ids.size(), failed);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
