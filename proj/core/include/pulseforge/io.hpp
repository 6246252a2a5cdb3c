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
#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pulseforge/control_field.hpp"
#include "pulseforge/dynamics.hpp"
#include "pulseforge/landscape.hpp"

// CSV and JSON artifacts. Numbers are written with 17 significant digits.
// CSV files may start with '#' comment lines (run configuration, content
// hash); readers skip them.

namespace pulseforge::io {

// Everything needed to reproduce one command-line run.
struct RunConfig {
  std::string subcommand;
  std::string variant;
  int order = 1;
  std::string cost;
  std::vector<double> box_lower;
  std::vector<double> box_upper;
  double step = 1e-3;
  double t_max = 0.0;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::string gate;
  std::vector<double> start;  // refine from here instead of a multistart
  std::size_t starts = 0;     // multistart count (0: library default)
  double time_lo = 0.0;       // start-time range of time-cost searches
  double time_hi = 0.0;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string content_hash(std::string_view bytes);

std::string format_double(double v);

// Header `t,ux,uy` (general, bang-bang) or `t,phi` (phase-only).
void write_pulse_csv(std::ostream& os, const ControlField& field, const std::string& comment = {});
// Throws ParseError (with the 1-based line number) on malformed input.
ControlField read_pulse_csv(std::istream& is);

void save_pulse(const std::filesystem::path& path, const ControlField& field,
                const std::string& comment = {});
ControlField load_pulse(const std::filesystem::path& path);

// Header `param,fidelity`.
void write_profile_csv(std::ostream& os, const dynamics::RobustnessProfile& profile,
                       const std::string& comment = {});
dynamics::RobustnessProfile read_profile_csv(std::istream& is);

// Long form `<x>,<y>,Fstar,tstar,Astar,status`; failed cells carry nan and
// status `singular`.
void write_scan_csv(std::ostream& os, const landscape::LandscapeScan& scan,
                    const std::string& comment = {});

enum class ScanQuantity { f_star, t_star, area };

// One map as a matrix: first row holds the x values, each following row
// starts with its y value.
void write_scan_map(std::ostream& os, const landscape::LandscapeScan& scan, ScanQuantity q,
                    const std::string& comment = {});

nlohmann::json to_json(const landscape::ObjectiveResult& result);
nlohmann::json to_json(const landscape::SynthesisRecord& record);

// Record JSON with the run configuration, the pulse path and a content hash
// computed over the document without the hash field.
nlohmann::json make_record_document(const landscape::SynthesisRecord& record,
                                    const RunConfig& config, const std::string& pulse_path);

// Recomputes the hash of a record document; false when it does not match.
bool verify_document(const nlohmann::json& document);

// Problem and search parameters stored in a record (the stored result is
// returned in `result`).
landscape::SynthesisRecord record_from_json(const nlohmann::json& j);

// Comment block for a CSV artifact: the run configuration and the hash of the
// data lines that follow it.
std::string provenance_comment(const RunConfig& config, std::string_view body);
// True when a CSV carries a content_hash comment matching its data lines.
bool verify_csv(std::istream& is);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace pulseforge::io
