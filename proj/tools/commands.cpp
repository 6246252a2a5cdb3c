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

#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pulseforge/dynamics.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/grape.hpp"
#include "pulseforge/validation.hpp"

namespace pulseforge::cli {

namespace fs = std::filesystem;
using landscape::Problem;

namespace {

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("range '" + text + "' is not of the form lo:hi");
  try {
    const double lo = std::stod(text.substr(0, colon)), hi = std::stod(text.substr(colon + 1));
    if (!(lo < hi)) throw ConfigError("range '" + text + "' is empty");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("range '" + text + "' is not numeric");
  }
}

fs::path out_dir(const io::RunConfig& c) {
  fs::path dir = c.out_dir.empty() ? fs::path(".") : fs::path(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

// Writes a CSV whose body comes from `body`, prefixed by the provenance comment.
template <class Body>
void write_artifact(const fs::path& path, const io::RunConfig& config, Body&& body) {
  std::ostringstream data;
  body(data);
  const std::string text = data.str();
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  std::istringstream comment(io::provenance_comment(config, text));
  std::string line;
  while (std::getline(comment, line)) os << "# " << line << '\n';
  os << text;
}

void resolve_box(Options& o, const Problem& p) {
  if (o.box.empty()) return;
  const std::size_t d = landscape::search_dimension(p);
  if (o.box.size() != 1 && o.box.size() != d)
    throw ConfigError("--box needs 1 or " + std::to_string(d) + " ranges");
  o.config.box_lower.clear();
  o.config.box_upper.clear();
  for (std::size_t i = 0; i < d; ++i) {
    const auto [lo, hi] = parse_range(o.box[o.box.size() == 1 ? 0 : i]);
    o.config.box_lower.push_back(lo);
    o.config.box_upper.push_back(hi);
  }
}

std::string stem(const io::RunConfig& c) { return c.variant + "-N" + std::to_string(c.order); }

landscape::SynthesisRecord synthesize(const io::RunConfig& c) {
  const Problem p = problem_from_config(c);
  if (!c.start.empty()) {
    landscape::RefineOptions ro;
    if (!c.box_lower.empty()) {
      ro.lower = c.box_lower;
      ro.upper = c.box_upper;
    }
    return landscape::refine(p, c.start, ro);
  }
  if (p.variant == flows::Variant::ensemble && p.reduction == landscape::Reduction::none &&
      p.ensemble_cost == flows::CostKind::time && p.order >= 3) {
    // Seed from phase pulses shorter than the minimum time; one spin fewer
    // gives such a duration.
    double lower = c.time_lo;
    if (!(lower > 0.0)) {
      io::RunConfig prev = c;
      prev.order = c.order - 1;
      prev.box_lower.clear();
      prev.box_upper.clear();
      lower = synthesize(prev).result.t_star;
    }
    landscape::GrapeSeedOptions so;
    so.seed = c.seed;
    return landscape::refine(p, landscape::grape_seed(p, lower, so));
  }
  landscape::FindOptions fo;
  fo.seed = c.seed;
  fo.starts = c.starts;
  fo.time_lo = c.time_lo;
  fo.time_hi = c.time_hi;
  if (!c.box_lower.empty()) fo.box = landscape::Box{c.box_lower, c.box_upper};
  return landscape::find_global(p, fo).best;
}

nlohmann::json synthesize_document(const io::RunConfig& c, const landscape::SynthesisRecord& r) {
  return io::make_record_document(r, c, stem(c) + ".csv");
}

void print_summary(const landscape::SynthesisRecord& r) {
  std::printf("%-14s %3s %10s %10s %10s\n", "variant", "N", "t*/pi", "A*/pi", "F*");
  std::printf("%-14s %3d %10.5f %10.5f %10.2e\n", std::string(flows::to_string(r.problem.variant)).c_str(),
              r.problem.order, r.result.t_star / kPi, r.result.area / kPi, r.result.f_star);
  std::printf("parameters:");
  const auto names = parameter_names(r.problem);
  for (std::size_t i = 0; i < r.x.size(); ++i) std::printf(" %s=%.8g", names[i].c_str(), r.x[i]);
  std::printf("\n");
}

}  // namespace

Problem problem_from_config(const io::RunConfig& c) {
  if (c.order < 1) throw ConfigError("order must be at least 1");
  const flows::Variant v = flows::parse_variant(c.variant);
  Problem p = landscape::default_problem(v, c.order);
  if (!c.cost.empty()) {
    if (v != flows::Variant::ensemble) throw ConfigError("--cost applies to the ensemble variant only");
    p.ensemble_cost = flows::parse_cost(c.cost);
    if (p.ensemble_cost != flows::CostKind::time) p.reduction = landscape::Reduction::none;
  }
  if (!c.gate.empty()) {
    if (v != flows::Variant::gate_time) throw ConfigError("--gate applies to the gate-time variant only");
    if (c.gate != "NOT") throw ConfigError("unsupported gate '" + c.gate + "' (supported: NOT)");
  }
  if (!(c.step > 0.0)) throw ConfigError("--step must be positive");
  p.step = c.step;
  if (c.t_max > 0.0) p.t_max = c.t_max;
  if (!c.box_lower.empty() && c.box_lower.size() != landscape::search_dimension(p))
    throw ConfigError("box dimension does not match the search dimension");
  if (!c.start.empty() && c.start.size() != landscape::search_dimension(p))
    throw ConfigError("start point dimension does not match the search dimension");
  return p;
}

std::vector<std::string> parameter_names(const Problem& p) {
  using landscape::Reduction;
  const std::size_t d = landscape::search_dimension(p);
  switch (p.reduction) {
    case Reduction::one_field:
      if (p.order == 1) return {"H"};
      if (p.order == 2) return {"H", "J"};
      return {"Omega0x", "Omega1y", "Omega2x"};
    case Reduction::bang_bang:
      if (d == 2) return {"Omega0x", "Omega1y"};
      return {"H"};
    case Reduction::invariants: return {"Ix", "Iy"};
    default: break;
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

int cmd_synthesize(Options& o) {
  Problem p = problem_from_config(o.config);
  resolve_box(o, p);
  if (!o.time_range.empty()) {
    const auto [lo, hi] = parse_range(o.time_range);
    o.config.time_lo = lo * kPi;
    o.config.time_hi = hi * kPi;
  }
  const landscape::SynthesisRecord r = synthesize(o.config);
  const fs::path dir = out_dir(o.config);
  const ControlField field = landscape::synthesize_field(r.problem, r.x, r.result.t_star);
  write_artifact(dir / (stem(o.config) + ".csv"), o.config,
                 [&](std::ostream& os) { io::write_pulse_csv(os, field); });
  io::write_json(dir / (stem(o.config) + ".json"), synthesize_document(o.config, r));
  print_summary(r);
  if (p.variant == flows::Variant::gate_time)
    std::printf("gate residual %.3e\n", -r.result.f_star);
  return kSuccess;
}

int cmd_profile(Options& o) {
  if (o.pulse.empty()) throw ConfigError("profile needs --pulse");
  const ControlField field = io::load_pulse(o.pulse);
  const auto [lo, hi] = parse_range(o.range);
  if (o.points < 2) throw ConfigError("--points must be at least 2");
  const dynamics::ProfileAxis axis = o.axis == "offset"      ? dynamics::ProfileAxis::offset
                                     : o.axis == "amplitude" ? dynamics::ProfileAxis::amplitude
                                                             : throw ConfigError("--axis must be offset or amplitude");
  dynamics::PropagationOptions po;
  po.step = o.config.step;
  const auto grid = dynamics::uniform_grid(lo, hi, o.points);
  const auto profile = dynamics::robustness_profile(field, axis, grid, po);
  const fs::path path = out_dir(o.config) / (fs::path(o.pulse).stem().string() + "_profile.csv");
  write_artifact(path, o.config, [&](std::ostream& os) { io::write_profile_csv(os, profile); });
  double best = -1.0, worst = 1.0;
  for (const auto& pt : profile.points) {
    best = std::max(best, pt.fidelity);
    worst = std::min(worst, pt.fidelity);
  }
  std::printf("%zu points, fidelity in [%.6f, %.6f], %zu local maxima\n", profile.points.size(), worst,
              best, dynamics::count_local_maxima(profile));
  std::printf("wrote %s\n", path.string().c_str());
  return kSuccess;
}

int cmd_landscape(Options& o) {
  Problem p = problem_from_config(o.config);
  if (landscape::search_dimension(p) != 2)
    throw ConfigError("landscape scans need a two-parameter problem");
  resolve_box(o, p);
  landscape::Box box = o.config.box_lower.empty() ? landscape::default_box(p)
                                                  : landscape::Box{o.config.box_lower, o.config.box_upper};
  const auto names = parameter_names(p);
  const landscape::Axis ax{names[0], box.lower[0], box.upper[0], o.nx};
  const landscape::Axis ay{names[1], box.lower[1], box.upper[1], o.ny};
  const auto scan = landscape::grid_scan(p, ax, ay);
  const fs::path dir = out_dir(o.config);
  const std::string s = stem(o.config);
  write_artifact(dir / (s + "_scan.csv"), o.config, [&](std::ostream& os) { io::write_scan_csv(os, scan); });
  const std::pair<const char*, io::ScanQuantity> maps[] = {
      {"_Fstar.csv", io::ScanQuantity::f_star}, {"_tstar.csv", io::ScanQuantity::t_star},
      {"_Astar.csv", io::ScanQuantity::area}};
  for (const auto& [suffix, q] : maps)
    write_artifact(dir / (s + suffix), o.config, [&](std::ostream& os) { io::write_scan_map(os, scan, q); });
  std::size_t failed = 0, best = 0;
  for (std::size_t i = 0; i < scan.cells.size(); ++i) {
    if (scan.cells[i].failed) ++failed;
    else if (scan.cells[best].failed || scan.cells[i].f_star > scan.cells[best].f_star) best = i;
  }
  const auto& c = scan.cells[best];
  std::printf("%zux%zu scan, %zu singular cells; best cell %s=%.5g %s=%.5g F*=%.3e t*=%.5f pi\n", o.nx,
              o.ny, failed, names[0].c_str(), ax.value(best % o.nx), names[1].c_str(), ay.value(best / o.nx),
              c.f_star, c.t_star / kPi);
  return kSuccess;
}

int cmd_grape(Options& o) {
  ControlField guess_field;
  double duration = o.duration;
  if (!o.record.empty()) {
    const auto doc = io::read_json(o.record);
    const auto rec = io::record_from_json(doc);
    duration = rec.result.t_star;
    guess_field = landscape::synthesize_field(rec.problem, rec.x, duration);
  }
  if (!(duration > 0.0)) throw ConfigError("grape needs --record or a positive --duration");
  const auto [lo, hi] = parse_range(o.range == "-1:1" ? std::string("-0.5:0.5") : o.range);
  grape::GrapeProblem gp;
  gp.offsets = dynamics::uniform_grid(lo, hi, o.spins);
  gp.duration = duration;
  gp.samples = o.samples;
  const auto bump = grape::smooth_perturbation(o.samples, o.guess == "pmp" ? 0.05 : 1.0, o.config.seed);
  if (o.guess == "pmp") {
    if (guess_field.empty()) throw ConfigError("--guess pmp needs --record");
    gp.initial_phase = grape::resample_phase(guess_field, duration, o.samples);
    for (std::size_t j = 0; j < o.samples; ++j) gp.initial_phase[j] += bump[j];
  } else if (o.guess == "random") {
    gp.initial_phase = bump;
  } else {
    throw ConfigError("--guess must be pmp or random");
  }
  grape::GrapeOptions go;
  go.iterations = o.iterations;
  const auto result = grape::grape_optimize(gp, go);
  const fs::path dir = out_dir(o.config);
  write_artifact(dir / "grape_pulse.csv", o.config, [&](std::ostream& os) { io::write_pulse_csv(os, result.field); });
  const auto grid = dynamics::uniform_grid(-0.6, 0.6, 1000);
  const auto profile = dynamics::robustness_profile(result.field, dynamics::ProfileAxis::offset, grid);
  write_artifact(dir / "grape_profile.csv", o.config, [&](std::ostream& os) { io::write_profile_csv(os, profile); });
  std::printf("GRAPE: %d iterations, mean fidelity %.6f -> %.6f over %zu spins, %zu profile maxima\n",
              result.iterations, result.history.front(), result.history.back(), o.spins,
              dynamics::count_local_maxima(profile));
  if (!guess_field.empty()) {
    const auto pmp_profile = dynamics::robustness_profile(guess_field, dynamics::ProfileAxis::offset, grid);
    write_artifact(dir / "pmp_profile.csv", o.config, [&](std::ostream& os) { io::write_profile_csv(os, pmp_profile); });
    std::printf("PMP:   mean fidelity %.6f over the same spins, %zu profile maxima\n",
                grape::mean_fidelity(gp, grape::resample_phase(guess_field, duration, o.samples)),
                dynamics::count_local_maxima(pmp_profile));
  }
  return kSuccess;
}

namespace {

// Checks every record and CSV below `dir`; returns the number of failures.
int check_artifacts(const fs::path& dir, bool recompute) {
  int failures = 0;
  auto report = [&failures](bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
  };
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path path = entry.path();
    if (path.extension() == ".csv") {
      std::ifstream is(path);
      report(io::verify_csv(is), "content hash " + path.filename().string());
    } else if (path.extension() == ".json") {
      nlohmann::json doc;
      try {
        doc = io::read_json(path);
      } catch (const Error& e) {
        report(false, path.filename().string() + ": " + e.what());
        continue;
      }
      if (!doc.contains("content_hash") || !doc.contains("pulse_path")) continue;
      report(io::verify_document(doc), "content hash " + path.filename().string());
      const auto rec = io::record_from_json(doc);
      const fs::path pulse_path = dir / doc["pulse_path"].get<std::string>();
      try {
        const ControlField stored = io::load_pulse(pulse_path);
        const ControlField fresh = landscape::synthesize_field(rec.problem, rec.x, rec.result.t_star);
        bool same = stored.size() == fresh.size();
        for (std::size_t i = 0; same && i < fresh.size(); ++i)
          same = io::format_double(stored.times()[i]) == io::format_double(fresh.times()[i]) &&
                 io::format_double(stored.ux()[i]) == io::format_double(fresh.ux()[i]) &&
                 io::format_double(stored.uy()[i]) == io::format_double(fresh.uy()[i]);
        report(same, "pulse " + pulse_path.filename().string() + " matches its record");
      } catch (const Error& e) {
        report(false, pulse_path.filename().string() + ": " + e.what());
      }
      if (recompute) {
        const auto config = io::run_config_from_json(doc["config"]);
        const auto again = synthesize_document(config, synthesize(config));
        report(again.dump() == doc.dump(), "recomputation of " + path.filename().string() + " is identical");
      }
    }
  }
  return failures;
}

}  // namespace

int cmd_validate(Options& o) {
  if (!o.artifacts.empty()) return check_artifacts(o.artifacts, o.recompute) == 0 ? kSuccess : kNumericalFailure;
  std::vector<int> ids;
  if (o.criteria.empty()) {
    for (int i = 1; i <= validation::kCriterionCount; ++i) ids.push_back(i);
  } else {
    std::istringstream is(o.criteria);
    std::string item;
    while (std::getline(is, item, ',')) {
      int id = 0;
      try {
        id = std::stoi(item);
      } catch (const std::logic_error&) {
        throw ConfigError("bad criterion '" + item + "'");
      }
      if (id < 1 || id > validation::kCriterionCount) throw ConfigError("no criterion " + item);
      ids.push_back(id);
    }
  }
  validation::ValidationOptions vo;
  vo.step = o.config.step;
  vo.seed = o.config.seed;
  vo.log = [](const std::string& m) { std::fprintf(stderr, "  .. %s\n", m.c_str()); };
  validation::Suite suite(vo);
  std::vector<validation::CriterionResult> results;
  for (int id : ids) {
    results.push_back(suite.run(id));
    std::printf("%s\n", validation::format_line(results.back()).c_str());
    std::fflush(stdout);
  }
  if (!o.config.out_dir.empty()) {
    nlohmann::json doc{{"config", io::to_json(o.config)}, {"criteria", validation::to_json(results)}};
    doc["content_hash"] = io::content_hash(doc.dump());
    io::write_json(out_dir(o.config) / "validation.json", doc);
  }
  for (const auto& r : results)
    if (!r.passed) return kNumericalFailure;
  return kSuccess;
}

}  // namespace pulseforge::cli
