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

#include "pulseforge/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "pulseforge/error.hpp"

namespace pulseforge::io {

using nlohmann::json;

json to_json(const RunConfig& c) {
  return json{{"subcommand", c.subcommand}, {"variant", c.variant},     {"order", c.order},
              {"cost", c.cost},             {"box_lower", c.box_lower}, {"box_upper", c.box_upper},
              {"step", c.step},             {"t_max", c.t_max},         {"out_dir", c.out_dir},
              {"seed", c.seed},             {"gate", c.gate},           {"start", c.start},
              {"starts", c.starts},         {"time_lo", c.time_lo},     {"time_hi", c.time_hi}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.subcommand = j.value("subcommand", "");
  c.variant = j.value("variant", "");
  c.order = j.value("order", 1);
  c.cost = j.value("cost", "");
  c.box_lower = j.value("box_lower", std::vector<double>{});
  c.box_upper = j.value("box_upper", std::vector<double>{});
  c.step = j.value("step", 1e-3);
  c.t_max = j.value("t_max", 0.0);
  c.out_dir = j.value("out_dir", "");
  c.seed = j.value("seed", std::uint64_t{1});
  c.gate = j.value("gate", "");
  c.start = j.value("start", std::vector<double>{});
  c.starts = j.value("starts", std::size_t{0});
  c.time_lo = j.value("time_lo", 0.0);
  c.time_hi = j.value("time_hi", 0.0);
  return c;
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_comment(std::ostream& os, const std::string& comment) {
  std::istringstream lines(comment);
  std::string line;
  while (std::getline(lines, line)) os << "# " << line << '\n';
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty())
    throw ParseError("not a number: '" + s + "'", line);
  return v;
}

// Data rows of a CSV with the expected header; '#' lines and blank lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;
};

Table read_table(std::istream& is) {
  Table t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto cells = split(s);
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       n);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, n));
    t.rows.push_back(std::move(row));
    t.lines.push_back(n);
  }
  if (t.header.empty()) throw ParseError("missing header", n == 0 ? 1 : n);
  return t;
}

}  // namespace

void write_pulse_csv(std::ostream& os, const ControlField& field, const std::string& comment) {
  write_comment(os, comment);
  const auto t = field.times();
  if (field.representation() == FieldRepresentation::phase_only) {
    os << "t,phi\n";
    const auto phi = field.phases();
    for (std::size_t i = 0; i < t.size(); ++i)
      os << format_double(t[i]) << ',' << format_double(phi[i]) << '\n';
    return;
  }
  os << "t,ux,uy\n";
  const auto ux = field.ux(), uy = field.uy();
  for (std::size_t i = 0; i < t.size(); ++i)
    os << format_double(t[i]) << ',' << format_double(ux[i]) << ',' << format_double(uy[i]) << '\n';
}

ControlField read_pulse_csv(std::istream& is) {
  const Table tab = read_table(is);
  const bool phase = tab.header == std::vector<std::string>{"t", "phi"};
  if (!phase && tab.header != std::vector<std::string>{"t", "ux", "uy"})
    throw ParseError("pulse header must be 't,ux,uy' or 't,phi'", 1);
  if (tab.rows.size() < 2) throw ParseError("a pulse needs at least two samples", tab.lines.empty() ? 1 : tab.lines.back());
  std::vector<double> t, a, b;
  for (std::size_t i = 0; i < tab.rows.size(); ++i) {
    const auto& r = tab.rows[i];
    for (double v : r)
      if (!std::isfinite(v)) throw ParseError("non-finite value", tab.lines[i]);
    if (i == 0 && r[0] != 0.0) throw ParseError("pulse must start at t = 0", tab.lines[i]);
    if (i > 0 && !(r[0] > t.back())) throw ParseError("times must increase", tab.lines[i]);
    t.push_back(r[0]);
    a.push_back(r[1]);
    if (!phase) b.push_back(r[2]);
  }
  if (phase) return ControlField::phase_only(std::move(t), std::move(a));
  return ControlField::general(std::move(t), std::move(a), std::move(b));
}

void save_pulse(const std::filesystem::path& path, const ControlField& field,
                const std::string& comment) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  write_pulse_csv(os, field, comment);
}

ControlField load_pulse(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  return read_pulse_csv(is);
}

void write_profile_csv(std::ostream& os, const dynamics::RobustnessProfile& profile,
                       const std::string& comment) {
  write_comment(os, comment);
  os << "param,fidelity\n";
  for (const auto& p : profile.points)
    os << format_double(p.parameter) << ',' << format_double(p.fidelity) << '\n';
}

dynamics::RobustnessProfile read_profile_csv(std::istream& is) {
  const Table tab = read_table(is);
  if (tab.header != std::vector<std::string>{"param", "fidelity"})
    throw ParseError("profile header must be 'param,fidelity'", 1);
  dynamics::RobustnessProfile p;
  for (const auto& r : tab.rows) p.points.push_back({r[0], r[1]});
  return p;
}

void write_scan_csv(std::ostream& os, const landscape::LandscapeScan& scan,
                    const std::string& comment) {
  write_comment(os, comment);
  os << scan.x.name << ',' << scan.y.name << ",Fstar,tstar,Astar,status\n";
  for (std::size_t iy = 0; iy < scan.y.count; ++iy) {
    for (std::size_t ix = 0; ix < scan.x.count; ++ix) {
      const auto& c = scan.at(ix, iy);
      os << format_double(scan.x.value(ix)) << ',' << format_double(scan.y.value(iy)) << ',';
      if (c.failed) {
        os << "nan,nan,nan,singular\n";
      } else {
        os << format_double(c.f_star) << ',' << format_double(c.t_star) << ','
           << format_double(c.area) << ",ok\n";
      }
    }
  }
}

void write_scan_map(std::ostream& os, const landscape::LandscapeScan& scan, ScanQuantity q,
                    const std::string& comment) {
  write_comment(os, comment);
  os << scan.y.name << '\\' << scan.x.name;
  for (std::size_t ix = 0; ix < scan.x.count; ++ix) os << ',' << format_double(scan.x.value(ix));
  os << '\n';
  for (std::size_t iy = 0; iy < scan.y.count; ++iy) {
    os << format_double(scan.y.value(iy));
    for (std::size_t ix = 0; ix < scan.x.count; ++ix) {
      const auto& c = scan.at(ix, iy);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!c.failed) v = q == ScanQuantity::f_star ? c.f_star : q == ScanQuantity::t_star ? c.t_star : c.area;
      os << ',' << format_double(v);
    }
    os << '\n';
  }
}

json to_json(const landscape::ObjectiveResult& r) {
  json audit = json::array();
  for (std::size_t i = 0; i < r.audit.names.size(); ++i)
    audit.push_back({{"name", r.audit.names[i]},
                     {"initial", r.audit.initial[i]},
                     {"max_drift", r.audit.max_drift[i]}});
  json j{{"f_star", r.f_star}, {"t_star", r.t_star}, {"area", r.area}, {"audit", audit}};
  if (r.failed) j["failure"] = r.failure;
  return j;
}

namespace {

json problem_json(const landscape::Problem& p) {
  std::vector<double> gate;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) gate.push_back(p.gate(r, c));
  return json{{"variant", flows::to_string(p.variant)},
              {"order", p.order},
              {"reduction", landscape::to_string(p.reduction)},
              {"ensemble_cost", flows::to_string(p.ensemble_cost)},
              {"offsets", p.offsets},
              {"gate", gate},
              {"mirrored", p.mirrored},
              {"t_max", p.t_max},
              {"step", p.step},
              {"singular_threshold", p.singular_threshold}};
}

landscape::Problem problem_from_json(const json& j) {
  landscape::Problem p;
  p.variant = flows::parse_variant(j.at("variant").get<std::string>());
  p.order = j.at("order").get<int>();
  p.reduction = landscape::parse_reduction(j.value("reduction", "none"));
  p.ensemble_cost = flows::parse_cost(j.value("ensemble_cost", "time"));
  p.offsets = j.value("offsets", std::vector<double>{});
  const auto gate = j.value("gate", std::vector<double>{});
  if (gate.size() == 9)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) p.gate(r, c) = gate[static_cast<std::size_t>(3 * r + c)];
  p.mirrored = j.value("mirrored", false);
  p.t_max = j.value("t_max", p.t_max);
  p.step = j.value("step", p.step);
  p.singular_threshold = j.value("singular_threshold", p.singular_threshold);
  return p;
}

}  // namespace

json to_json(const landscape::SynthesisRecord& rec) {
  return json{{"problem", problem_json(rec.problem)},
              {"variant", flows::to_string(rec.problem.variant)},
              {"order", rec.problem.order},
              {"search_parameters", rec.x},
              {"shooting_parameters", rec.point.params},
              {"t_star", rec.result.t_star},
              {"area", rec.result.area},
              {"f_star", rec.result.f_star},
              {"converged", rec.converged},
              {"iterations", rec.iterations},
              {"result", to_json(rec.result)}};
}

json make_record_document(const landscape::SynthesisRecord& record, const RunConfig& config,
                          const std::string& pulse_path) {
  json doc = to_json(record);
  doc["config"] = to_json(config);
  doc["pulse_path"] = pulse_path;
  doc["content_hash"] = content_hash(doc.dump());
  return doc;
}

bool verify_document(const json& document) {
  if (!document.contains("content_hash")) return false;
  json copy = document;
  const std::string stored = copy["content_hash"].get<std::string>();
  copy.erase("content_hash");
  return content_hash(copy.dump()) == stored;
}

landscape::SynthesisRecord record_from_json(const json& j) {
  landscape::SynthesisRecord rec;
  rec.problem = problem_from_json(j.at("problem"));
  rec.x = j.at("search_parameters").get<std::vector<double>>();
  rec.point = landscape::shooting_point(rec.problem, rec.x);
  rec.result.f_star = j.at("f_star").get<double>();
  rec.result.t_star = j.at("t_star").get<double>();
  rec.result.area = j.at("area").get<double>();
  rec.converged = j.value("converged", false);
  rec.iterations = j.value("iterations", 0);
  return rec;
}

std::string provenance_comment(const RunConfig& config, std::string_view body) {
  return "config: " + to_json(config).dump() + "\ncontent_hash: " + content_hash(body);
}

bool verify_csv(std::istream& is) {
  static constexpr std::string_view kKey = "# content_hash: ";
  std::string line, body, stored;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '#') {
      if (line.rfind(kKey, 0) == 0) stored = trim(line.substr(kKey.size()));
      continue;
    }
    body += line;
    body += '\n';
  }
  return !stored.empty() && content_hash(body) == stored;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 1);
  }
}

}  // namespace pulseforge::io
