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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "pulseforge/error.hpp"
#include "pulseforge/io.hpp"
#include "pulseforge/landscape.hpp"

using namespace pulseforge;

namespace {

void check_same(const ControlField& a, const ControlField& b) {
  REQUIRE(a.size() == b.size());
  CHECK(a.representation() == b.representation());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.times()[i] == b.times()[i]);
    CHECK(a.ux()[i] == b.ux()[i]);
    CHECK(a.uy()[i] == b.uy()[i]);
  }
}

ControlField round_trip(const ControlField& f) {
  std::stringstream ss;
  io::write_pulse_csv(ss, f, "a comment\nover two lines");
  return io::read_pulse_csv(ss);
}

int parse_error_line(const std::string& text) {
  std::istringstream is(text);
  try {
    io::read_pulse_csv(is);
  } catch (const ParseError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

}  // namespace

TEST_CASE("FNV-1a reference values") {
  CHECK(io::content_hash("") == "cbf29ce484222325");
  CHECK(io::content_hash("a") == "af63dc4c8601ec8c");
  CHECK(io::content_hash("foobar") == "85944171f73967e8");
}

TEST_CASE("doubles are printed losslessly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(std::nan("")) == "nan");
}

TEST_CASE("pulse CSV round trips bit for bit") {
  check_same(round_trip(ControlField::general({0.0, 0.5, 1.25}, {0.1, 1.0 / 3.0, 0.0}, {-0.2, 0.7, 0.0})),
             ControlField::general({0.0, 0.5, 1.25}, {0.1, 1.0 / 3.0, 0.0}, {-0.2, 0.7, 0.0}));
  const ControlField ph = ControlField::phase_only({0.0, 1.0, 2.0}, {0.3, -1.1, 0.0});
  check_same(round_trip(ph), ph);
  const ControlField bb = ControlField::bang_bang(3.0, 1.0, {1.0, 2.5});
  const ControlField back = round_trip(bb);
  CHECK(back.duration() == 3.0);
  CHECK(back.at(1.5).ux == -1.0);
}

TEST_CASE("malformed pulse files report the offending line") {
  CHECK(parse_error_line("t,ux,uy\n0,1,0\n0.5,abc,0\n1,0,0\n") == 3);
  CHECK(parse_error_line("t,ux,uy\n0,1,0\n0.5,1\n") == 3);
  CHECK(parse_error_line("# note\nt,ux,uy\n0,1,0\n0,1,0\n") == 4);
  CHECK(parse_error_line("t,ux,uy\n0.1,1,0\n1,0,0\n") == 2);
  CHECK(parse_error_line("time,amp\n0,1\n") == 1);
  CHECK(parse_error_line("t,phi\n0,inf\n1,0\n") == 2);
  CHECK(parse_error_line("") == 1);
}

TEST_CASE("run configuration survives JSON") {
  io::RunConfig c;
  c.subcommand = "synthesize";
  c.variant = "time-offset";
  c.order = 2;
  c.box_lower = {-1.0, -2.0};
  c.box_upper = {1.0, 2.0};
  c.seed = 42;
  c.start = {0.1, 0.2};
  c.time_lo = 1.5;
  const io::RunConfig back = io::run_config_from_json(io::to_json(c));
  CHECK(io::to_json(back) == io::to_json(c));
}

TEST_CASE("record documents detect tampering") {
  const auto p = landscape::default_problem(flows::Variant::energy_offset, 1);
  const landscape::SynthesisRecord rec = landscape::refine(p, std::vector<double>{0.652});
  io::RunConfig c;
  c.variant = "energy-offset";
  nlohmann::json doc = io::make_record_document(rec, c, "pulse.csv");
  CHECK(io::verify_document(doc));
  const landscape::SynthesisRecord back = io::record_from_json(doc);
  CHECK(back.x == rec.x);
  CHECK(back.result.t_star == rec.result.t_star);
  doc["t_star"] = rec.result.t_star + 1e-9;
  CHECK(!io::verify_document(doc));
}

TEST_CASE("CSV provenance hashes the data lines") {
  io::RunConfig c;
  c.variant = "energy-offset";
  std::ostringstream body;
  io::write_pulse_csv(body, ControlField::constant(1.0, 1.0, 0.0));
  std::stringstream ss;
  io::write_pulse_csv(ss, ControlField::constant(1.0, 1.0, 0.0), io::provenance_comment(c, body.str()));
  const std::string text = ss.str();
  std::istringstream good(text);
  CHECK(io::verify_csv(good));
  std::string tampered = text;
  tampered[tampered.rfind('1')] = '2';
  std::istringstream bad(tampered);
  CHECK(!io::verify_csv(bad));
}

TEST_CASE("scan CSV marks failed cells") {
  landscape::LandscapeScan scan;
  scan.x = {"a", 0.0, 1.0, 2};
  scan.y = {"b", 0.0, 1.0, 1};
  scan.cells.resize(2);
  scan.cells[0].f_star = -0.5;
  scan.cells[0].t_star = 1.0;
  scan.cells[0].area = 2.0;
  scan.cells[1].failed = true;
  std::ostringstream os;
  io::write_scan_csv(os, scan);
  const std::string s = os.str();
  CHECK(s.find("nan,nan,nan,singular") != std::string::npos);
  CHECK(s.find("-0.5,1,2,ok") != std::string::npos);
}

TEST_CASE("pulse files on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "pulseforge_io_test";
  std::filesystem::create_directories(dir);
  const ControlField f = ControlField::phase_only({0.0, 0.5, 1.0}, {0.25, 0.5, 0.0});
  io::save_pulse(dir / "p.csv", f);
  check_same(io::load_pulse(dir / "p.csv"), f);
  CHECK_THROWS_AS(io::load_pulse(dir / "missing.csv"), ConfigError);
  std::filesystem::remove_all(dir);
}
