#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "dilaflow/builders.hpp"
#include "dilaflow/errors.hpp"
#include "dilaflow/hash.hpp"
#include "dilaflow/io.hpp"
#include "dilaflow/render.hpp"
#include "schema_check.hpp"

using namespace dilaflow;

namespace {

std::string data(const std::string& name) { return read_text(std::string(DILAFLOW_TEST_DATA) + "/" + name); }

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("canonical surface files round trip byte for byte") {
  for (const char* name : {"torus.json", "cylinder.json", "two_chamber.json"}) {
    const std::string text = data(name);
    CHECK(write_surface(parse_surface(text)) == text);
    CHECK(schema::errors(Json::parse(text), "surface").empty());
  }
  for (const Surface& s : {build_torus(), build_dilation_cylinder(0.3, 2.0), build_two_chamber()}) {
    const std::string text = write_surface(s.spec());
    const Surface back = Surface::validate(parse_surface(text));
    CHECK(back.fingerprint() == s.fingerprint());
    CHECK(write_surface(back.spec()) == text);
  }
}

TEST_CASE("loose input is rewritten canonically") {
  const std::string loose =
      R"({"marked_points":[[0,0]],"pairings":[[[0,0],[0,2]],[[0,1],[0,3]]],)"
      R"("polygons":[{"vertices":[[0,0],[1.0,0],[1,1],[0,1e0]],"id":0}]})";
  CHECK(write_surface(parse_surface(loose)) == data("torus.json"));
}

TEST_CASE("malformed surface files are rejected") {
  auto code = [](const std::string& text) {
    try {
      parse_surface(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ParamOutOfRange;
  };
  CHECK(code("{") == ErrorCode::Malformed);
  CHECK(code("[]") == ErrorCode::Malformed);
  CHECK(code(R"({"pairings":[]})") == ErrorCode::Malformed);
  CHECK(code(R"({"polygons":[{"id":0,"vertices":[[0,0,1]]}]})") == ErrorCode::Malformed);
  CHECK(code(R"({"polygons":[{"id":"a","vertices":[]}]})") == ErrorCode::Malformed);
  CHECK(code(R"({"polygons":[],"extra":1})") == ErrorCode::Malformed);
  CHECK(code(R"({"polygons":[],"pairings":[[[0,0]]]})") == ErrorCode::Malformed);
  CHECK_THROWS_AS(read_text("/nonexistent/surface.json"), Error);
  // Well formed but geometrically wrong: left to validation.
  const SurfaceSpec bad = parse_surface(R"({"polygons":[{"id":0,"vertices":[[0,0],[1,0],[1,1],[0,2]]}],"pairings":[[[0,0],[0,1]]]})");
  CHECK_THROWS_AS(Surface::validate(bad), Error);
}

TEST_CASE("content ids are FNV-1a") {
  // Published FNV-1a 64 test vectors.
  CHECK(content_id("") == "cbf29ce484222325");
  CHECK(content_id("a") == "af63dc4c8601ec8c");
  CHECK(content_id("foobar") == "85944171f73967e8");
  const Surface t = build_torus();
  CHECK(surface_id(t) == "s-" + content_id(t.fingerprint()));
  CHECK(surface_id(t) != surface_id(build_two_chamber()));
}

TEST_CASE("trace dumps are one crossing per line and an outcome") {
  const Surface s = build_two_chamber();
  const TraceResult r = trace(s, {0, {0.3, 0.3}}, Direction(0.7));
  const std::string text = trace_lines(r);
  std::istringstream in(text);
  std::string line;
  std::size_t lines = 0;
  Json last;
  while (std::getline(in, line)) {
    last = Json::parse(line);
    CHECK(schema::errors(last, "trace-line").empty());
    if (lines < r.crossings.size()) {
      CHECK(last["edge"][0] == r.crossings[lines].edge.polygon);
      CHECK(last["coord"].get<double>() == r.crossings[lines].coord);
    }
    ++lines;
  }
  CHECK(lines == r.crossings.size() + 1);
  CHECK(last["outcome"] == "LimitCycle");
  CHECK(last["crossings"] == r.crossings.size());
  CHECK(std::abs(last["cycle"]["holonomy"].get<double>() - r.outcome.cycle->holonomy) == 0);
}

TEST_CASE("reports follow the published schemas") {
  for (const Surface& s : {build_torus(), build_dilation_cylinder(0.5, kPi / 3), build_two_chamber()}) {
    const Json info = info_json(s);
    CHECK(schema::errors(info, "info").empty());
    if (s.is_closed()) CHECK(info["gauss_bonnet"]["ok"] == true);
  }
  const Surface s = build_two_chamber();
  SweepConfig cfg;
  cfg.trace.max_crossings = 100;
  cfg.threads = 1;
  const SweepReport r = sweep(s, 64, cfg);
  const Json j = to_json(r);
  const auto errs = schema::errors(j, "sweep-report");
  CHECK(errs.empty());
  for (const auto& e : errs) MESSAGE(e);
  CHECK(j["classes"].size() == 64);
  CHECK(j["summary"]["hyperbolic_bins"] == r.hyperbolic_bins());
  // Statistics are recomputable from the serialized classes.
  int ms = 0;
  for (const auto& c : j["classes"]) ms += c["kind"] == "morse_smale";
  CHECK(ms == j["summary"]["morse_smale"].get<int>());

  const SaddleConnection sep = edge_connection(s, two_chamber_separator());
  HorizonConfig hc;
  hc.trace.max_crossings = 500;
  Json hz;
  hz["connection"] = to_json(sep);
  hz["disconnecting"] = true;
  hz["components"] = 2;
  hz["estimate"] = to_json(empirical_crossing_bound(s, sep, {0.5, 2.5}, hc));
  hz["pencil"] = to_json(max_crossing_pencil(s, sep, 0.4, 0.7, hc));
  CHECK(schema::errors(hz, "horizon").empty());

  const Surface c = build_dilation_cylinder(0.5, kPi / 3);
  Json geo;
  geo["direction"] = 0.5;
  geo["hyperbolic"] = Json::array();
  for (const auto& g : closed_geodesics_in_direction(c, Direction(0.5))) geo["hyperbolic"].push_back(to_json(g));
  geo["flat_families"] = 0;
  CHECK(schema::errors(geo, "geodesics").empty());
  CHECK(geo["hyperbolic"].size() == 1);
}

TEST_CASE("the schema checker rejects what it should") {
  CHECK_FALSE(schema::errors(Json::parse(R"({"polygons":[{"id":0}]})"), "surface").empty());
  CHECK_FALSE(schema::errors(Json::parse(R"({"edge":[0,1],"coord":"x","accumulated_ratio":1,"through_vertex":false})"), "trace-line").empty());
  CHECK_FALSE(schema::errors(Json::parse(R"({"polygons":[],"colour":1})"), "surface").empty());
}

TEST_CASE("rendering is deterministic and draws every part") {
  const Surface s = build_two_chamber();
  RenderSpec spec;
  spec.surface = &s;
  spec.overlays.push_back(trace_overlay(s, {0, {0.3, 0.3}}, Direction(0.7)));
  for (const auto& g : closed_geodesics_in_direction(s, Direction(0.7))) spec.overlays.push_back(geodesic_overlay(s, g));
  spec.overlays.push_back(connection_overlay(s, edge_connection(s, two_chamber_separator())));
  const std::string a = render_svg(spec);
  CHECK(a == render_svg(spec));
  CHECK(a.rfind("<?xml", 0) == 0);
  CHECK(count_of(a, "<polygon ") == 2);
  CHECK(count_of(a, "<g") == count_of(a, "</g>"));
  CHECK(count_of(a, "class=\"geodesic\"") >= 1);
  CHECK(count_of(a, "class=\"connection\"") == 1);
  // Two labels per pairing.
  CHECK(count_of(a, "<text ") == 2 * static_cast<int>(s.pairings().size()));
  // One marker per corner of the singularity.
  std::size_t corners = 0;
  for (const auto& sg : s.singularities()) corners += sg.corners.size();
  CHECK(count_of(a, "<circle ") == static_cast<int>(corners));

  SweepConfig cfg;
  cfg.trace.max_crossings = 50;
  cfg.threads = 1;
  const SweepReport r = sweep(s, 40, cfg);
  const std::string strip = render_sweep_strip(r);
  CHECK(strip == render_sweep_strip(r));
  CHECK(count_of(strip, "<rect ") == 1 + 40 + static_cast<int>(r.bins.size()));
}

TEST_CASE("the ratio colour ramp is symmetric in log ratio") {
  CHECK(ratio_color(1) == ratio_color(1.0));
  auto channels = [](const std::string& hex) {
    return std::array<int, 3>{std::stoi(hex.substr(1, 2), nullptr, 16), std::stoi(hex.substr(3, 2), nullptr, 16),
                              std::stoi(hex.substr(5, 2), nullptr, 16)};
  };
  const auto mid = channels(ratio_color(1));
  const auto small = channels(ratio_color(0.25));
  const auto large = channels(ratio_color(4));
  CHECK(small[0] > small[2]);
  CHECK(large[2] > large[0]);
  CHECK(std::abs(small[0] + large[0] - 2 * mid[0]) <= 1);
  CHECK(std::abs(small[1] - large[1]) <= 1);
}
