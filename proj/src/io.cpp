#include "dilaflow/io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "dilaflow/errors.hpp"
#include "dilaflow/hash.hpp"

namespace dilaflow {

namespace {

std::string num(double v) {
  if (v == 0) v = 0;  // no negative zero in files
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::Malformed, what); }

int as_int(const Json& j, const char* what) {
  if (!j.is_number_integer()) malformed(std::string(what) + " must be an integer");
  return j.get<int>();
}

double as_double(const Json& j, const char* what) {
  if (!j.is_number()) malformed(std::string(what) + " must be a number");
  return j.get<double>();
}

std::pair<int, int> int_pair(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) malformed(std::string(what) + " must be a pair");
  return {as_int(j[0], what), as_int(j[1], what)};
}

Json edge_json(EdgeRef e) { return Json::array({e.polygon, e.edge}); }
Json corner_json(Corner c) { return Json::array({c.polygon, c.vertex}); }

Json steps_json(const std::vector<EdgeRef>& steps) {
  Json a = Json::array();
  for (const EdgeRef& e : steps) {
    if (is_vertex_step(e))
      a.push_back(Json{{"vertex", Json::array({e.polygon, -e.edge - 1})}});
    else
      a.push_back(edge_json(e));
  }
  return a;
}

}  // namespace

std::string read_text(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path, std::ios::binary);
  if (!in) malformed("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

SurfaceSpec parse_surface(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    malformed(std::string("not JSON: ") + e.what());
  }
  if (!j.is_object()) malformed("surface must be an object");
  if (!j.contains("polygons") || !j["polygons"].is_array()) malformed("missing polygons");
  SurfaceSpec spec;
  for (const Json& p : j["polygons"]) {
    if (!p.is_object() || !p.contains("id") || !p.contains("vertices") || !p["vertices"].is_array())
      malformed("polygon needs id and vertices");
    Polygon poly;
    poly.id = as_int(p["id"], "polygon id");
    for (const Json& v : p["vertices"]) {
      if (!v.is_array() || v.size() != 2) malformed("vertex must be [x, y]");
      poly.vertices.push_back({as_double(v[0], "coordinate"), as_double(v[1], "coordinate")});
    }
    spec.polygons.push_back(std::move(poly));
  }
  if (j.contains("pairings")) {
    if (!j["pairings"].is_array()) malformed("pairings must be an array");
    for (const Json& pr : j["pairings"]) {
      if (!pr.is_array() || pr.size() != 2) malformed("pairing must be [[p, e], [p, e]]");
      const auto [p0, e0] = int_pair(pr[0], "edge");
      const auto [p1, e1] = int_pair(pr[1], "edge");
      spec.pairings.push_back({{p0, e0}, {p1, e1}});
    }
  }
  if (j.contains("marked_points")) {
    if (!j["marked_points"].is_array()) malformed("marked_points must be an array");
    for (const Json& m : j["marked_points"]) {
      const auto [p, v] = int_pair(m, "marked point");
      spec.marked_points.push_back({p, v});
    }
  }
  for (const auto& [key, _] : j.items())
    if (key != "polygons" && key != "pairings" && key != "marked_points") malformed("unknown key " + key);
  return spec;
}

Surface load_surface(const std::string& path, ValidateOptions options) {
  return Surface::validate(parse_surface(read_text(path)), options);
}

std::string write_surface(const SurfaceSpec& spec) {
  std::ostringstream os;
  os << "{\n  \"polygons\": [";
  for (std::size_t i = 0; i < spec.polygons.size(); ++i) {
    const Polygon& p = spec.polygons[i];
    os << (i ? ",\n" : "\n") << "    {\"id\": " << p.id << ", \"vertices\": [";
    for (std::size_t k = 0; k < p.vertices.size(); ++k)
      os << (k ? ", " : "") << '[' << num(p.vertices[k].x) << ", " << num(p.vertices[k].y) << ']';
    os << "]}";
  }
  os << "\n  ],\n  \"pairings\": [";
  for (std::size_t i = 0; i < spec.pairings.size(); ++i) {
    const auto& [e, f] = spec.pairings[i];
    os << (i ? ",\n" : "\n") << "    [[" << e.polygon << ", " << e.edge << "], [" << f.polygon << ", " << f.edge << "]]";
  }
  os << (spec.pairings.empty() ? "" : "\n  ") << "],\n  \"marked_points\": [";
  for (std::size_t i = 0; i < spec.marked_points.size(); ++i)
    os << (i ? ", " : "") << '[' << spec.marked_points[i].polygon << ", " << spec.marked_points[i].vertex << ']';
  os << "]\n}\n";
  return os.str();
}

std::string surface_id(const Surface& s) { return content_id(s.fingerprint(), "s-"); }
std::string geodesic_id(const ClosedGeodesic& g) { return content_id(geodesic_key(g), "g-"); }
std::string connection_id(const SaddleConnection& sc) { return content_id(saddle_connection_key(sc), "sc-"); }

Json info_json(const Surface& s) {
  Json j;
  j["id"] = surface_id(s);
  j["polygons"] = s.num_polygons();
  j["pairings"] = s.pairings().size();
  j["closed"] = s.is_closed();
  j["components"] = s.num_components();
  j["genus"] = s.genus();
  j["euler_characteristic"] = s.euler_characteristic();
  j["boundary_components"] = s.boundary_components().size();
  Json sings = Json::array();
  int index_sum = 0;
  for (const Singularity& sg : s.singularities()) {
    Json o;
    o["id"] = sg.id;
    o["kind"] = to_string(sg.kind);
    o["cone_angle"] = sg.cone_angle;
    o["index"] = sg.index ? Json(*sg.index) : Json(nullptr);
    o["dilation_ratio"] = sg.dilation_ratio;
    o["on_boundary"] = sg.on_boundary;
    Json corners = Json::array();
    for (const Corner& c : sg.corners) corners.push_back(corner_json(c));
    o["corners"] = corners;
    sings.push_back(o);
    if (sg.index) index_sum += *sg.index - 1;
  }
  j["singularities"] = sings;
  Json gb;
  gb["index_sum"] = index_sum;
  if (s.is_closed()) {
    gb["expected"] = 2 * s.genus() - 2;
    gb["ok"] = index_sum == 2 * s.genus() - 2;
  } else {
    gb["expected"] = nullptr;
    gb["ok"] = nullptr;
  }
  j["gauss_bonnet"] = gb;
  j["warnings"] = s.warnings();
  return j;
}

Json to_json(const CrossingRecord& r) {
  Json j;
  j["edge"] = edge_json(r.edge);
  j["coord"] = r.coord;
  j["accumulated_ratio"] = r.accumulated_ratio;
  j["through_vertex"] = r.through_vertex;
  return j;
}

Json to_json(const TraceOutcome& o) {
  Json j;
  j["outcome"] = to_string(o.kind);
  switch (o.kind) {
    case OutcomeKind::HitSingularity:
      j["singularity"] = o.singularity;
      j["corner"] = corner_json(o.corner);
      break;
    case OutcomeKind::CrossedBoundary:
      j["edge"] = edge_json(o.boundary_edge);
      j["coord"] = o.boundary_coord;
      break;
    case OutcomeKind::LimitCycle:
      if (o.cycle) j["cycle"] = to_json(*o.cycle);
      break;
    case OutcomeKind::BudgetExhausted:
      j["reason"] = o.budget_reason;
      break;
  }
  return j;
}

Json to_json(const ClosedGeodesic& g) {
  Json j;
  j["id"] = geodesic_id(g);
  j["direction"] = g.direction.theta();
  j["holonomy"] = g.holonomy;
  j["hyperbolic"] = g.is_hyperbolic;
  j["base"] = {{"edge", edge_json(g.base.edge)}, {"coord", g.base.coord}};
  j["signature"] = steps_json(g.signature);
  return j;
}

Json to_json(const SaddleConnection& sc) {
  Json j;
  j["id"] = connection_id(sc);
  j["start"] = {{"singularity", sc.start_singularity}, {"corner", corner_json(sc.start_corner)}};
  j["end"] = {{"singularity", sc.end_singularity}, {"corner", corner_json(sc.end_corner)}};
  j["direction"] = sc.direction.theta();
  j["chart_length"] = sc.chart_length;
  j["signature"] = steps_json(sc.signature);
  return j;
}

Json to_json(const Cylinder& c) {
  Json j;
  j["core"] = to_json(c.core);
  j["lo"] = c.lo;
  j["hi"] = c.hi;
  j["angular_extent"] = c.angular_extent;
  Json b = Json::array();
  for (const auto& sc : c.boundary) b.push_back(to_json(sc));
  j["boundary"] = b;
  j["samples"] = c.samples.size();
  return j;
}

Json to_json(const CrossingBoundEstimate& e) {
  Json j;
  j["saddle_connection"] = e.saddle_connection;
  j["global_max"] = e.global_max;
  j["traces"] = e.traces;
  j["budget"] = e.budget;
  j["cycles_crossing"] = e.cycles_crossing;
  j["open_ended"] = e.open_ended;
  j["certified"] = e.certified ? Json(*e.certified) : Json(nullptr);
  j["openness_passed"] = e.openness_passed;
  Json dirs = Json::array();
  for (const auto& d : e.per_direction) dirs.push_back({{"theta", d.theta}, {"k_lower", d.k_lower}, {"traces", d.traces}});
  j["per_direction"] = dirs;
  Json open = Json::array();
  for (const auto& o : e.openness) open.push_back({{"theta", o.theta}, {"r", o.r}, {"plus", o.plus}, {"minus", o.minus}});
  j["openness"] = open;
  return j;
}

Json to_json(const Pencil& p) {
  Json j;
  Json apex;
  apex["polygon"] = p.apex.point.polygon;
  apex["position"] = Json::array({p.apex.point.position.x, p.apex.point.position.y});
  apex["edge"] = p.apex.edge ? edge_json(*p.apex.edge) : Json(nullptr);
  apex["coord"] = p.apex.coord;
  j["apex"] = apex;
  j["lo"] = p.lo;
  j["hi"] = p.hi;
  j["k"] = p.k;
  j["witness_crossings"] = p.witness_crossings;
  j["note"] = p.note;
  return j;
}

Json to_json(const DirectionClass& c) {
  Json j;
  j["theta"] = c.theta;
  j["kind"] = to_string(c.kind);
  Json ids = Json::array();
  for (const auto& g : c.geodesics) ids.push_back(geodesic_id(g));
  j["geodesics"] = ids;
  j["connection"] = c.connection ? Json(connection_id(*c.connection)) : Json(nullptr);
  j["separatrices"] = c.separatrices;
  j["limit_cycles"] = c.limit_cycles;
  j["boundary_exits"] = c.boundary_exits;
  j["saddle_hits"] = c.saddle_hits;
  j["budget_exhausted"] = c.budget_exhausted;
  j["probes"] = c.probes;
  j["probe_failures"] = c.probe_failures;
  return j;
}

Json to_json(const SweepReport& r) {
  Json j;
  j["surface"] = r.surface_id;
  j["directions"] = r.grid.size();
  j["budget"] = r.budget;
  j["seed"] = r.seed;
  Json summary;
  summary["morse_smale"] = r.count(DirectionKind::MorseSmale);
  summary["saddle_connection"] = r.count(DirectionKind::SaddleConnectionDirection);
  summary["unresolved"] = r.count(DirectionKind::Unresolved);
  summary["morse_smale_fraction"] = r.morse_smale_fraction();
  summary["hyperbolic_bins"] = r.hyperbolic_bins();
  summary["bins"] = r.bins.size();
  summary["hyperbolic_geodesics"] = r.hyperbolic_geodesics();
  j["summary"] = summary;
  Json classes = Json::array(), refined = Json::array();
  for (const auto& c : r.classes) classes.push_back(to_json(c));
  for (const auto& c : r.refined) refined.push_back(to_json(c));
  j["classes"] = classes;
  j["refined"] = refined;
  Json intervals = Json::array();
  for (const auto& iv : r.intervals)
    intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"family", content_id(iv.key, "f-")}, {"directions", iv.directions}});
  j["hyperbolic_intervals"] = intervals;
  Json bins = Json::array();
  for (const auto& b : r.bins)
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"directions", b.directions},
                    {"morse_smale", b.morse_smale},
                    {"saddle_connection", b.saddle},
                    {"unresolved", b.unresolved},
                    {"hyperbolic", b.hyperbolic}});
  j["bins"] = bins;
  return j;
}

std::string trace_lines(const TraceResult& t) {
  std::string out;
  for (const auto& r : t.crossings) out += dump_line(to_json(r));
  Json end = to_json(t.outcome);
  end["crossings"] = t.crossings.size();
  end["path_length"] = t.path_length;
  end["end"] = {{"polygon", t.end.polygon}, {"position", Json::array({t.end.position.x, t.end.position.y})}};
  out += dump_line(end);
  return out;
}

std::string dump_line(const Json& j) { return j.dump() + "\n"; }

}  // namespace dilaflow
