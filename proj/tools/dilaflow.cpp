// dilaflow: command line front end for dilation surface experiments.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dilaflow/builders.hpp"
#include "dilaflow/errors.hpp"
#include "dilaflow/horizon.hpp"
#include "dilaflow/io.hpp"
#include "dilaflow/render.hpp"
#include "dilaflow/sweep.hpp"

using namespace dilaflow;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> numbers(const std::string& text, std::size_t count, const char* flag, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": not a number: " + item);
    }
  }
  if (out.size() != count) throw UsageError(std::string(flag) + ": expected " + std::to_string(count) + " values");
  return out;
}

int as_index(double v, const char* flag) {
  if (v != std::floor(v) || v < 0) throw UsageError(std::string(flag) + ": polygon and vertex indices must be non-negative integers");
  return static_cast<int>(v);
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Malformed, "cannot write " + path);
  out << text;
}

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

double default_length(const Surface& s, double given) { return given > 0 ? given : 2 * s.max_diameter(); }

SaddleConnection resolve_connection(const Surface& s, const std::string& id, double max_len) {
  if (id.rfind("edge:", 0) == 0) {
    const auto v = numbers(id.substr(5), 2, "--sc", ':');
    return edge_connection(s, {as_index(v[0], "--sc"), as_index(v[1], "--sc")});
  }
  for (const auto& sc : enumerate_saddle_connections(s, max_len))
    if (connection_id(sc) == id) return sc;
  throw Error(ErrorCode::NotASaddleConnection, "no saddle connection with id " + id + " up to length " + std::to_string(max_len));
}

FlowPoint start_point(const std::string& text) {
  const auto v = numbers(text, 3, "--start");
  return {as_index(v[0], "--start"), {v[1], v[2]}};
}

void print_trace_summary(const TraceResult& r) {
  std::printf("outcome %s after %zu crossings, path length %.9g\n", to_string(r.outcome.kind).c_str(), r.crossings.size(),
              r.path_length);
  if (r.outcome.kind == OutcomeKind::HitSingularity)
    std::printf("singularity %d at corner %d:%d\n", r.outcome.singularity, r.outcome.corner.polygon, r.outcome.corner.vertex);
  if (r.outcome.kind == OutcomeKind::CrossedBoundary)
    std::printf("boundary edge %d:%d at %.9g\n", r.outcome.boundary_edge.polygon, r.outcome.boundary_edge.edge,
                r.outcome.boundary_coord);
  if (r.outcome.kind == OutcomeKind::LimitCycle && r.outcome.cycle)
    std::printf("limit cycle %s, period %zu, lambda %.12g\n", geodesic_id(*r.outcome.cycle).c_str(),
                r.outcome.cycle->signature.size(), r.outcome.cycle->holonomy);
  if (r.outcome.kind == OutcomeKind::BudgetExhausted) std::printf("budget: %s\n", r.outcome.budget_reason.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Straight-line flow on dilation surfaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dilaflow 0.1.0");

  std::string file, out_path;
  bool json = false;
  auto with_file = [&](CLI::App* sub) {
    sub->add_option("file", file, "Surface JSON file, or - for stdin")->required();
    sub->add_flag("--json", json, "Machine readable output");
  };

  auto* validate = app.add_subcommand("validate", "Check a surface file");
  with_file(validate);

  auto* info = app.add_subcommand("info", "Singularities, genus and the Gauss-Bonnet check");
  with_file(info);

  std::string start, corner;
  double dir = 0;
  int budget = 10000, max_period = 128;
  auto* trace_cmd = app.add_subcommand("trace", "Trace one trajectory; --json emits JSON lines");
  with_file(trace_cmd);
  auto* start_opt = trace_cmd->add_option("--start", start, "Start point P,X,Y in the chart of polygon P");
  trace_cmd->add_option("--corner", corner, "Start at corner P,V (a separatrix)")->excludes(start_opt);
  trace_cmd->add_option("--dir", dir, "Direction angle in radians")->required();
  trace_cmd->add_option("--budget", budget, "Maximum crossings")->capture_default_str()->check(CLI::PositiveNumber);
  trace_cmd->add_option("--max-period", max_period, "Longest limit cycle looked for")->capture_default_str();

  int samples = 40, geo_budget = 2000;
  auto* geodesics = app.add_subcommand("geodesics", "Closed geodesics in direction d or d + pi");
  with_file(geodesics);
  geodesics->add_option("--dir", dir, "Direction angle in radians")->required();
  geodesics->add_option("--samples", samples, "Return map samples per section")->capture_default_str();
  geodesics->add_option("--budget", geo_budget, "Maximum crossings per trace")->capture_default_str();

  bool veech = false;
  int grid = 64;
  auto* cylinders = app.add_subcommand("cylinders", "Hyperbolic cylinders met on a direction grid");
  with_file(cylinders);
  cylinders->add_flag("--veech", veech, "Only report whether a cylinder of angle at least pi exists");
  cylinders->add_option("--grid", grid, "Directions examined")->capture_default_str()->check(CLI::PositiveNumber);

  double max_len = 0;
  auto* saddles = app.add_subcommand("saddles", "Saddle connections up to a chart length");
  with_file(saddles);
  saddles->add_option("--max-length", max_len, "Longest start chart length (default twice the largest diameter)");

  std::string sc_id;
  int hz_grid = 60, hz_budget = 10000, starts = 2;
  std::uint64_t seed = 1;
  bool forward_only = false;
  std::string pencil;
  auto* horizon = app.add_subcommand("horizon", "Crossing counts with a saddle connection and its disconnection test");
  with_file(horizon);
  horizon->add_option("--sc", sc_id, "edge:P:E, or an id printed by saddles")->required();
  horizon->add_option("--grid", hz_grid, "Directions examined")->capture_default_str()->check(CLI::PositiveNumber);
  horizon->add_option("--budget", hz_budget, "Maximum crossings per trace")->capture_default_str();
  horizon->add_option("--starts", starts, "Random starts per polygon and direction")->capture_default_str();
  horizon->add_option("--seed", seed, "Seed for the random starts")->capture_default_str();
  horizon->add_option("--max-length", max_len, "Search length when resolving an id");
  horizon->add_flag("--forward-only", forward_only, "Count traces in d only, not d + pi");
  horizon->add_option("--pencil", pencil, "Also build a pencil avoiding the connection, directions LO,HI");

  int n_dirs = 1000, sw_budget = 2000, threads = 0, bins = 100, probes = 16;
  bool no_refine = false;
  std::string svg_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Classify a uniform direction grid");
  with_file(sweep_cmd);
  sweep_cmd->add_option("--n", n_dirs, "Grid size")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--budget", sw_budget, "Maximum crossings per trace")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", seed, "Seed for the guard probes")->capture_default_str();
  sweep_cmd->add_option("--threads", threads, "Worker threads, 0 for all cores")->capture_default_str();
  sweep_cmd->add_option("--bins", bins, "Density bins over the circle")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--probes", probes, "Guard probes per direction")->capture_default_str();
  sweep_cmd->add_flag("--no-refine", no_refine, "Skip the refinement between disagreeing directions");
  sweep_cmd->add_option("--svg", svg_path, "Also write the classification strip");

  std::vector<std::string> trace_starts;
  std::vector<double> geo_dirs, cyl_dirs;
  std::vector<std::string> sc_ids;
  double width = 900;
  auto* render = app.add_subcommand("render", "Draw the polygon net with overlays as SVG");
  with_file(render);
  render->add_option("-o,--output", out_path, "SVG file, or - for stdout")->required();
  render->add_option("--trace", trace_starts, "Trajectory from P,X,Y in direction --dir (repeatable)");
  render->add_option("--dir", dir, "Direction of the --trace overlays")->capture_default_str();
  render->add_option("--budget", budget, "Maximum crossings per drawn trace")->capture_default_str();
  render->add_option("--geodesics", geo_dirs, "Closed geodesics in this direction (repeatable)");
  render->add_option("--cylinder", cyl_dirs, "Shade the cylinders of the geodesics in this direction (repeatable)");
  render->add_option("--sc", sc_ids, "Saddle connection, edge:P:E or an id (repeatable)");
  render->add_option("--width", width, "Picture width in pixels")->capture_default_str();

  double rho = 0.5, alpha = kPi / 3;
  TwoChamberParams tcp;
  std::string kind;
  auto* make = app.add_subcommand("make", "Write a built-in surface: torus, cylinder or two-chamber");
  make->add_option("kind", kind, "torus | cylinder | two-chamber")->required()->check(CLI::IsMember({"torus", "cylinder", "two-chamber"}));
  make->add_option("--rho", rho, "Cylinder gluing ratio in (0, 1)")->capture_default_str();
  make->add_option("--alpha", alpha, "Cylinder sector angle in (0, 2pi)")->capture_default_str();
  make->add_option("--a1", tcp.chamber1_ratio_a, "First chamber, ratio of the first side pair")->capture_default_str();
  make->add_option("--b1", tcp.chamber1_ratio_b, "First chamber, ratio of the second side pair")->capture_default_str();
  make->add_option("--a2", tcp.chamber2_ratio_a, "Second chamber, ratio of the first side pair")->capture_default_str();
  make->add_option("--b2", tcp.chamber2_ratio_b, "Second chamber, ratio of the second side pair")->capture_default_str();
  make->add_option("-o,--output", out_path, "Output file, stdout by default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*make) {
      Surface s = kind == "torus" ? build_torus() : kind == "cylinder" ? build_dilation_cylinder(rho, alpha) : build_two_chamber(tcp);
      write_out(out_path, write_surface(s.spec()));
      return 0;
    }

    const Surface s = load_surface(file);

    if (*validate) {
      if (json) {
        Json j;
        j["valid"] = true;
        j["id"] = surface_id(s);
        j["warnings"] = s.warnings();
        print_json(j);
      } else {
        std::printf("valid: %d polygons, %zu pairings, genus %d\n", s.num_polygons(), s.pairings().size(), s.genus());
        for (const auto& w : s.warnings()) std::printf("warning: %s\n", w.c_str());
      }
    } else if (*info) {
      const Json j = info_json(s);
      if (json) {
        print_json(j);
      } else {
        std::printf("surface %s\n", j["id"].get<std::string>().c_str());
        std::printf("%d polygons, %zu pairings, %s, %d component(s)\n", s.num_polygons(), s.pairings().size(),
                    s.is_closed() ? "closed" : "with boundary", s.num_components());
        std::printf("genus %d, euler characteristic %d, %zu boundary component(s)\n", s.genus(), s.euler_characteristic(),
                    s.boundary_components().size());
        std::printf("%4s  %-16s %12s %6s %12s  corners\n", "id", "kind", "cone angle", "index", "ratio");
        for (const auto& sg : s.singularities()) {
          std::string cs;
          for (const auto& c : sg.corners) cs += (cs.empty() ? "" : " ") + std::to_string(c.polygon) + ":" + std::to_string(c.vertex);
          std::printf("%4d  %-16s %12.9f %6s %12.9g  %s\n", sg.id, to_string(sg.kind).c_str(), sg.cone_angle,
                      sg.index ? std::to_string(*sg.index).c_str() : "-", sg.dilation_ratio, cs.c_str());
        }
        const Json& gb = j["gauss_bonnet"];
        if (s.is_closed())
          std::printf("Gauss-Bonnet: sum(index - 1) = %d, 2g - 2 = %d, %s\n", gb["index_sum"].get<int>(),
                      gb["expected"].get<int>(), gb["ok"].get<bool>() ? "ok" : "MISMATCH");
        else
          std::printf("Gauss-Bonnet: sum(index - 1) = %d over interior points (surface has boundary)\n", gb["index_sum"].get<int>());
        for (const auto& w : s.warnings()) std::printf("warning: %s\n", w.c_str());
      }
    } else if (*trace_cmd) {
      TraceConfig tc;
      tc.max_crossings = budget;
      tc.max_period = max_period;
      TraceResult r;
      if (!corner.empty()) {
        const auto v = numbers(corner, 2, "--corner");
        r = trace_from_corner(s, {as_index(v[0], "--corner"), as_index(v[1], "--corner")}, Direction(dir), tc);
      } else {
        if (start.empty()) throw UsageError("trace needs --start or --corner");
        r = trace(s, start_point(start), Direction(dir), tc);
      }
      if (json)
        std::cout << trace_lines(r);
      else
        print_trace_summary(r);
    } else if (*geodesics) {
      PeriodicConfig pc;
      pc.samples = samples;
      pc.trace.max_crossings = geo_budget;
      const auto found = find_closed_geodesics(s, Direction(dir), pc);
      if (json) {
        Json j;
        j["direction"] = normalize_angle(dir);
        Json hyp = Json::array();
        for (const auto& g : found.hyperbolic) hyp.push_back(to_json(g));
        j["hyperbolic"] = hyp;
        j["flat_families"] = found.flat.size();
        print_json(j);
      } else {
        std::printf("%zu hyperbolic geodesic(s), %zu flat famil%s\n", found.hyperbolic.size(), found.flat.size(),
                    found.flat.size() == 1 ? "y" : "ies");
        for (const auto& g : found.hyperbolic)
          std::printf("%s  direction %.9f  lambda = %.12g  period %zu\n", geodesic_id(g).c_str(), g.direction.theta(),
                      g.holonomy, g.signature.size());
      }
    } else if (*cylinders) {
      if (veech) {
        const VeechVerdict v = veech_criterion(s, grid);
        if (const auto* f = std::get_if<FoundCylinder>(&v)) {
          if (json) {
            print_json(Json{{"verdict", "found_cylinder"}, {"cylinder", to_json(f->cylinder)}});
          } else {
            std::printf("found a cylinder of angle %.9f >= pi around %s\n", f->cylinder.angular_extent,
                        geodesic_id(f->cylinder.core).c_str());
          }
        } else {
          const auto& n = std::get<NoLargeCylinderFound>(v);
          if (json)
            print_json(Json{{"verdict", "no_large_cylinder_found"},
                            {"grid", n.grid},
                            {"cylinders_examined", n.cylinders_examined},
                            {"largest_extent", n.largest_extent}});
          else
            std::printf("no cylinder of angle >= pi on a grid of %d (%d examined, largest %.9f)\n", n.grid,
                        n.cylinders_examined, n.largest_extent);
        }
      } else {
        const auto cyls = cylinders_on_grid(s, grid);
        if (json) {
          Json a = Json::array();
          for (const auto& c : cyls) a.push_back(to_json(c));
          print_json(Json{{"grid", grid}, {"cylinders", a}});
        } else {
          std::printf("%zu cylinder(s)\n", cyls.size());
          for (const auto& c : cyls)
            std::printf("%s  (%.9f, %.9f)  angle %.9f  lambda = %.12g\n", geodesic_id(c.core).c_str(), c.lo, c.hi,
                        c.angular_extent, c.core.holonomy);
        }
      }
    } else if (*saddles) {
      const double L = default_length(s, max_len);
      const auto scs = enumerate_saddle_connections(s, L);
      if (json) {
        Json a = Json::array();
        for (const auto& sc : scs) a.push_back(to_json(sc));
        print_json(Json{{"max_length", L}, {"saddle_connections", a}});
      } else {
        std::printf("%zu saddle connection(s) up to length %.6g\n", scs.size(), L);
        for (const auto& sc : scs)
          std::printf("%s  %d -> %d  direction %.9f  length %.9g  crossings %zu\n", connection_id(sc).c_str(),
                      sc.start_singularity, sc.end_singularity, sc.direction.theta(), sc.chart_length, sc.signature.size());
      }
    } else if (*horizon) {
      const SaddleConnection sc = resolve_connection(s, sc_id, default_length(s, max_len));
      HorizonConfig hc;
      hc.trace.max_crossings = hz_budget;
      hc.starts_per_polygon = starts;
      hc.seed = seed;
      hc.both_orientations = !forward_only;
      std::vector<double> g;
      for (int i = 0; i < hz_grid; ++i) g.push_back((i + 0.5) * kTwoPi / hz_grid);
      const auto est = empirical_crossing_bound(s, sc, g, hc);
      const auto disc = is_disconnecting(s, sc);
      std::optional<Pencil> pen;
      if (!pencil.empty()) {
        const auto v = numbers(pencil, 2, "--pencil");
        pen = max_crossing_pencil(s, sc, v[0], v[1], hc);
      }
      if (json) {
        Json j;
        j["connection"] = to_json(sc);
        j["disconnecting"] = disc.disconnecting;
        j["components"] = disc.components;
        j["estimate"] = to_json(est);
        if (pen) j["pencil"] = to_json(*pen);
        print_json(j);
      } else {
        std::printf("connection %s, length %.9g, direction %.9f\n", connection_id(sc).c_str(), sc.chart_length,
                    sc.direction.theta());
        std::printf("cutting along it leaves %d component(s): %s\n", disc.components,
                    disc.disconnecting ? "disconnecting" : "not disconnecting");
        std::printf("max crossings %d over %d traces (budget %d), openness %s\n", est.global_max, est.traces, est.budget,
                    est.openness_passed ? "passed" : "FAILED");
        if (est.certified) std::printf("certified bound %d\n", *est.certified);
        if (est.cycles_crossing) std::printf("%d trace(s) ended on a cycle crossing the connection\n", est.cycles_crossing);
        if (pen)
          std::printf("pencil (%.9f, %.9f) from the last of %d crossing(s); %s\n", pen->lo, pen->hi, pen->k,
                      pen->note.empty() ? "witnesses avoid the connection" : pen->note.c_str());
      }
    } else if (*sweep_cmd) {
      SweepConfig cfg;
      cfg.trace.max_crossings = sw_budget;
      cfg.seed = seed;
      cfg.threads = threads;
      cfg.bins = bins;
      cfg.probes = probes;
      cfg.refine = !no_refine;
      const SweepReport r = sweep(s, n_dirs, cfg);
      if (!svg_path.empty()) write_out(svg_path, render_sweep_strip(r));
      if (json) {
        print_json(to_json(r));
      } else {
        std::printf("%zu directions at budget %d: %d Morse-Smale, %d saddle connection, %d unresolved\n", r.classes.size(),
                    r.budget, r.count(DirectionKind::MorseSmale), r.count(DirectionKind::SaddleConnectionDirection),
                    r.count(DirectionKind::Unresolved));
        std::printf("%zu refined, %zu hyperbolic interval(s), %d/%zu bins with a hyperbolic direction\n", r.refined.size(),
                    r.intervals.size(), r.hyperbolic_bins(), r.bins.size());
      }
    } else if (*render) {
      RenderSpec spec;
      spec.surface = &s;
      spec.width = width;
      TraceConfig tc;
      tc.max_crossings = budget;
      for (const auto& t : trace_starts) spec.overlays.push_back(trace_overlay(s, start_point(t), Direction(dir), tc));
      for (double d : geo_dirs)
        for (const auto& g : closed_geodesics_in_direction(s, Direction(d))) spec.overlays.push_back(geodesic_overlay(s, g));
      for (double d : cyl_dirs)
        for (const auto& g : closed_geodesics_in_direction(s, Direction(d)))
          spec.overlays.push_back(cylinder_overlay(s, extend_to_cylinder(s, g)));
      for (const auto& id : sc_ids)
        spec.overlays.push_back(connection_overlay(s, resolve_connection(s, id, default_length(s, max_len))));
      write_out(out_path, render_svg(spec));
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
