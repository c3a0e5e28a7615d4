#include "dilaflow/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dilaflow/errors.hpp"

namespace dilaflow {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", std::abs(v) < 5e-4 ? 0.0 : v);
  return buf;
}

std::string pair_label(int i) {
  std::string out;
  do {
    out.insert(out.begin(), static_cast<char>('a' + i % 26));
    i = i / 26 - 1;
  } while (i >= 0);
  return out;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

struct Frame {
  double min_x{0};
  double max_y{0};
  double x0{0};
  double y0{0};
};

struct Layout {
  double scale{1};
  double height{0};
  std::vector<Frame> frames;

  Vec2 map(int p, Vec2 z) const {
    const Frame& f = frames[static_cast<std::size_t>(p)];
    return {f.x0 + (z.x - f.min_x) * scale, f.y0 + (f.max_y - z.y) * scale};
  }
};

// Polygons side by side in one row, sharing a scale, tops aligned.
Layout layout(const RenderSpec& spec) {
  const Surface& s = *spec.surface;
  std::vector<double> lo_x, hi_x, lo_y, hi_y;
  double total = 0, tallest = 0;
  for (int p = 0; p < s.num_polygons(); ++p) {
    const auto& vs = s.polygon(p).vertices;
    auto [mnx, mxx] = std::minmax_element(vs.begin(), vs.end(), [](Vec2 a, Vec2 b) { return a.x < b.x; });
    auto [mny, mxy] = std::minmax_element(vs.begin(), vs.end(), [](Vec2 a, Vec2 b) { return a.y < b.y; });
    lo_x.push_back(mnx->x);
    hi_x.push_back(mxx->x);
    lo_y.push_back(mny->y);
    hi_y.push_back(mxy->y);
    total += mxx->x - mnx->x;
    tallest = std::max(tallest, mxy->y - mny->y);
  }
  const double gap = spec.gap * s.max_diameter();
  total += gap * (s.num_polygons() - 1);
  Layout out;
  out.scale = (spec.width - 2 * spec.margin) / total;
  out.height = tallest * out.scale + 2 * spec.margin;
  double x = spec.margin;
  for (int p = 0; p < s.num_polygons(); ++p) {
    const auto i = static_cast<std::size_t>(p);
    out.frames.push_back({lo_x[i], hi_y[i], x, spec.margin});
    x += (hi_x[i] - lo_x[i] + gap) * out.scale;
  }
  return out;
}

TraceConfig path_config(int crossings) {
  TraceConfig tc;
  tc.detect_cycles = false;
  tc.record_path = true;
  tc.max_crossings = crossings;
  return tc;
}

const char* overlay_class(OverlayKind k) {
  switch (k) {
    case OverlayKind::Trace: return "trace";
    case OverlayKind::Geodesic: return "geodesic";
    case OverlayKind::SaddleConnection: return "connection";
    case OverlayKind::Cylinder: return "cylinder";
  }
  return "";
}

}  // namespace

std::string ratio_color(double r) {
  // log ratio squashed into (0, 1); 0.5 is a translation chart
  const double t = 0.5 - std::atan(std::log(std::max(r, 1e-300)) / 2) / kPi;
  const int red = static_cast<int>(std::lround(40 + 200 * t));
  const int green = static_cast<int>(std::lround(70 + 60 * (1 - std::abs(2 * t - 1))));
  const int blue = static_cast<int>(std::lround(240 - 200 * t));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, green, blue);
  return buf;
}

Overlay trace_overlay(const Surface& s, FlowPoint start, Direction d, const TraceConfig& cfg) {
  TraceConfig tc = cfg;
  tc.record_path = true;
  const TraceResult r = trace(s, start, d, tc);
  return {OverlayKind::Trace, r.path, "trace " + to_string(r.outcome.kind)};
}

Overlay geodesic_overlay(const Surface& s, const ClosedGeodesic& g) {
  const TraceResult r = trace_after_crossing(s, g.base.edge, g.base.coord, g.direction,
                                             path_config(static_cast<int>(g.signature.size())));
  char buf[64];
  std::snprintf(buf, sizeof buf, "geodesic lambda=%.6g", g.holonomy);
  return {OverlayKind::Geodesic, r.path, buf};
}

Overlay connection_overlay(const Surface& s, const SaddleConnection& sc) {
  TraceConfig tc = path_config(static_cast<int>(sc.signature.size()) + 4);
  tc.max_path_length = sc.chart_length * (1 + 1e-6) + 1e-12;
  const TraceResult r = trace_from_corner(s, sc.start_corner, sc.direction, tc);
  if (r.outcome.kind != OutcomeKind::HitSingularity)
    throw Error(ErrorCode::NotASaddleConnection, "connection does not end on a singularity");
  return {OverlayKind::SaddleConnection, r.path, "saddle connection"};
}

Overlay cylinder_overlay(const Surface& s, const Cylinder& c) {
  Overlay o{OverlayKind::Cylinder, {}, "cylinder"};
  for (const auto& g : c.samples) {
    const Overlay one = geodesic_overlay(s, g);
    o.path.insert(o.path.end(), one.path.begin(), one.path.end());
  }
  return o;
}

std::string render_svg(const RenderSpec& spec) {
  if (!spec.surface) throw Error(ErrorCode::Malformed, "render needs a surface");
  const Surface& s = *spec.surface;
  const Layout lay = layout(spec);
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(spec.width) << "\" height=\""
     << fmt(lay.height) << "\" viewBox=\"0 0 " << fmt(spec.width) << ' ' << fmt(lay.height) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  os << "<g class=\"net\">\n";
  for (int p = 0; p < s.num_polygons(); ++p) {
    os << "<polygon points=\"";
    for (int v = 0; v < s.num_edges(p); ++v) {
      const Vec2 q = lay.map(p, s.polygon(p).vertex(v));
      os << (v ? " " : "") << fmt(q.x) << ',' << fmt(q.y);
    }
    os << "\" fill=\"#f4f4f0\" stroke=\"none\"/>\n";
    for (int e = 0; e < s.num_edges(p); ++e) {
      const EdgeRef ref{p, e};
      const Vec2 a = lay.map(p, s.polygon(p).edge_start(e));
      const Vec2 b = lay.map(p, s.polygon(p).edge_end(e));
      const bool paired = s.is_paired(ref);
      os << "<line x1=\"" << fmt(a.x) << "\" y1=\"" << fmt(a.y) << "\" x2=\"" << fmt(b.x) << "\" y2=\"" << fmt(b.y)
         << "\" stroke=\"" << (paired ? "#777777" : "#111111") << "\" stroke-width=\""
         << fmt(paired ? spec.stroke : 2.5 * spec.stroke) << '"' << (paired ? " stroke-dasharray=\"4 2\"" : "") << "/>\n";
      if (!spec.pairing_labels || !paired) continue;
      // label just inside the edge midpoint
      const Vec2 mid = (a + b) * 0.5;
      const Vec2 w = b - a;
      const Vec2 inward = Vec2{w.y, -w.x} / std::max(norm(w), 1e-12);
      const Vec2 at = mid - inward * 10.0;
      char ratio[32];
      std::snprintf(ratio, sizeof ratio, "%.4g", s.ratio(ref));
      os << "<text x=\"" << fmt(at.x) << "\" y=\"" << fmt(at.y + 4) << "\" font-family=\"sans-serif\" font-size=\"11\" "
         << "text-anchor=\"middle\" fill=\"#444444\">" << pair_label(s.pair_index(ref)) << "<title>ratio " << ratio
         << "</title></text>\n";
    }
  }
  os << "</g>\n";

  for (const Overlay& o : spec.overlays) {
    os << "<g class=\"" << overlay_class(o.kind) << "\">";
    if (!o.label.empty()) os << "<title>" << escape(o.label) << "</title>";
    os << '\n';
    const bool thin = o.kind == OverlayKind::Cylinder;
    const double width = o.kind == OverlayKind::SaddleConnection ? 2 * spec.stroke : thin ? 0.5 * spec.stroke : spec.stroke;
    std::size_t i = 0;
    while (i < o.path.size()) {
      // Runs of contiguous pieces in one polygon become one polyline.
      std::size_t j = i + 1;
      while (j < o.path.size() && o.path[j].polygon == o.path[i].polygon &&
             distance(o.path[j].from, o.path[j - 1].to) < 1e-12)
        ++j;
      os << "<polyline points=\"";
      const Vec2 first = lay.map(o.path[i].polygon, o.path[i].from);
      os << fmt(first.x) << ',' << fmt(first.y);
      for (std::size_t k = i; k < j; ++k) {
        const Vec2 q = lay.map(o.path[k].polygon, o.path[k].to);
        os << ' ' << fmt(q.x) << ',' << fmt(q.y);
      }
      const std::string color = o.kind == OverlayKind::SaddleConnection ? "#e08a00" : ratio_color(o.path[i].accumulated_ratio);
      os << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << fmt(width) << '"'
         << (thin ? " stroke-opacity=\"0.5\"" : "") << "/>\n";
      i = j;
    }
    os << "</g>\n";
  }

  os << "<g class=\"singularities\">\n";
  for (const Singularity& sg : s.singularities())
    for (const Corner& c : sg.corners) {
      const Vec2 q = lay.map(c.polygon, s.polygon(c.polygon).vertex(c.vertex));
      os << "<circle cx=\"" << fmt(q.x) << "\" cy=\"" << fmt(q.y) << "\" r=\"3.5\" fill=\""
         << (sg.on_boundary ? "#ffffff" : "#111111") << "\" stroke=\"#111111\"><title>" << escape(to_string(sg.kind))
         << ' ' << sg.id << "</title></circle>\n";
    }
  os << "</g>\n</svg>\n";
  return os.str();
}

std::string render_sweep_strip(const SweepReport& r, double width) {
  const double margin = 24, strip = 28, hist = 120;
  const double height = 2 * margin + strip + 12 + hist + 18;
  const double span = width - 2 * margin;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
     << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n<g class=\"classes\" shape-rendering=\"crispEdges\">\n";
  const double cell = span / std::max<std::size_t>(1, r.classes.size());
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    const auto& c = r.classes[k];
    const char* color = c.kind == DirectionKind::MorseSmale                  ? "#2e9e5a"
                        : c.kind == DirectionKind::SaddleConnectionDirection ? "#e08a00"
                                                                             : "#b8b8b8";
    os << "<rect x=\"" << fmt(margin + c.theta / kTwoPi * span) << "\" y=\"" << fmt(margin) << "\" width=\""
       << fmt(cell) << "\" height=\"" << fmt(strip) << "\" fill=\"" << color << "\"/>\n";
  }
  os << "</g>\n<g class=\"bins\">\n";
  const double base = margin + strip + 12 + hist;
  for (const auto& b : r.bins) {
    const double frac = b.directions ? static_cast<double>(b.hyperbolic) / b.directions : 0.0;
    const double x = margin + b.lo / kTwoPi * span;
    const double w = (b.hi - b.lo) / kTwoPi * span;
    os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(base - frac * hist) << "\" width=\"" << fmt(w) << "\" height=\""
       << fmt(frac * hist) << "\" fill=\"#3a6fd8\" stroke=\"#ffffff\" stroke-width=\"0.5\"><title>" << b.hyperbolic
       << '/' << b.directions << "</title></rect>\n";
  }
  os << "</g>\n<g class=\"axis\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444444\" text-anchor=\"middle\">\n";
  os << "<line x1=\"" << fmt(margin) << "\" y1=\"" << fmt(base) << "\" x2=\"" << fmt(margin + span) << "\" y2=\""
     << fmt(base) << "\" stroke=\"#444444\"/>\n";
  const char* ticks[] = {"0", "pi/2", "pi", "3pi/2", "2pi"};
  for (int t = 0; t <= 4; ++t)
    os << "<text x=\"" << fmt(margin + span * t / 4) << "\" y=\"" << fmt(base + 14) << "\">" << ticks[t] << "</text>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace dilaflow
