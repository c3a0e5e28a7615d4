#include "dilaflow/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <set>

#include "dilaflow/errors.hpp"

namespace dilaflow {

namespace {

std::string steps_text(const std::vector<EdgeRef>& steps) {
  std::string out;
  char buf[48];
  for (const EdgeRef& e : steps) {
    if (is_vertex_step(e))
      std::snprintf(buf, sizeof buf, "%sv%d:%d", out.empty() ? "" : ",", e.polygon, -e.edge - 1);
    else
      std::snprintf(buf, sizeof buf, "%s%d:%d", out.empty() ? "" : ",", e.polygon, e.edge);
    out += buf;
  }
  return out;
}

std::optional<ClosedGeodesic> geodesic_from_branch(const Surface& s, const PiecewiseAffineMap& map, const Branch& b) {
  if (std::abs(b.slope - 1) <= 1e-9 || b.signature.empty()) return std::nullopt;
  const double fixed = b.offset / (1 - b.slope);
  if (!(fixed > b.lo && fixed < b.hi)) return std::nullopt;
  const EdgeRef exit = b.signature.back();
  ClosedGeodesic g;
  g.direction = map.direction;
  g.holonomy = b.slope;
  g.signature.push_back(exit);
  g.signature.insert(g.signature.end(), b.signature.begin(), b.signature.end() - 1);
  g.base = {exit, map.exits_through_section ? fixed : 1 - fixed, 1.0, false};
  g.is_hyperbolic = true;
  if (g.holonomy > 1) {
    auto r = reverse_geodesic(s, g);
    if (!r) return std::nullopt;
    g = std::move(*r);
  }
  if (!verify_closed_geodesic(s, g, 1e-8)) return std::nullopt;
  return g;
}

}  // namespace

std::string geodesic_key(const ClosedGeodesic& g) { return steps_text(canonical_rotation(g.signature)); }

std::optional<ClosedGeodesic> reverse_geodesic(const Surface& s, const ClosedGeodesic& g) {
  const auto partner = s.partner(g.base.edge);
  if (!partner) return std::nullopt;
  ClosedGeodesic r;
  r.direction = g.direction.reversed();
  r.base = {*partner, 1 - g.base.coord, 1.0, false};
  r.is_hyperbolic = g.is_hyperbolic;
  FlowStepper st(s, r.direction);
  st.start_after_crossing(r.base.edge, r.base.coord);
  r.signature.push_back(r.base.edge);
  const std::size_t limit = 4 * g.signature.size() + 8;
  for (std::size_t k = 0; k < limit; ++k) {
    const auto ev = st.step();
    if (ev != FlowStepper::Event::Crossed && ev != FlowStepper::Event::PassedVertex) return std::nullopt;
    const CrossingRecord& rec = st.last_record();
    if (!rec.through_vertex && rec.edge == r.base.edge) {
      if (std::abs(rec.coord - r.base.coord) > 1e-8) return std::nullopt;
      r.holonomy = rec.accumulated_ratio;
      return r;
    }
    r.signature.push_back(signature_step(rec));
  }
  return std::nullopt;
}

std::vector<EdgeRef> reduced_signature(const Surface& s, const std::vector<EdgeRef>& signature) {
  std::vector<EdgeRef> out;
  for (const EdgeRef& e : signature) {
    if (is_vertex_step(e)) continue;
    if (s.singularity_at({e.polygon, e.edge}) < 0 || s.singularity_at({e.polygon, e.edge + 1}) < 0) continue;
    out.push_back(e);
  }
  return out;
}

GeodesicSearch find_closed_geodesics(const Surface& s, Direction d, const PeriodicConfig& cfg) {
  std::map<std::string, ClosedGeodesic> found;
  GeodesicSearch out;
  for (const auto& pr : s.pairings()) {
    PiecewiseAffineMap map;
    try {
      map = return_map_on_edge(s, pr.e, d, cfg.trace, cfg.samples);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SectionParallelToDirection) continue;
      throw;
    }
    for (const Branch& b : map.branches) {
      if (std::abs(b.slope - 1) <= 1e-9) {
        if (std::abs(b.offset) <= 1e-9) out.flat.push_back({pr.e, b.lo, b.hi, b.signature, d});
        continue;
      }
      if (auto g = geodesic_from_branch(s, map, b)) found.emplace(geodesic_key(*g), std::move(*g));
    }
  }
  for (auto& [key, g] : found) out.hyperbolic.push_back(std::move(g));
  return out;
}

std::vector<ClosedGeodesic> closed_geodesics_in_direction(const Surface& s, Direction d, const PeriodicConfig& cfg) {
  return find_closed_geodesics(s, d, cfg).hyperbolic;
}

bool Cylinder::contains(double theta) const { return normalize_angle(theta - lo) < hi - lo && normalize_angle(theta - lo) > 0; }

namespace {

bool same_reduced(const Surface& s, const std::vector<EdgeRef>& a, const std::vector<EdgeRef>& b) {
  return canonical_rotation(reduced_signature(s, a)) == canonical_rotation(reduced_signature(s, b));
}

// Continuation of `prev` to direction theta, if the family persists there.
std::optional<ClosedGeodesic> continuation(const Surface& s, const ClosedGeodesic& prev, double theta,
                                           const CylinderConfig& cfg) {
  const Direction d(theta);
  const double lambda = prev.holonomy;
  auto acceptable = [&](const ClosedGeodesic& g) {
    return std::abs(angle_difference(g.direction.theta(), theta)) < 1e-9 &&
           std::abs(g.holonomy - lambda) <= 1e-9 * lambda && same_reduced(s, g.signature, prev.signature);
  };

  // Fast path: the fixed point of the return map to the same base edge.
  const EdgeRef base = prev.base.edge;
  bool exits = false;
  try {
    exits = crossing_edge(s, base, d) == base;
  } catch (const Error&) {
    exits = false;
  }
  if (exits) {
    double x = prev.base.coord;
    for (int iter = 0; iter < 3; ++iter) {
      const ReturnProbe p = first_return(s, base, x, d, cfg.periodic.trace);
      if (p.kind != ReturnKind::Return || std::abs(p.slope - 1) < 1e-12) break;
      const double fixed = (p.image - p.slope * x) / (1 - p.slope);
      if (!(fixed > 0 && fixed < 1)) break;
      const ReturnProbe q = first_return(s, base, fixed, d, cfg.periodic.trace);
      if (q.kind != ReturnKind::Return) break;
      if (q.steps == p.steps && std::abs(q.image - fixed) <= 1e-9) {
        ClosedGeodesic g;
        g.direction = d;
        g.holonomy = q.slope;
        g.signature.push_back(q.steps.back());
        g.signature.insert(g.signature.end(), q.steps.begin(), q.steps.end() - 1);
        g.base = {base, fixed, 1.0, false};
        g.is_hyperbolic = true;
        if (acceptable(g)) return g;
        break;
      }
      x = fixed;
    }
  }

  // Slow path: every section, then match by holonomy and reduced signature.
  const auto all = closed_geodesics_in_direction(s, d, cfg.periodic);
  const ClosedGeodesic* pick = nullptr;
  for (const auto& g : all) {
    if (!acceptable(g)) continue;
    if (!pick || (g.base.edge == base && pick->base.edge != base)) pick = &g;
  }
  if (pick) return *pick;
  return std::nullopt;
}

std::vector<SaddleConnection> boundary_connections(const Surface& s, double theta, std::size_t period) {
  std::vector<SaddleConnection> out;
  TraceConfig tc;
  tc.max_crossings = static_cast<int>(4 * period + 16);
  tc.detect_cycles = false;
  std::set<std::string> seen;
  for (const Singularity& sing : s.singularities()) {
    for (const Corner& c : sing.corners) {
      for (double dir : {theta, theta + kPi}) {
        double rel = s.corner_relative(c, dir);
        if (rel > kTwoPi - 1e-12) rel = 0;
        if (rel >= s.corner_angle(c)) continue;
        const TraceResult r = trace_from_corner(s, c, Direction(dir), tc);
        if (r.outcome.kind != OutcomeKind::HitSingularity) continue;
        SaddleConnection sc;
        sc.start_singularity = sing.id;
        sc.end_singularity = r.outcome.singularity;
        sc.start_corner = c;
        sc.end_corner = r.outcome.corner;
        for (const auto& rec : r.crossings) sc.signature.push_back(signature_step(rec));
        sc.direction = Direction(dir);
        sc.chart_length = r.path_length;
        if (seen.insert(saddle_connection_key(sc)).second) out.push_back(std::move(sc));
      }
    }
  }
  return out;
}

}  // namespace

Cylinder extend_to_cylinder(const Surface& s, const ClosedGeodesic& g, const CylinderConfig& cfg) {
  if (!g.is_hyperbolic || std::abs(g.holonomy - 1) <= 1e-9)
    throw Error(ErrorCode::NotHyperbolic, "closed geodesic has trivial holonomy");
  const double theta0 = g.direction.theta();
  Cylinder cyl;
  cyl.core = g;
  std::vector<std::pair<double, ClosedGeodesic>> samples{{theta0, g}};
  double ends[2] = {theta0, theta0};
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    double good_theta = theta0;
    ClosedGeodesic good = g;
    double h = cfg.initial_step;
    for (;;) {
      const double t = good_theta + sign * h;
      if (std::abs(t - theta0) >= kTwoPi - 1e-6) break;
      if (auto c = continuation(s, good, t, cfg)) {
        good_theta = t;
        good = std::move(*c);
        samples.emplace_back(t, good);
        h = std::min(2 * h, cfg.max_step);
        continue;
      }
      double bad = t;
      while (std::abs(bad - good_theta) > cfg.angular_tol) {
        const double m = 0.5 * (good_theta + bad);
        if (auto c = continuation(s, good, m, cfg)) {
          good_theta = m;
          good = std::move(*c);
        } else {
          bad = m;
        }
      }
      // A failure confined to a tiny set of directions (grazing a regular
      // vertex) does not end the family.
      bool resumed = false;
      for (double off : {1e-7, 1e-6, 1e-5, 1e-4}) {
        const double probe = bad + sign * off;
        if (auto c = continuation(s, good, probe, cfg)) {
          good_theta = probe;
          good = std::move(*c);
          samples.emplace_back(probe, good);
          resumed = true;
          break;
        }
      }
      if (!resumed) break;
      h = cfg.initial_step;
    }
    ends[side] = good_theta;
    for (const auto& sc : boundary_connections(s, good_theta, good.signature.size())) cyl.boundary.push_back(sc);
  }
  cyl.hi = ends[0];
  cyl.lo = ends[1];
  cyl.angular_extent = cyl.hi - cyl.lo;
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [t, sg] : samples) cyl.samples.push_back(std::move(sg));
  return cyl;
}

std::vector<Cylinder> cylinders_on_grid(const Surface& s, int grid, const CylinderConfig& cfg) {
  std::vector<Cylinder> out;
  for (int k = 0; k < grid; ++k) {
    const double theta = (k + 0.5) * kTwoPi / grid;
    for (const auto& g : closed_geodesics_in_direction(s, Direction(theta), cfg.periodic)) {
      const bool covered = std::any_of(out.begin(), out.end(), [&](const Cylinder& c) {
        return c.contains(g.direction.theta()) && std::abs(c.core.holonomy - g.holonomy) <= 1e-9 * g.holonomy &&
               same_reduced(s, c.core.signature, g.signature);
      });
      if (!covered) out.push_back(extend_to_cylinder(s, g, cfg));
    }
  }
  return out;
}

VeechVerdict veech_criterion(const Surface& s, int grid, const CylinderConfig& cfg) {
  NoLargeCylinderFound none{grid, 0, 0.0};
  std::vector<Cylinder> seen;
  for (int k = 0; k < grid; ++k) {
    const double theta = (k + 0.5) * kTwoPi / grid;
    for (const auto& g : closed_geodesics_in_direction(s, Direction(theta), cfg.periodic)) {
      const bool covered = std::any_of(seen.begin(), seen.end(), [&](const Cylinder& c) {
        return c.contains(g.direction.theta()) && std::abs(c.core.holonomy - g.holonomy) <= 1e-9 * g.holonomy &&
               same_reduced(s, c.core.signature, g.signature);
      });
      if (covered) continue;
      Cylinder c = extend_to_cylinder(s, g, cfg);
      ++none.cylinders_examined;
      none.largest_extent = std::max(none.largest_extent, c.angular_extent);
      if (c.angular_extent >= kPi - kEpsGeo) return FoundCylinder{std::move(c)};
      seen.push_back(std::move(c));
    }
  }
  return none;
}

std::string saddle_connection_key(const SaddleConnection& sc) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d:%d>%d|%.9f|%.9f|", sc.start_corner.polygon, sc.start_corner.vertex,
                sc.end_singularity, sc.direction.theta(), sc.chart_length);
  return buf + steps_text(sc.signature);
}

namespace {

std::optional<SaddleConnection> connection_by_trace(const Surface& s, Corner start, Direction d, double max_length) {
  TraceConfig tc;
  tc.detect_cycles = false;
  tc.max_path_length = max_length * (1 + 1e-9) + 1e-12;
  tc.max_crossings = 100000;
  TraceResult r;
  try {
    r = trace_from_corner(s, start, d, tc);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (r.outcome.kind != OutcomeKind::HitSingularity || r.path_length > tc.max_path_length) return std::nullopt;
  SaddleConnection sc;
  sc.start_singularity = s.singularity_at(start);
  sc.end_singularity = r.outcome.singularity;
  sc.start_corner = start;
  sc.end_corner = r.outcome.corner;
  for (const auto& rec : r.crossings) sc.signature.push_back(signature_step(rec));
  sc.direction = d;
  sc.chart_length = r.path_length;
  return sc;
}

}  // namespace

std::optional<SaddleConnection> verify_saddle_connection(const Surface& s, Corner start, Direction d,
                                                         double expected_length, double rel_tol) {
  auto sc = connection_by_trace(s, start, d, expected_length * (1 + rel_tol));
  if (!sc || std::abs(sc->chart_length - expected_length) > rel_tol * expected_length) return std::nullopt;
  return sc;
}

std::vector<SaddleConnection> enumerate_saddle_connections(const Surface& s, double max_len,
                                                           const SaddleSearchConfig& cfg) {
  std::vector<SaddleConnection> out;
  if (!(max_len > 0)) return out;
  std::set<std::string> seen;
  auto add = [&](std::optional<SaddleConnection> sc) {
    if (!sc || sc->chart_length > max_len * (1 + 1e-9)) return;
    if (seen.insert(saddle_connection_key(*sc)).second) out.push_back(std::move(*sc));
  };

  struct Node {
    int polygon;
    AffineMap to_start;
    double lo, hi;
    int entry;
    int depth;
  };

  for (const Singularity& sing : s.singularities()) {
    for (const Corner& c : sing.corners) {
      const Polygon& root = s.polygon(c.polygon);
      const Vec2 apex = root.vertex(c.vertex);
      const double base = s.corner_base_angle(c);
      const double span = s.corner_angle(c);

      // Along the outgoing edge.
      add(connection_by_trace(s, c, Direction(base), max_len));
      // Backwards along an unglued incoming edge, through straight boundary vertices.
      const int n_root = root.size();
      if (!s.is_paired({c.polygon, (c.vertex + n_root - 1) % n_root})) {
        Corner at = c;
        double length = 0, scale = 1;
        for (int guard = 0; guard < 64; ++guard) {
          const Polygon& poly = s.polygon(at.polygon);
          const int prev = (at.vertex + poly.size() - 1) % poly.size();
          length += norm(poly.edge_vector(prev)) / scale;
          if (length > max_len * (1 + 1e-9)) break;
          const Corner end{at.polygon, prev};
          if (s.singularity_at(end) >= 0) {
            SaddleConnection sc;
            sc.start_singularity = sing.id;
            sc.end_singularity = s.singularity_at(end);
            sc.start_corner = c;
            sc.end_corner = end;
            sc.direction = Direction(angle_of(-root.edge_vector((c.vertex + n_root - 1) % n_root)));
            sc.chart_length = length;
            add(sc);
            break;
          }
          const VertexClass& vc = s.vertex_classes()[static_cast<std::size_t>(s.vertex_class_of(end))];
          scale *= vc.ratio_to_first.back();
          at = vc.corners.front();
        }
      }

      std::deque<Node> queue;
      queue.push_back({c.polygon, AffineMap::identity(), 0.0, span, -1, 0});
      std::size_t nodes = 0;
      while (!queue.empty() && nodes < cfg.max_nodes) {
        const Node node = queue.front();
        queue.pop_front();
        ++nodes;
        const Polygon& poly = s.polygon(node.polygon);
        const int n = poly.size();
        const double mid = 0.5 * (node.lo + node.hi);
        auto rel_of = [&](Vec2 p) { return mid + angle_difference(angle_of(p), base + mid); };
        const bool is_root = node.entry < 0;

        for (int k = 0; k < n; ++k) {
          if (is_root && k == c.vertex) continue;
          const Vec2 p = node.to_start(poly.vertex(k)) - apex;
          const double dist = norm(p);
          if (dist <= 1e-12 || dist > max_len * (1 + 1e-9)) continue;
          const double rel = rel_of(p);
          if (!(rel > node.lo + 1e-12 && rel < node.hi - 1e-12)) continue;
          const Direction d(base + rel);
          if (s.singularity_at({node.polygon, k}) >= 0)
            add(verify_saddle_connection(s, c, d, dist));
          else
            add(connection_by_trace(s, c, d, max_len));
        }

        if (node.depth >= cfg.max_depth) continue;
        for (int k = 0; k < n; ++k) {
          if (k == node.entry) continue;
          if (is_root && (k == c.vertex || k == (c.vertex + n - 1) % n)) continue;
          const auto f = s.partner({node.polygon, k});
          if (!f) continue;
          const Vec2 a = node.to_start(poly.vertex(k)) - apex;
          const Vec2 b = node.to_start(poly.vertex(k + 1)) - apex;
          const double ra = rel_of(a), rb = rel_of(b);
          if (!(ra < rb)) continue;
          const double lo = std::max(node.lo, ra), hi = std::min(node.hi, rb);
          if (hi - lo <= 1e-13) continue;
          const Vec2 w = b - a;
          const double t = std::clamp(-dot(a, w) / dot(w, w), 0.0, 1.0);
          if (norm(a + t * w) > max_len) continue;
          const AffineMap back = s.transition({node.polygon, k}).inverse();
          queue.push_back({f->polygon, node.to_start.after(back), lo, hi, f->edge, node.depth + 1});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const SaddleConnection& a, const SaddleConnection& b) {
    if (a.direction.theta() != b.direction.theta()) return a.direction.theta() < b.direction.theta();
    return a.chart_length < b.chart_length;
  });
  return out;
}

}  // namespace dilaflow
