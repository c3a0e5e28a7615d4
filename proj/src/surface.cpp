#include "dilaflow/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "dilaflow/errors.hpp"

namespace dilaflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::NonParallelEdges: return "NonParallelEdges";
    case ErrorCode::NegativeRatio: return "NegativeRatio";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::BareBoundaryComponent: return "BareBoundaryComponent";
    case ErrorCode::SelfIntersectingPolygon: return "SelfIntersectingPolygon";
    case ErrorCode::InconsistentConeAngle: return "InconsistentConeAngle";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::BrokenChain: return "BrokenChain";
    case ErrorCode::InvalidStart: return "InvalidStart";
    case ErrorCode::SectionParallelToDirection: return "SectionParallelToDirection";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::NotASaddleConnection: return "NotASaddleConnection";
    case ErrorCode::NoCrossingFound: return "NoCrossingFound";
    case ErrorCode::UnboundedCrossings: return "UnboundedCrossings";
  }
  return "Unknown";
}

std::string to_string(PointKind kind) {
  switch (kind) {
    case PointKind::Cone: return "cone";
    case PointKind::DilationPoint: return "dilation_point";
    case PointKind::MarkedPoint: return "marked_point";
    case PointKind::BoundaryCorner: return "boundary_corner";
    case PointKind::BoundaryMarked: return "boundary_marked";
  }
  return "unknown";
}

double Polygon::signed_area() const {
  double a = 0;
  for (int i = 0; i < size(); ++i) a += cross(vertex(i), vertex(i + 1));
  return 0.5 * a;
}

double Polygon::diameter() const {
  double d = 0;
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j) d = std::max(d, distance(vertex(i), vertex(j)));
  return d;
}

bool Polygon::contains(Vec2 p) const {
  int winding = 0;
  for (int i = 0; i < size(); ++i) {
    const Vec2 a = vertex(i), b = vertex(i + 1);
    const double side = cross(b - a, p - a);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0) ++winding;
    } else if (b.y <= p.y && side < 0) {
      --winding;
    }
  }
  return winding != 0;
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double tol) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return cross(q - p, r - p); };
  double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol)) && ((o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol)))
    return true;
  auto on_segment = [tol](Vec2 p, Vec2 q, Vec2 r) {
    return std::abs(cross(q - p, r - p)) <= tol && dot(r - p, r - q) <= tol;
  };
  return on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b);
}

void check_polygon(const Polygon& poly) {
  if (poly.size() < 3) throw Error(ErrorCode::Malformed, "polygon " + std::to_string(poly.id) + " has fewer than 3 vertices");
  for (auto v : poly.vertices)
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw Error(ErrorCode::Malformed, "polygon " + std::to_string(poly.id) + " has a non-finite coordinate");
  const double diam = poly.diameter();
  const double tol = kEpsGeo * diam * diam;
  const int n = poly.size();
  for (int i = 0; i < n; ++i) {
    if (distance(poly.vertex(i), poly.vertex(i + 1)) <= kEpsGeo * diam)
      throw Error(ErrorCode::SelfIntersectingPolygon, "polygon " + std::to_string(poly.id) + " has a degenerate edge");
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly.vertex(i), poly.vertex(i + 1), poly.vertex(j), poly.vertex(j + 1), tol))
        throw Error(ErrorCode::SelfIntersectingPolygon,
                    "polygon " + std::to_string(poly.id) + ": edges " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
    }
  }
  if (poly.signed_area() <= 0)
    throw Error(ErrorCode::SelfIntersectingPolygon, "polygon " + std::to_string(poly.id) + " is not counterclockwise");
}

}  // namespace

Surface Surface::validate(SurfaceSpec spec, ValidateOptions options) {
  Surface s;
  const int np = static_cast<int>(spec.polygons.size());
  if (np == 0) throw Error(ErrorCode::Malformed, "surface has no polygons");
  for (int p = 0; p < np; ++p) {
    if (spec.polygons[static_cast<std::size_t>(p)].id != p)
      throw Error(ErrorCode::Malformed, "polygon ids must be 0..n-1 in file order");
    check_polygon(spec.polygons[static_cast<std::size_t>(p)]);
  }
  s.spec_ = std::move(spec);
  const auto& polys = s.spec_.polygons;

  s.pair_of_edge_.resize(static_cast<std::size_t>(np));
  s.class_of_corner_.resize(static_cast<std::size_t>(np));
  s.corner_angles_.resize(static_cast<std::size_t>(np));
  for (int p = 0; p < np; ++p) {
    const auto& poly = polys[static_cast<std::size_t>(p)];
    s.pair_of_edge_[static_cast<std::size_t>(p)].assign(static_cast<std::size_t>(poly.size()), -1);
    s.diameters_.push_back(poly.diameter());
    for (int i = 0; i < poly.size(); ++i)
      s.corner_angles_[static_cast<std::size_t>(p)].push_back(
          ccw_angle(poly.edge_vector(i), poly.vertex(i - 1) - poly.vertex(i)));
  }

  auto check_ref = [&](EdgeRef e) {
    if (e.polygon < 0 || e.polygon >= np || e.edge < 0 || e.edge >= polys[static_cast<std::size_t>(e.polygon)].size())
      throw Error(ErrorCode::Malformed, "edge reference out of range");
  };

  for (const auto& [e, f] : s.spec_.pairings) {
    check_ref(e);
    check_ref(f);
    if (e == f) throw Error(ErrorCode::Malformed, "edge paired with itself");
    for (EdgeRef r : {e, f}) {
      if (s.pair_of_edge_[static_cast<std::size_t>(r.polygon)][static_cast<std::size_t>(r.edge)] >= 0)
        throw Error(ErrorCode::Malformed, "edge appears in more than one pairing");
    }
    const auto& pe = polys[static_cast<std::size_t>(e.polygon)];
    const auto& pf = polys[static_cast<std::size_t>(f.polygon)];
    const Vec2 ve = pe.edge_vector(e.edge);
    const Vec2 vf = pf.edge_vector(f.edge);
    const double le = norm(ve), lf = norm(vf);
    const std::string label = "edges (" + std::to_string(e.polygon) + "," + std::to_string(e.edge) + ") and (" +
                              std::to_string(f.polygon) + "," + std::to_string(f.edge) + ")";
    if (std::abs(cross(ve, vf)) > kEpsGeo * le * lf) throw Error(ErrorCode::NonParallelEdges, label + " are not parallel");
    if (dot(ve, vf) >= 0) throw Error(ErrorCode::NegativeRatio, label + " point the same way; the gluing would need a negative ratio");
    EdgePairing pairing;
    pairing.e = e;
    pairing.f = f;
    pairing.ratio = lf / le;
    pairing.map = {pairing.ratio, pf.edge_end(f.edge) - pairing.ratio * pe.edge_start(e.edge)};
    const double scale = std::max(s.diameters_[static_cast<std::size_t>(f.polygon)], 1.0);
    if (distance(pairing.map(pe.edge_end(e.edge)), pf.edge_start(f.edge)) > kEpsGeo * scale * 10)
      throw Error(ErrorCode::NonParallelEdges, label + " do not match under the gluing map");
    const int idx = static_cast<int>(s.pairings_.size());
    s.pair_of_edge_[static_cast<std::size_t>(e.polygon)][static_cast<std::size_t>(e.edge)] = 2 * idx;
    s.pair_of_edge_[static_cast<std::size_t>(f.polygon)][static_cast<std::size_t>(f.edge)] = 2 * idx + 1;
    s.pairings_.push_back(pairing);
  }

  // Connected components of the polygon adjacency graph.
  UnionFind poly_uf(static_cast<std::size_t>(np));
  for (const auto& pr : s.pairings_) poly_uf.unite(static_cast<std::size_t>(pr.e.polygon), static_cast<std::size_t>(pr.f.polygon));
  std::set<std::size_t> roots;
  for (int p = 0; p < np; ++p) roots.insert(poly_uf.find(static_cast<std::size_t>(p)));
  s.components_ = static_cast<int>(roots.size());
  if (s.components_ > 1 && !options.allow_disconnected)
    throw Error(ErrorCode::Disconnected, "surface has " + std::to_string(s.components_) + " connected components");

  // Vertex classes: gluing e onto f identifies start(e) with end(f) and end(e) with start(f).
  std::vector<std::size_t> corner_offset(static_cast<std::size_t>(np) + 1, 0);
  for (int p = 0; p < np; ++p)
    corner_offset[static_cast<std::size_t>(p) + 1] = corner_offset[static_cast<std::size_t>(p)] + static_cast<std::size_t>(polys[static_cast<std::size_t>(p)].size());
  auto corner_id = [&](Corner c) {
    const int n = polys[static_cast<std::size_t>(c.polygon)].size();
    return corner_offset[static_cast<std::size_t>(c.polygon)] + static_cast<std::size_t>(((c.vertex % n) + n) % n);
  };
  UnionFind corner_uf(corner_offset.back());
  for (const auto& pr : s.pairings_) {
    corner_uf.unite(corner_id({pr.e.polygon, pr.e.edge}), corner_id({pr.f.polygon, pr.f.edge + 1}));
    corner_uf.unite(corner_id({pr.e.polygon, pr.e.edge + 1}), corner_id({pr.f.polygon, pr.f.edge}));
  }

  auto wrap = [&](int p, int i) {
    const int n = polys[static_cast<std::size_t>(p)].size();
    return ((i % n) + n) % n;
  };
  std::vector<int> root_to_class(corner_offset.back(), -1);
  for (int p = 0; p < np; ++p) s.class_of_corner_[static_cast<std::size_t>(p)].assign(static_cast<std::size_t>(polys[static_cast<std::size_t>(p)].size()), -1);

  for (int p = 0; p < np; ++p) {
    for (int i = 0; i < polys[static_cast<std::size_t>(p)].size(); ++i) {
      const std::size_t root = corner_uf.find(corner_id({p, i}));
      if (root_to_class[root] >= 0) continue;
      const int cls_id = static_cast<int>(s.classes_.size());
      root_to_class[root] = cls_id;

      // Find the start of the walk: for a boundary vertex, the corner whose
      // incoming edge is unglued.
      Corner start{p, i};
      bool boundary = false;
      {
        Corner c = start;
        for (std::size_t guard = 0; guard <= corner_offset.back(); ++guard) {
          const EdgeRef incoming{c.polygon, wrap(c.polygon, c.vertex - 1)};
          const int pi = s.pair_index(incoming);
          if (pi < 0) {
            boundary = true;
            start = c;
            break;
          }
          const EdgeRef other = *s.partner(incoming);
          c = {other.polygon, other.edge};
          if (c == start) break;
        }
      }

      VertexClass vc;
      vc.on_boundary = boundary;
      Corner c = start;
      double to_first = 1.0;
      double loop_ratio = 1.0;
      for (std::size_t guard = 0; guard <= corner_offset.back(); ++guard) {
        vc.corners.push_back(c);
        vc.ratio_to_first.push_back(to_first);
        vc.cone_angle += s.corner_angles_[static_cast<std::size_t>(c.polygon)][static_cast<std::size_t>(c.vertex)];
        s.class_of_corner_[static_cast<std::size_t>(c.polygon)][static_cast<std::size_t>(c.vertex)] = cls_id;
        const EdgeRef outgoing{c.polygon, c.vertex};
        if (!s.is_paired(outgoing)) break;
        const double r = s.ratio(outgoing);
        loop_ratio *= r;
        to_first /= r;
        const EdgeRef other = *s.partner(outgoing);
        c = {other.polygon, wrap(other.polygon, other.edge + 1)};
        if (c == start) break;
      }

      if (!boundary) {
        // The walk turns clockwise; the positive loop is its inverse.
        vc.dilation_ratio = 1.0 / loop_ratio;
        const double turns = vc.cone_angle / kTwoPi;
        vc.index = static_cast<int>(std::lround(turns));
        if (std::abs(turns - vc.index) > 1e-7 || vc.index < 1)
          throw Error(ErrorCode::InconsistentConeAngle,
                      "interior vertex has cone angle " + std::to_string(vc.cone_angle) + ", not a multiple of 2pi");
      }
      s.classes_.push_back(std::move(vc));
    }
  }

  // Every class found by the walk must contain all corners of its union-find root.
  for (int p = 0; p < np; ++p)
    for (int i = 0; i < polys[static_cast<std::size_t>(p)].size(); ++i)
      if (s.class_of_corner_[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] < 0)
        throw Error(ErrorCode::Malformed, "vertex star is not a disk or half-disk");

  // Declared marked points.
  std::vector<bool> marked(s.classes_.size(), false);
  for (const Corner& c : s.spec_.marked_points) {
    if (c.polygon < 0 || c.polygon >= np || c.vertex < 0 || c.vertex >= polys[static_cast<std::size_t>(c.polygon)].size())
      throw Error(ErrorCode::Malformed, "marked point corner out of range");
    marked[static_cast<std::size_t>(s.vertex_class_of(c))] = true;
  }

  // Boundary components: follow unglued edges, each continuing from the end of
  // the vertex chain at its endpoint.
  std::set<EdgeRef> visited;
  for (int p = 0; p < np; ++p) {
    for (int i = 0; i < polys[static_cast<std::size_t>(p)].size(); ++i) {
      const EdgeRef first{p, i};
      if (s.is_paired(first) || visited.count(first)) continue;
      std::vector<EdgeRef> component;
      EdgeRef e = first;
      while (!visited.count(e)) {
        visited.insert(e);
        component.push_back(e);
        const int cls = s.vertex_class_of({e.polygon, e.edge + 1});
        const Corner last = s.classes_[static_cast<std::size_t>(cls)].corners.back();
        e = {last.polygon, last.vertex};
      }
      s.boundary_.push_back(std::move(component));
    }
  }

  auto is_regular = [&](const VertexClass& vc) {
    if (vc.on_boundary) return std::abs(vc.cone_angle - kPi) <= 1e-9 * kPi;
    return vc.index == 1 && std::abs(std::log(vc.dilation_ratio)) <= kEpsGeo;
  };

  for (const auto& component : s.boundary_) {
    bool has_singular = false;
    for (EdgeRef e : component) {
      const auto& vc = s.classes_[static_cast<std::size_t>(s.vertex_class_of({e.polygon, e.edge}))];
      if (!is_regular(vc) || marked[static_cast<std::size_t>(s.vertex_class_of({e.polygon, e.edge}))]) has_singular = true;
    }
    if (has_singular) continue;
    if (!options.auto_mark_boundary)
      throw Error(ErrorCode::BareBoundaryComponent, "a boundary component carries no singularity");
    const Corner c{component.front().polygon, component.front().edge};
    marked[static_cast<std::size_t>(s.vertex_class_of(c))] = true;
    s.spec_.marked_points.push_back(c);
    s.warnings_.push_back("boundary component without singularity: marked the vertex at corner (" +
                          std::to_string(c.polygon) + "," + std::to_string(c.vertex) + ")");
  }

  for (std::size_t k = 0; k < s.classes_.size(); ++k) {
    auto& vc = s.classes_[k];
    if (is_regular(vc) && !marked[k]) continue;
    Singularity sing;
    sing.id = static_cast<int>(s.singularities_.size());
    sing.vertex_class = static_cast<int>(k);
    sing.corners = vc.corners;
    sing.cone_angle = vc.cone_angle;
    sing.dilation_ratio = vc.dilation_ratio;
    sing.on_boundary = vc.on_boundary;
    if (vc.on_boundary) {
      sing.kind = is_regular(vc) ? PointKind::BoundaryMarked : PointKind::BoundaryCorner;
    } else {
      sing.index = vc.index;
      if (vc.index != 1) sing.kind = PointKind::Cone;
      else if (is_regular(vc)) sing.kind = PointKind::MarkedPoint;
      else sing.kind = PointKind::DilationPoint;
    }
    vc.singularity = sing.id;
    s.singularities_.push_back(std::move(sing));
  }

  // Euler characteristic and genus, summed over components.
  std::size_t unglued = 0;
  for (int p = 0; p < np; ++p)
    for (int i = 0; i < polys[static_cast<std::size_t>(p)].size(); ++i)
      if (!s.is_paired({p, i})) ++unglued;
  const int V = static_cast<int>(s.classes_.size());
  const int E = static_cast<int>(s.pairings_.size() + unglued);
  s.euler_ = V - E + np;
  const int b = static_cast<int>(s.boundary_.size());
  // For each component chi_c = 2 - 2 g_c - b_c; summing gives 2C - 2g - b.
  s.genus_ = (2 * s.components_ - s.euler_ - b) / 2;
  return s;
}

int Surface::pair_index(EdgeRef e) const {
  const int v = pair_of_edge_[static_cast<std::size_t>(e.polygon)][static_cast<std::size_t>(e.edge)];
  return v < 0 ? -1 : v / 2;
}

std::optional<EdgeRef> Surface::partner(EdgeRef e) const {
  const int v = pair_of_edge_[static_cast<std::size_t>(e.polygon)][static_cast<std::size_t>(e.edge)];
  if (v < 0) return std::nullopt;
  const auto& pr = pairings_[static_cast<std::size_t>(v / 2)];
  return (v % 2 == 0) ? pr.f : pr.e;
}

AffineMap Surface::transition(EdgeRef e) const {
  const int v = pair_of_edge_[static_cast<std::size_t>(e.polygon)][static_cast<std::size_t>(e.edge)];
  if (v < 0) throw Error(ErrorCode::BrokenChain, "edge is not glued");
  const auto& pr = pairings_[static_cast<std::size_t>(v / 2)];
  return (v % 2 == 0) ? pr.map : pr.map.inverse();
}

EdgeRef Surface::canonical_edge(EdgeRef e) const {
  auto other = partner(e);
  return (other && *other < e) ? *other : e;
}

Vec2 Surface::edge_point(EdgeRef e, double s) const {
  const auto& poly = polygon(e.polygon);
  return poly.edge_start(e.edge) + s * poly.edge_vector(e.edge);
}

int Surface::vertex_class_of(Corner c) const {
  const int n = polygon(c.polygon).size();
  return class_of_corner_[static_cast<std::size_t>(c.polygon)][static_cast<std::size_t>(((c.vertex % n) + n) % n)];
}

double Surface::corner_angle(Corner c) const {
  const int n = polygon(c.polygon).size();
  return corner_angles_[static_cast<std::size_t>(c.polygon)][static_cast<std::size_t>(((c.vertex % n) + n) % n)];
}

double Surface::corner_base_angle(Corner c) const { return angle_of(polygon(c.polygon).edge_vector(c.vertex)); }

double Surface::corner_relative(Corner c, double theta) const { return normalize_angle(theta - corner_base_angle(c)); }

bool Surface::direction_in_corner(Corner c, double theta, double tol) const {
  const double rel = corner_relative(c, theta);
  return rel > tol && rel < corner_angle(c) - tol;
}

double Surface::max_diameter() const { return *std::max_element(diameters_.begin(), diameters_.end()); }

std::string Surface::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& poly : spec_.polygons) {
    os << "P" << poly.id;
    for (auto v : poly.vertices) os << ' ' << v.x << ' ' << v.y;
    os << ';';
  }
  for (const auto& [e, f] : spec_.pairings) os << e.polygon << ':' << e.edge << '-' << f.polygon << ':' << f.edge << ';';
  for (const auto& c : spec_.marked_points) os << 'M' << c.polygon << ':' << c.vertex << ';';
  return os.str();
}

AffineMap holonomy_of_path(const Surface& s, std::span<const EdgeRef> path) {
  AffineMap h = AffineMap::identity();
  if (path.empty()) return h;
  int current = path.front().polygon;
  for (const EdgeRef& e : path) {
    if (e.polygon != current || e.edge < 0 || e.edge >= s.num_edges(e.polygon))
      throw Error(ErrorCode::BrokenChain, "crossing is not an edge of the current polygon");
    auto other = s.partner(e);
    if (!other) throw Error(ErrorCode::BrokenChain, "crossing an unglued edge");
    h = s.transition(e).after(h);
    current = other->polygon;
  }
  return h;
}

std::vector<AffineMap> contractible_loop_holonomies(const Surface& s) {
  std::vector<AffineMap> loops;
  for (const auto& pr : s.pairings()) {
    const EdgeRef path[] = {pr.e, pr.f};
    loops.push_back(holonomy_of_path(s, path));
  }
  for (const auto& vc : s.vertex_classes()) {
    if (vc.on_boundary || vc.index != 1 || std::abs(std::log(vc.dilation_ratio)) > kEpsGeo) continue;
    std::vector<EdgeRef> path;
    for (const Corner& c : vc.corners) path.push_back({c.polygon, c.vertex});
    loops.push_back(holonomy_of_path(s, path));
  }
  return loops;
}

}  // namespace dilaflow
