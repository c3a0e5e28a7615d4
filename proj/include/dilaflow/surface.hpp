#pragma once

// Dilation surfaces presented as planar polygons whose edges are glued in
// pairs by maps z -> a z + b, a > 0. A Surface is immutable once validated.

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dilaflow/geometry.hpp"

namespace dilaflow {

/// Edge `edge` of polygon `polygon` runs from vertex edge to vertex edge+1.
struct EdgeRef {
  int polygon{0};
  int edge{0};
  auto operator<=>(const EdgeRef&) const = default;
};

struct Corner {
  int polygon{0};
  int vertex{0};
  auto operator<=>(const Corner&) const = default;
};

struct Polygon {
  int id{0};
  std::vector<Vec2> vertices;  // counterclockwise

  int size() const { return static_cast<int>(vertices.size()); }
  Vec2 vertex(int i) const { return vertices[static_cast<std::size_t>(((i % size()) + size()) % size())]; }
  Vec2 edge_start(int e) const { return vertex(e); }
  Vec2 edge_end(int e) const { return vertex(e + 1); }
  Vec2 edge_vector(int e) const { return vertex(e + 1) - vertex(e); }
  double signed_area() const;
  double diameter() const;
  /// Winding-number test; points on the boundary may go either way.
  bool contains(Vec2 p) const;
};

/// Raw description of a surface before validation.
struct SurfaceSpec {
  std::vector<Polygon> polygons;
  std::vector<std::pair<EdgeRef, EdgeRef>> pairings;
  /// Corners whose vertex is declared a marked point even if it is regular.
  std::vector<Corner> marked_points;
};

/// Gluing of e onto f. The map sends the chart of e's polygon to the chart of
/// f's polygon, start(e) to end(f) and end(e) to start(f).
struct EdgePairing {
  EdgeRef e;
  EdgeRef f;
  double ratio{1};  // length(f) / length(e)
  AffineMap map;
};

enum class PointKind {
  Cone,             // interior, index != 1
  DilationPoint,    // interior, index 1, nontrivial dilation ratio
  MarkedPoint,      // interior, cone angle 2pi, trivial ratio, declared
  BoundaryCorner,   // boundary, cone angle != pi
  BoundaryMarked,   // boundary, angle pi, declared or auto-inserted
};

std::string to_string(PointKind kind);

/// Equivalence class of polygon corners under the gluing. Corners are listed
/// in walk order: corner k+1 is reached from corner k through k's outgoing edge.
struct VertexClass {
  std::vector<Corner> corners;
  /// Linear part of the chart change from corner k's polygon to corner 0's.
  std::vector<double> ratio_to_first;
  double cone_angle{0};
  bool on_boundary{false};
  /// Linear holonomy of a positive loop around an interior vertex; 1 on the boundary.
  double dilation_ratio{1};
  /// Topological index for interior vertices, 0 on the boundary.
  int index{0};
  /// Singularity id, or -1 when the vertex is a regular point of the surface.
  int singularity{-1};
};

struct Singularity {
  int id{0};
  int vertex_class{0};
  std::vector<Corner> corners;
  double cone_angle{0};
  std::optional<int> index;  // empty for boundary singularities
  double dilation_ratio{1};
  bool on_boundary{false};
  PointKind kind{PointKind::Cone};
};

struct ValidateOptions {
  /// Mark a point on a boundary component that has none instead of failing.
  bool auto_mark_boundary = true;
  bool allow_disconnected = false;
};

class Surface {
 public:
  static Surface validate(SurfaceSpec spec, ValidateOptions options = {});

  /// The validated input, with auto-inserted marked points appended.
  const SurfaceSpec& spec() const { return spec_; }

  int num_polygons() const { return static_cast<int>(spec_.polygons.size()); }
  const Polygon& polygon(int p) const { return spec_.polygons[static_cast<std::size_t>(p)]; }
  const std::vector<EdgePairing>& pairings() const { return pairings_; }
  const std::vector<Singularity>& singularities() const { return singularities_; }
  const std::vector<VertexClass>& vertex_classes() const { return classes_; }
  const std::vector<std::vector<EdgeRef>>& boundary_components() const { return boundary_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  int genus() const { return genus_; }
  int euler_characteristic() const { return euler_; }
  int num_components() const { return components_; }
  bool is_closed() const { return boundary_.empty(); }

  bool is_paired(EdgeRef e) const { return pair_index(e) >= 0; }
  std::optional<EdgeRef> partner(EdgeRef e) const;
  /// Chart change across e, from e's polygon to its partner's. Requires a paired edge.
  AffineMap transition(EdgeRef e) const;
  double ratio(EdgeRef e) const { return transition(e).a; }
  /// Index of the pairing containing e, or -1.
  int pair_index(EdgeRef e) const;
  /// The smaller of e and its partner; identifies the glued curve.
  EdgeRef canonical_edge(EdgeRef e) const;

  Vec2 edge_point(EdgeRef e, double s) const;
  int vertex_class_of(Corner c) const;
  /// Singularity id at the corner's vertex, or -1 if the vertex is regular.
  int singularity_at(Corner c) const { return classes_[static_cast<std::size_t>(vertex_class_of(c))].singularity; }
  int num_edges(int p) const { return polygon(p).size(); }

  double corner_angle(Corner c) const;
  /// Direction of the corner's outgoing edge; the sector opens counterclockwise from it.
  double corner_base_angle(Corner c) const;
  /// Relative angle of theta inside the corner's sector, in [0, 2pi).
  double corner_relative(Corner c, double theta) const;
  bool direction_in_corner(Corner c, double theta, double tol = 1e-12) const;

  double diameter(int p) const { return diameters_[static_cast<std::size_t>(p)]; }
  double max_diameter() const;

  /// Stable text identifying the surface geometry, used to derive report ids.
  std::string fingerprint() const;

 private:
  SurfaceSpec spec_;
  std::vector<EdgePairing> pairings_;
  std::vector<std::vector<int>> pair_of_edge_;  // pairing index * 2 + side, or -1
  std::vector<std::vector<int>> class_of_corner_;
  std::vector<std::vector<double>> corner_angles_;
  std::vector<VertexClass> classes_;
  std::vector<Singularity> singularities_;
  std::vector<std::vector<EdgeRef>> boundary_;
  std::vector<double> diameters_;
  std::vector<std::string> warnings_;
  int genus_{0};
  int euler_{0};
  int components_{1};
};

/// Composition of the transition maps along consecutive crossings. Each
/// crossing must be an edge of the polygon reached by the previous one.
AffineMap holonomy_of_path(const Surface& s, std::span<const EdgeRef> path);

/// Holonomies of edge-path loops that are contractible on the surface: the
/// back-and-forth loop across every pairing and the loop around every interior
/// vertex with cone angle 2pi and trivial ratio. All are the identity on a
/// consistent surface.
std::vector<AffineMap> contractible_loop_holonomies(const Surface& s);

}  // namespace dilaflow
