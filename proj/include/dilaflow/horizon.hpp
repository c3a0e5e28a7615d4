#pragma once

// Horizon saddle connections: cutting, disconnection, crossing counts and
// pencils that avoid a connection.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dilaflow/periodic.hpp"

namespace dilaflow {

/// The surface cut open along sc. Both sides of the cut become boundary and
/// the endpoints stay marked. The result may be disconnected.
Surface cut_along(const Surface& s, const SaddleConnection& sc);

struct Disconnection {
  bool disconnecting{false};
  int components{1};
};

Disconnection is_disconnecting(const Surface& s, const SaddleConnection& sc);

/// Where a trajectory meets the connection: a point of a polygon chart, and
/// the crossed edge when the connection runs along an edge.
struct ConnectionHit {
  FlowPoint point;
  std::optional<EdgeRef> edge;
  double coord{0};
};

/// The connection laid out in the polygons it visits, for counting crossings.
class ConnectionGeometry {
 public:
  ConnectionGeometry(const Surface& s, const SaddleConnection& sc);

  /// Crossings made by the segment the stepper just traversed. The first
  /// segment of a trace started on the connection ignores its start point.
  int count_step(const FlowStepper& st, FlowStepper::Event ev, bool first, ConnectionHit* last_hit = nullptr) const;

  const std::vector<EdgeRef>& along_edges() const { return along_; }

 private:
  const Surface* s_;
  std::vector<EdgeRef> along_;  // canonical edges the connection runs along
  std::vector<std::vector<std::pair<Vec2, Vec2>>> chords_;  // per polygon
};

struct HorizonConfig {
  TraceConfig trace{.max_crossings = 10000};
  int starts_per_polygon = 2;
  bool separatrices = true;
  /// Count traces in d + pi as well as in d, as in the definition of k(d).
  bool both_orientations = true;
  std::uint64_t seed = 1;
  double openness_delta = 1e-5;
};

struct DirectionBound {
  double theta{0};
  int k_lower{0};
  int traces{0};
};

struct OpennessCheck {
  double theta{0};
  int r{0};
  bool plus{false};
  bool minus{false};
};

struct CrossingBoundEstimate {
  std::string saddle_connection;
  std::vector<DirectionBound> per_direction;
  int global_max{0};
  int traces{0};
  int budget{0};
  /// Traces ending on a limit cycle that crosses the connection.
  int cycles_crossing{0};
  /// Traces that hit the budget while still crossing the connection.
  int open_ended{0};
  std::vector<OpennessCheck> openness;
  bool openness_passed{true};
  /// Bound certified by disconnection, when available.
  std::optional<int> certified;
};

/// Lower bounds on k(d): for every direction of the grid, the maximum number
/// of crossings with sc over traces in d and d + pi.
CrossingBoundEstimate empirical_crossing_bound(const Surface& s, const SaddleConnection& sc,
                                               const std::vector<double>& grid, const HorizonConfig& cfg = {});

struct Pencil {
  ConnectionHit apex;
  double lo{0};
  double hi{0};
  /// Crossings of the trace whose last crossing is the apex.
  int k{0};
  std::vector<TraceResult> witnesses;
  /// Forward crossings of each witness after leaving the apex.
  std::vector<int> witness_crossings;
  std::string note;
};

/// Pencil of trajectories with directions in (lo, hi) that never crosses sc.
/// Throws UnboundedCrossings when the maximal count keeps growing with the
/// budget.
Pencil max_crossing_pencil(const Surface& s, const SaddleConnection& sc, double lo, double hi,
                           const HorizonConfig& cfg = {}, int directions = 32, int witnesses = 16);

/// The saddle connection running along an edge, from its start vertex.
SaddleConnection edge_connection(const Surface& s, EdgeRef e);

}  // namespace dilaflow
