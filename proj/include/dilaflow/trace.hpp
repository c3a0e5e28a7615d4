#pragma once

// Straight-line flow across edge identifications.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dilaflow/surface.hpp"

namespace dilaflow {

struct FlowPoint {
  int polygon{0};
  Vec2 position;
};

struct TraceConfig {
  int max_crossings = 10000;
  /// Total length measured in the start chart: each segment is divided by the
  /// accumulated ratio before summing.
  double max_path_length = 1e6;
  /// Vertex proximity counted as a hit, relative to polygon diameter.
  double eps_hit = 1e-9;
  int cycle_confirmations = 3;
  int max_period = 128;
  bool detect_cycles = true;
  /// Keep the polyline pieces of the trajectory (for rendering).
  bool record_path = false;
};

/// One event of the crossing history. A pass through a regular vertex is
/// recorded with through_vertex set; edge then names the outgoing edge of the
/// corner the trajectory continues into and coord is 0.
struct CrossingRecord {
  EdgeRef edge;
  double coord{0};
  double accumulated_ratio{1};
  bool through_vertex{false};
};

/// Step identifier used in signatures: the crossed edge, or for a vertex pass
/// the corner entered, encoded as edge = -(vertex + 1).
EdgeRef signature_step(const CrossingRecord& r);
bool is_vertex_step(EdgeRef step);

struct ClosedGeodesic {
  /// Cyclic crossing sequence starting with the crossing at the base point.
  std::vector<EdgeRef> signature;
  Direction direction;
  /// Linear part of the return map, lambda <= 1 for hyperbolic geodesics.
  double holonomy{1};
  /// base.edge = signature[0]; base.coord is the fixed point on it.
  CrossingRecord base;
  bool is_hyperbolic{false};
};

enum class OutcomeKind { HitSingularity, CrossedBoundary, LimitCycle, BudgetExhausted };

std::string to_string(OutcomeKind kind);

struct TraceOutcome {
  OutcomeKind kind{OutcomeKind::BudgetExhausted};
  int singularity{-1};
  Corner corner;  // corner reached, for HitSingularity
  EdgeRef boundary_edge;
  double boundary_coord{0};
  std::optional<ClosedGeodesic> cycle;
  std::string budget_reason;
};

struct PathPiece {
  int polygon{0};
  Vec2 from;
  Vec2 to;
  double accumulated_ratio{1};
};

struct TraceResult {
  FlowPoint start;
  Direction direction;
  std::vector<CrossingRecord> crossings;
  TraceOutcome outcome;
  FlowPoint end;
  double path_length{0};
  std::vector<PathPiece> path;
};

/// Low-level flow state. The position always lies in the closure of the
/// current polygon; accumulated_ratio converts start-chart lengths to current
/// chart lengths.
class FlowStepper {
 public:
  enum class Event { Crossed, PassedVertex, HitSingularity, CrossedBoundary };

  FlowStepper(const Surface& s, Direction d, double eps_hit = 1e-9);

  /// Places the flow at an arbitrary point. Throws InvalidStart when the point
  /// is outside its polygon, or when it is a singular vertex whose corners
  /// do not admit the direction.
  void start_at(FlowPoint p);
  /// Launches from a vertex corner. The direction must lie in the half-open
  /// sector [0, angle) of some corner of the vertex; another corner of the same
  /// vertex is used if needed.
  void start_at_corner(Corner c);
  /// Starts just after crossing `e` at coordinate s: in the partner polygon at
  /// coordinate 1 - s of the partner edge.
  void start_after_crossing(EdgeRef e, double s);
  /// Starts on edge e at coordinate s, in e's own polygon.
  void start_on_edge(EdgeRef e, double s);

  Event step();

  const Surface& surface() const { return *s_; }
  Direction direction() const { return d_; }
  int polygon() const { return poly_; }
  Vec2 position() const { return pos_; }
  double accumulated_ratio() const { return ratio_; }
  /// Last recorded crossing or vertex pass.
  const CrossingRecord& last_record() const { return last_; }
  /// The segment traversed by the last step, in the chart of its polygon.
  const PathPiece& last_piece() const { return piece_; }
  double last_length() const { return piece_len_; }
  int hit_singularity() const { return hit_sing_; }
  Corner hit_corner() const { return hit_corner_; }
  EdgeRef boundary_edge() const { return boundary_edge_; }
  double boundary_coord() const { return boundary_coord_; }
  /// Vertex of the current polygon the flow sits at, or -1.
  int at_vertex() const { return skip_vertex_; }

 private:
  bool enter_vertex(Corner c, Event& event);

  const Surface* s_;
  Direction d_;
  Vec2 u_;
  double eps_hit_;
  int poly_{0};
  Vec2 pos_;
  double ratio_{1};
  int skip_vertex_{-1};
  // Edge the flow sits on and must not exit through at t = 0, or -1.
  int entry_edge_{-1};
  CrossingRecord last_;
  PathPiece piece_;
  double piece_len_{0};
  int hit_sing_{-1};
  Corner hit_corner_;
  EdgeRef boundary_edge_;
  double boundary_coord_{0};
};

using StepObserver = std::function<void(const FlowStepper&, FlowStepper::Event)>;

/// Runs a prepared stepper to its outcome, calling observe after every step.
TraceResult run_stepper(FlowStepper& st, const TraceConfig& cfg, const StepObserver& observe = {});

TraceResult trace(const Surface& s, FlowPoint start, Direction d, const TraceConfig& cfg = {});

/// Separatrix launch from a vertex corner (see FlowStepper::start_at_corner).
TraceResult trace_from_corner(const Surface& s, Corner c, Direction d, const TraceConfig& cfg = {});

/// Trace starting after a crossing of e at coordinate x.
TraceResult trace_after_crossing(const Surface& s, EdgeRef e, double x, Direction d, const TraceConfig& cfg = {});

/// Looks for a contracting periodic tail in the history. The geodesic returned
/// is not verified against the surface.
std::optional<ClosedGeodesic> detect_limit_cycle(std::span<const CrossingRecord> history, const TraceConfig& cfg = {});

/// Checks a candidate by tracing one period from its base point.
bool verify_closed_geodesic(const Surface& s, const ClosedGeodesic& g, double tol = 1e-9);

}  // namespace dilaflow
