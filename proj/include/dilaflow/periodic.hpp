#pragma once

// Closed geodesics, hyperbolic cylinders and saddle connections.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dilaflow/return_map.hpp"
#include "dilaflow/trace.hpp"

namespace dilaflow {

struct SaddleConnection {
  int start_singularity{-1};
  int end_singularity{-1};
  Corner start_corner;
  Corner end_corner;
  std::vector<EdgeRef> signature;
  Direction direction;
  /// Length in the chart of the start corner.
  double chart_length{0};
};

/// Parallel closed geodesics with trivial holonomy on a return-map branch.
struct FlatFamily {
  EdgeRef section;
  double lo{0};
  double hi{0};
  std::vector<EdgeRef> signature;
  Direction direction;
};

struct GeodesicSearch {
  std::vector<ClosedGeodesic> hyperbolic;
  std::vector<FlatFamily> flat;
};

struct PeriodicConfig {
  TraceConfig trace{.max_crossings = 2000};
  int samples = 40;
};

/// Hyperbolic geodesics in direction d or d + pi, each oriented so that its
/// holonomy contracts, plus the flat families met on the way. Duplicate free
/// and sorted by key.
GeodesicSearch find_closed_geodesics(const Surface& s, Direction d, const PeriodicConfig& cfg = {});
std::vector<ClosedGeodesic> closed_geodesics_in_direction(const Surface& s, Direction d, const PeriodicConfig& cfg = {});

/// The same geodesic traversed backwards, with holonomy 1/lambda.
std::optional<ClosedGeodesic> reverse_geodesic(const Surface& s, const ClosedGeodesic& g);

/// Signature with crossings of edges touching a regular vertex removed. It is
/// unchanged while a geodesic sweeps across regular vertices.
std::vector<EdgeRef> reduced_signature(const Surface& s, const std::vector<EdgeRef>& signature);

/// Content key: canonical rotation of the signature (and the orientation).
std::string geodesic_key(const ClosedGeodesic& g);

struct Cylinder {
  ClosedGeodesic core;
  /// Open direction interval (lo, hi), unwrapped so that lo < core < hi.
  double lo{0};
  double hi{0};
  double angular_extent{0};
  std::vector<SaddleConnection> boundary;
  /// Continuation geodesics found while extending, ordered by direction.
  std::vector<ClosedGeodesic> samples;

  bool contains(double theta) const;
};

struct CylinderConfig {
  PeriodicConfig periodic;
  double initial_step = 1e-3;
  double max_step = 0.02;
  double angular_tol = 1e-9;
};

/// Largest direction interval around g on which a homotopic closed geodesic
/// persists. Throws NotHyperbolic for flat geodesics.
Cylinder extend_to_cylinder(const Surface& s, const ClosedGeodesic& g, const CylinderConfig& cfg = {});

struct NoLargeCylinderFound {
  int grid{0};
  int cylinders_examined{0};
  double largest_extent{0};
};

struct FoundCylinder {
  Cylinder cylinder;
};

using VeechVerdict = std::variant<NoLargeCylinderFound, FoundCylinder>;

/// Searches a direction grid for a hyperbolic cylinder of angle at least pi.
/// A negative answer only means none was found within the grid.
VeechVerdict veech_criterion(const Surface& s, int grid = 64, const CylinderConfig& cfg = {});

/// All cylinders met on the grid, extended and deduplicated.
std::vector<Cylinder> cylinders_on_grid(const Surface& s, int grid = 64, const CylinderConfig& cfg = {});

struct SaddleSearchConfig {
  int max_depth = 48;
  std::size_t max_nodes = 200000;
};

/// Saddle connections of start-chart length at most max_chart_length, each
/// verified by a trace, sorted by direction then length.
std::vector<SaddleConnection> enumerate_saddle_connections(const Surface& s, double max_chart_length,
                                                           const SaddleSearchConfig& cfg = {});

/// Trace check of a saddle connection; returns its crossing signature.
std::optional<SaddleConnection> verify_saddle_connection(const Surface& s, Corner start, Direction d,
                                                         double expected_length, double rel_tol = 1e-6);

std::string saddle_connection_key(const SaddleConnection& sc);

}  // namespace dilaflow
