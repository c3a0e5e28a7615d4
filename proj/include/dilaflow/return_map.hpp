#pragma once

// First-return maps of the directional flow to a glued edge: affine interval
// exchange maps, up to gaps where the flow escapes or is trapped elsewhere.

#include <optional>
#include <string>
#include <vector>

#include "dilaflow/trace.hpp"

namespace dilaflow {

enum class ReturnKind { Return, Singular, Boundary, Trapped, Budget };

/// First return of one point. Coordinates are on the section edge.
struct ReturnProbe {
  ReturnKind kind{ReturnKind::Budget};
  double image{0};
  double slope{1};
  /// Steps after leaving the section, ending with the return crossing.
  std::vector<EdgeRef> steps;
  EdgeRef boundary_edge;
  std::vector<EdgeRef> cycle;  // canonical rotation, for Trapped
};

struct Branch {
  double lo{0};
  double hi{0};
  double slope{1};
  double offset{0};
  std::vector<EdgeRef> signature;

  double operator()(double x) const { return slope * x + offset; }
};

struct Gap {
  double lo{0};
  double hi{0};
  std::string reason;  // "boundary", "trapped", "budget"
};

struct PiecewiseAffineMap {
  EdgeRef section;
  Direction direction;
  /// True when the flow leaves the section's own polygon through it; false
  /// when it crosses from the partner side.
  bool exits_through_section{true};
  std::vector<Branch> branches;
  std::vector<Gap> gaps;

  const Branch* branch_at(double x) const;
  std::optional<double> operator()(double x) const;
};

/// The edge the flow exits through when crossing the section's glued curve.
EdgeRef crossing_edge(const Surface& s, EdgeRef section, Direction d);

ReturnProbe first_return(const Surface& s, EdgeRef section, double x, Direction d, const TraceConfig& cfg = {});

/// Throws SectionParallelToDirection when d is parallel to the section.
PiecewiseAffineMap return_map_on_edge(const Surface& s, EdgeRef section, Direction d, const TraceConfig& cfg = {},
                                      int samples = 40, double tol = 1e-12);

/// Rotation of a cyclic step list starting at its smallest element.
std::vector<EdgeRef> canonical_rotation(const std::vector<EdgeRef>& cycle);

}  // namespace dilaflow
