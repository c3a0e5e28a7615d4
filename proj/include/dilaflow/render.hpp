#pragma once

// SVG pictures of polygon nets with trajectories drawn on top.

#include <string>
#include <vector>

#include "dilaflow/periodic.hpp"
#include "dilaflow/sweep.hpp"

namespace dilaflow {

enum class OverlayKind { Trace, Geodesic, SaddleConnection, Cylinder };

struct Overlay {
  OverlayKind kind{OverlayKind::Trace};
  std::vector<PathPiece> path;
  std::string label;
};

struct RenderSpec {
  const Surface* surface{nullptr};
  std::vector<Overlay> overlays;
  double width = 900;
  double margin = 24;
  double gap = 0.15;  // between polygons, relative to the largest diameter
  double stroke = 1.2;
  bool pairing_labels = true;
};

/// Overlays built from the flow; each records the path itself.
Overlay trace_overlay(const Surface& s, FlowPoint start, Direction d, const TraceConfig& cfg = {});
Overlay geodesic_overlay(const Surface& s, const ClosedGeodesic& g);
Overlay connection_overlay(const Surface& s, const SaddleConnection& sc);
/// The continuation geodesics of the cylinder, drawn thin and translucent.
Overlay cylinder_overlay(const Surface& s, const Cylinder& c);

std::string render_svg(const RenderSpec& spec);

/// Strip of grid classifications above a histogram of hyperbolic bins.
std::string render_sweep_strip(const SweepReport& r, double width = 900);

/// Hex colour for an accumulated ratio: blue when expanding, red when contracting.
std::string ratio_color(double accumulated_ratio);

}  // namespace dilaflow
