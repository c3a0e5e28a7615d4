#pragma once

#include "dilaflow/surface.hpp"

namespace dilaflow {

/// Unit square with opposite sides glued by translations. The single vertex
/// is declared a marked point so that saddle connections exist.
Surface build_torus();

/// Annular sector of angle alpha between radii rho and 1, its outer chord
/// glued to its inner chord by z -> rho z. Sectors of angle pi or more are
/// cut into wedges glued along radial edges.
Surface build_dilation_cylinder(double rho, double alpha);

struct TwoChamberParams {
  /// Gluing ratios of the two side pairs in each chamber.
  double chamber1_ratio_a = 2.0;
  double chamber1_ratio_b = 0.5;
  double chamber2_ratio_a = 1.5;
  double chamber2_ratio_b = 2.0 / 3.0;
};

/// Two one-holed tori joined along a single saddle connection (the edge
/// returned by two_chamber_separator). Closed, genus 2, one cone point of
/// angle 6pi.
Surface build_two_chamber(const TwoChamberParams& params = {});

/// Edge of polygon 0 that carries the separating saddle connection.
EdgeRef two_chamber_separator();

}  // namespace dilaflow
