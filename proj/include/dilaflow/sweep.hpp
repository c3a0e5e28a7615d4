#pragma once

// Direction classification by separatrix tracing, and sweeps over the circle.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dilaflow/periodic.hpp"

namespace dilaflow {

enum class DirectionKind { MorseSmale, SaddleConnectionDirection, Unresolved };

std::string to_string(DirectionKind kind);

struct SweepConfig {
  // Bounded by crossings only: start chart lengths blow up along contracting cycles.
  TraceConfig trace{.max_crossings = 2000, .max_path_length = std::numeric_limits<double>::infinity()};
  /// Random interior probes guarding a Morse-Smale verdict, split between d and d + pi.
  int probes = 16;
  std::uint64_t seed = 1;
  int bins = 100;
  bool refine = true;
  /// Worker threads; 0 uses the hardware concurrency.
  int threads = 0;
};

struct DirectionClass {
  double theta{0};
  DirectionKind kind{DirectionKind::Unresolved};
  /// Limit cycles met by separatrices and probes in d or d + pi, by key.
  std::vector<ClosedGeodesic> geodesics;
  std::optional<SaddleConnection> connection;
  int separatrices{0};
  int limit_cycles{0};
  int boundary_exits{0};
  int saddle_hits{0};
  int budget_exhausted{0};
  int probes{0};
  int probe_failures{0};

  bool has_hyperbolic() const { return !geodesics.empty(); }
};

/// Traces every separatrix in d and d + pi. Any separatrix ending on a
/// singularity makes d a saddle connection direction; otherwise any budget
/// exhaustion leaves it unresolved; otherwise it is Morse-Smale, provided the
/// guard probes all resolve too.
DirectionClass classify_direction(const Surface& s, double theta, const SweepConfig& cfg = {});

struct HyperbolicInterval {
  double lo{0};
  double hi{0};
  /// Reduced signature key shared by the continuations.
  std::string key;
  int directions{0};
};

struct DensityBin {
  double lo{0};
  double hi{0};
  int directions{0};
  int morse_smale{0};
  int saddle{0};
  int unresolved{0};
  int hyperbolic{0};
};

struct SweepReport {
  std::string surface_id;
  std::vector<double> grid;
  std::vector<DirectionClass> classes;
  /// Midpoints classified where neighbours on the grid disagree.
  std::vector<DirectionClass> refined;
  std::vector<HyperbolicInterval> intervals;
  std::vector<DensityBin> bins;
  int budget{0};
  std::uint64_t seed{0};

  int count(DirectionKind kind) const;
  double morse_smale_fraction() const;
  int hyperbolic_bins() const;
  int hyperbolic_geodesics() const;
};

/// Classifies the grid k 2pi / n, refines once between disagreeing
/// neighbours, and aggregates. Output does not depend on the thread count.
SweepReport sweep(const Surface& s, int n_directions, const SweepConfig& cfg = {});

/// Key of a geodesic up to the crossings that come and go at regular vertices.
std::string family_key(const Surface& s, const ClosedGeodesic& g);

/// Runs body(i) for i in [0, n) on a pool of threads.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace dilaflow
