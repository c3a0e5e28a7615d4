#include "dilaflow/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "dilaflow/errors.hpp"
#include "dilaflow/hash.hpp"
#include "dilaflow/horizon.hpp"
#include "sampling.hpp"

namespace dilaflow {

std::string to_string(DirectionKind kind) {
  switch (kind) {
    case DirectionKind::MorseSmale: return "morse_smale";
    case DirectionKind::SaddleConnectionDirection: return "saddle_connection";
    case DirectionKind::Unresolved: return "unresolved";
  }
  return "?";
}

std::string family_key(const Surface& s, const ClosedGeodesic& g) {
  std::string out;
  char buf[32];
  for (const EdgeRef& e : canonical_rotation(reduced_signature(s, g.signature))) {
    std::snprintf(buf, sizeof buf, "%s%d:%d", out.empty() ? "" : ",", e.polygon, e.edge);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "|%.6f", g.holonomy);
  return out + buf;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

DirectionClass classify_direction(const Surface& s, double theta, const SweepConfig& cfg) {
  DirectionClass dc;
  dc.theta = normalize_angle(theta);
  std::map<std::string, ClosedGeodesic> cycles;
  auto note_cycle = [&](const TraceResult& r) {
    if (r.outcome.kind == OutcomeKind::LimitCycle && r.outcome.cycle)
      cycles.emplace(geodesic_key(*r.outcome.cycle), *r.outcome.cycle);
  };

  // Separatrices in d and d + pi, each from the corner whose sector holds it.
  for (double dir : {dc.theta, dc.theta + kPi}) {
    dir = normalize_angle(dir);
    // Separatrices running along an edge between two singular vertices.
    for (int p = 0; p < s.num_polygons(); ++p)
      for (int e = 0; e < s.num_edges(p); ++e) {
        if (std::abs(angle_difference(angle_of(s.polygon(p).edge_vector(e)), dir)) > 1e-12) continue;
        const Corner a{p, e}, b{p, (e + 1) % s.num_edges(p)};
        if (s.singularity_at(a) < 0 || s.singularity_at(b) < 0) continue;
        ++dc.separatrices;
        ++dc.saddle_hits;
        if (!dc.connection) dc.connection = edge_connection(s, {p, e});
      }
    for (const Singularity& sing : s.singularities()) {
      for (const Corner& c : sing.corners) {
        if (!s.direction_in_corner(c, dir)) continue;
        const TraceResult r = trace_from_corner(s, c, Direction(dir), cfg.trace);
        ++dc.separatrices;
        switch (r.outcome.kind) {
          case OutcomeKind::HitSingularity: {
            ++dc.saddle_hits;
            if (!dc.connection && r.path_length > 0) {
              SaddleConnection sc;
              sc.start_singularity = sing.id;
              sc.end_singularity = r.outcome.singularity;
              sc.start_corner = c;
              sc.end_corner = r.outcome.corner;
              for (const auto& rec : r.crossings) sc.signature.push_back(signature_step(rec));
              sc.direction = Direction(dir);
              sc.chart_length = r.path_length;
              dc.connection = std::move(sc);
            }
            break;
          }
          case OutcomeKind::CrossedBoundary: ++dc.boundary_exits; break;
          case OutcomeKind::LimitCycle:
            ++dc.limit_cycles;
            note_cycle(r);
            break;
          case OutcomeKind::BudgetExhausted: ++dc.budget_exhausted; break;
        }
      }
    }
  }

  // Guard probes. Their starts depend only on the line through d, so d and
  // d + pi are probed identically.
  const double line = std::fmod(dc.theta, kPi);
  std::mt19937_64 rng(detail::item_seed(cfg.seed, static_cast<std::uint64_t>(std::llround(line * 1e12))));
  for (int k = 0; k < cfg.probes; ++k) {
    const int p = static_cast<int>(rng() % static_cast<std::uint64_t>(s.num_polygons()));
    const Vec2 x = detail::random_interior_point(s.polygon(p), rng);
    const double dir = normalize_angle(line + (k % 2 == 0 ? 0.0 : kPi));
    TraceResult r;
    try {
      r = trace(s, {p, x}, Direction(dir), cfg.trace);
    } catch (const Error&) {
      continue;
    }
    ++dc.probes;
    if (r.outcome.kind == OutcomeKind::BudgetExhausted) ++dc.probe_failures;
    note_cycle(r);
  }

  for (auto& [key, g] : cycles) dc.geodesics.push_back(std::move(g));
  if (dc.connection)
    dc.kind = DirectionKind::SaddleConnectionDirection;
  else if (dc.budget_exhausted > 0 || dc.probe_failures > 0)
    dc.kind = DirectionKind::Unresolved;
  else
    dc.kind = DirectionKind::MorseSmale;
  return dc;
}

int SweepReport::count(DirectionKind kind) const {
  int n = 0;
  for (const auto& c : classes) n += c.kind == kind;
  return n;
}

double SweepReport::morse_smale_fraction() const {
  return classes.empty() ? 0.0 : static_cast<double>(count(DirectionKind::MorseSmale)) / static_cast<double>(classes.size());
}

int SweepReport::hyperbolic_bins() const {
  int n = 0;
  for (const auto& b : bins) n += b.hyperbolic > 0;
  return n;
}

int SweepReport::hyperbolic_geodesics() const {
  int n = 0;
  for (const auto& c : classes) n += static_cast<int>(c.geodesics.size());
  for (const auto& c : refined) n += static_cast<int>(c.geodesics.size());
  return n;
}

SweepReport sweep(const Surface& s, int n, const SweepConfig& cfg) {
  if (n < 1) throw Error(ErrorCode::ParamOutOfRange, "sweep needs at least one direction");
  SweepReport rep;
  rep.surface_id = content_id(s.fingerprint());
  rep.budget = cfg.trace.max_crossings;
  rep.seed = cfg.seed;
  for (int k = 0; k < n; ++k) rep.grid.push_back(kTwoPi * k / n);
  rep.classes.resize(static_cast<std::size_t>(n));
  parallel_for(n, cfg.threads, [&](int k) {
    rep.classes[static_cast<std::size_t>(k)] = classify_direction(s, rep.grid[static_cast<std::size_t>(k)], cfg);
  });

  if (cfg.refine && n > 1) {
    std::vector<double> mids;
    for (int k = 0; k < n; ++k) {
      const int j = (k + 1) % n;
      if (rep.classes[static_cast<std::size_t>(k)].kind != rep.classes[static_cast<std::size_t>(j)].kind)
        mids.push_back(rep.grid[static_cast<std::size_t>(k)] + 0.5 * kTwoPi / n);
    }
    rep.refined.resize(mids.size());
    parallel_for(static_cast<int>(mids.size()), cfg.threads, [&](int i) {
      rep.refined[static_cast<std::size_t>(i)] = classify_direction(s, mids[static_cast<std::size_t>(i)], cfg);
    });
  }

  // Runs of consecutive grid directions carrying the same family.
  std::vector<std::set<std::string>> keys(static_cast<std::size_t>(n));
  std::set<std::string> all_keys;
  for (int k = 0; k < n; ++k)
    for (const auto& g : rep.classes[static_cast<std::size_t>(k)].geodesics) {
      keys[static_cast<std::size_t>(k)].insert(family_key(s, g));
      all_keys.insert(family_key(s, g));
    }
  for (const std::string& key : all_keys) {
    auto has = [&](int k) { return keys[static_cast<std::size_t>(((k % n) + n) % n)].count(key) > 0; };
    if (std::all_of(rep.grid.begin(), rep.grid.end(), [&, k = 0](double) mutable { return has(k++); })) {
      rep.intervals.push_back({0.0, kTwoPi, key, n});
      continue;
    }
    for (int k = 0; k < n; ++k) {
      if (!has(k) || has(k - 1)) continue;
      int len = 1;
      while (has(k + len)) ++len;
      rep.intervals.push_back({rep.grid[static_cast<std::size_t>(k)], rep.grid[static_cast<std::size_t>(k)] + kTwoPi * (len - 1) / n, key, len});
    }
  }
  std::sort(rep.intervals.begin(), rep.intervals.end(), [](const HyperbolicInterval& a, const HyperbolicInterval& b) {
    return a.lo != b.lo ? a.lo < b.lo : a.key < b.key;
  });

  const int nb = std::max(1, cfg.bins);
  for (int b = 0; b < nb; ++b) rep.bins.push_back({kTwoPi * b / nb, kTwoPi * (b + 1) / nb, 0, 0, 0, 0, 0});
  auto tally = [&](const DirectionClass& c) {
    const int b = std::min(nb - 1, static_cast<int>(c.theta / kTwoPi * nb));
    DensityBin& bin = rep.bins[static_cast<std::size_t>(b)];
    ++bin.directions;
    bin.morse_smale += c.kind == DirectionKind::MorseSmale;
    bin.saddle += c.kind == DirectionKind::SaddleConnectionDirection;
    bin.unresolved += c.kind == DirectionKind::Unresolved;
    bin.hyperbolic += c.has_hyperbolic();
  };
  for (const auto& c : rep.classes) tally(c);
  for (const auto& c : rep.refined) tally(c);
  return rep;
}

}  // namespace dilaflow
