#include "dilaflow/return_map.hpp"

#include <algorithm>
#include <cmath>

#include "dilaflow/errors.hpp"

namespace dilaflow {

std::vector<EdgeRef> canonical_rotation(const std::vector<EdgeRef>& cycle) {
  const std::size_t n = cycle.size();
  std::size_t best = 0;
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      const EdgeRef a = cycle[(r + k) % n], b = cycle[(best + k) % n];
      if (a == b) continue;
      if (a < b) best = r;
      break;
    }
  }
  std::vector<EdgeRef> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(cycle[(best + k) % n]);
  return out;
}

const Branch* PiecewiseAffineMap::branch_at(double x) const {
  for (const Branch& b : branches)
    if (x > b.lo && x < b.hi) return &b;
  return nullptr;
}

std::optional<double> PiecewiseAffineMap::operator()(double x) const {
  if (const Branch* b = branch_at(x)) return (*b)(x);
  return std::nullopt;
}

EdgeRef crossing_edge(const Surface& s, EdgeRef section, Direction d) {
  const Vec2 w = s.polygon(section.polygon).edge_vector(section.edge);
  const double o = cross(w, d.unit());
  if (std::abs(o) <= 1e-12 * norm(w))
    throw Error(ErrorCode::SectionParallelToDirection, "direction is parallel to the section edge");
  if (o < 0) return section;
  const auto f = s.partner(section);
  return f ? *f : section;
}

ReturnProbe first_return(const Surface& s, EdgeRef section, double x, Direction d, const TraceConfig& cfg) {
  ReturnProbe probe;
  const EdgeRef exit_edge = crossing_edge(s, section, d);
  const bool exits = exit_edge == section;
  if (!s.is_paired(section)) {
    probe.kind = ReturnKind::Boundary;
    probe.boundary_edge = section;
    return probe;
  }
  FlowStepper st(s, d, cfg.eps_hit);
  st.start_after_crossing(exit_edge, exits ? x : 1 - x);
  std::vector<CrossingRecord> history;
  double length = 0;
  int retry_after = 0;
  while (static_cast<int>(history.size()) < cfg.max_crossings) {
    const double r0 = st.accumulated_ratio();
    const auto ev = st.step();
    length += st.last_length() / r0;
    if (ev == FlowStepper::Event::HitSingularity) {
      probe.kind = ReturnKind::Singular;
      return probe;
    }
    if (ev == FlowStepper::Event::CrossedBoundary) {
      probe.kind = ReturnKind::Boundary;
      probe.boundary_edge = st.boundary_edge();
      return probe;
    }
    const CrossingRecord& rec = st.last_record();
    probe.steps.push_back(signature_step(rec));
    if (!rec.through_vertex && rec.edge == exit_edge) {
      probe.kind = ReturnKind::Return;
      probe.image = exits ? rec.coord : 1 - rec.coord;
      probe.slope = rec.accumulated_ratio;
      return probe;
    }
    history.push_back(rec);
    if (length > cfg.max_path_length) break;
    if (cfg.detect_cycles && static_cast<int>(history.size()) >= retry_after) {
      if (auto g = detect_limit_cycle(history, cfg)) {
        g->direction = d;
        if (verify_closed_geodesic(s, *g)) {
          probe.kind = ReturnKind::Trapped;
          probe.cycle = canonical_rotation(g->signature);
          probe.steps.clear();
          return probe;
        }
        retry_after = static_cast<int>(history.size() + g->signature.size());
      }
    }
  }
  probe.kind = ReturnKind::Budget;
  probe.steps.clear();
  return probe;
}

namespace {

bool same_piece(const ReturnProbe& a, const ReturnProbe& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ReturnKind::Return: return a.steps == b.steps;
    case ReturnKind::Singular: return false;
    case ReturnKind::Boundary: return a.boundary_edge == b.boundary_edge;
    case ReturnKind::Trapped: return a.cycle == b.cycle;
    case ReturnKind::Budget: return true;
  }
  return false;
}

struct Sampler {
  const Surface& s;
  EdgeRef section;
  Direction d;
  const TraceConfig& cfg;
  double tol;
  std::vector<std::pair<double, ReturnProbe>> points;

  std::size_t budget = 20000;

  ReturnProbe probe(double x) {
    if (budget > 0) --budget;
    return first_return(s, section, x, d, cfg);
  }

  // Appends the probes strictly between a and b, in order. Two singular
  // probes side by side are a vertex graze zone and are not refined.
  void resolve(double a, const ReturnProbe& pa, double b, const ReturnProbe& pb) {
    if (same_piece(pa, pb) || b - a <= tol || budget == 0) return;
    if (pa.kind == ReturnKind::Singular && pb.kind == ReturnKind::Singular) return;
    const double m = 0.5 * (a + b);
    ReturnProbe pm = probe(m);
    resolve(a, pa, m, pm);
    points.emplace_back(m, pm);
    resolve(m, pm, b, pb);
  }
};

}  // namespace

PiecewiseAffineMap return_map_on_edge(const Surface& s, EdgeRef section, Direction d, const TraceConfig& cfg,
                                      int samples, double tol) {
  PiecewiseAffineMap map;
  map.section = section;
  map.direction = d;
  const EdgeRef exit_edge = crossing_edge(s, section, d);
  map.exits_through_section = exit_edge == section;
  if (!s.is_paired(section)) {
    map.gaps.push_back({0, 1, "boundary"});
    return map;
  }

  Sampler sm{s, section, d, cfg, tol, {}, 20000};
  ReturnProbe left;
  left.kind = ReturnKind::Singular;
  ReturnProbe prev = left;
  double prev_x = 0;
  sm.points.emplace_back(0.0, left);
  for (int k = 0; k < samples; ++k) {
    const double x = (k + 0.5) / samples;
    ReturnProbe p = sm.probe(x);
    sm.resolve(prev_x, prev, x, p);
    sm.points.emplace_back(x, p);
    prev = p;
    prev_x = x;
  }
  ReturnProbe right;
  right.kind = ReturnKind::Singular;
  sm.resolve(prev_x, prev, 1.0, right);
  sm.points.emplace_back(1.0, right);

  const auto& pts = sm.points;
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    // Singular probes flanked by one piece are vertex grazes inside it.
    for (;;) {
      std::size_t k = j + 1;
      while (k < pts.size() && pts[k].second.kind == ReturnKind::Singular && pts[i].second.kind != ReturnKind::Singular) ++k;
      if (k < pts.size() && same_piece(pts[i].second, pts[k].second)) j = k;
      else break;
    }
    const ReturnProbe& p = pts[i].second;
    if (p.kind != ReturnKind::Singular) {
      const double lo = i == 0 ? 0.0 : 0.5 * (pts[i - 1].first + pts[i].first);
      const double hi = j + 1 == pts.size() ? 1.0 : 0.5 * (pts[j].first + pts[j + 1].first);
      if (p.kind == ReturnKind::Return) {
        // Representative: the returning probe nearest the middle of the domain.
        std::size_t r = i;
        for (std::size_t k = i; k <= j; ++k)
          if (pts[k].second.kind == ReturnKind::Return &&
              std::abs(pts[k].first - 0.5 * (lo + hi)) < std::abs(pts[r].first - 0.5 * (lo + hi)))
            r = k;
        const auto& rep = pts[r];
        Branch b;
        b.lo = lo;
        b.hi = hi;
        b.slope = rep.second.slope;
        b.offset = rep.second.image - b.slope * rep.first;
        b.signature = p.steps;
        map.branches.push_back(std::move(b));
      } else {
        const char* reason = p.kind == ReturnKind::Boundary ? "boundary" : p.kind == ReturnKind::Trapped ? "trapped" : "budget";
        if (!map.gaps.empty() && map.gaps.back().reason == reason && std::abs(map.gaps.back().hi - lo) <= tol)
          map.gaps.back().hi = hi;
        else
          map.gaps.push_back({lo, hi, reason});
      }
    }
    i = j + 1;
  }
  return map;
}

}  // namespace dilaflow
