#include "dilaflow/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "dilaflow/errors.hpp"
#include "sampling.hpp"

namespace dilaflow {

namespace {

TraceResult connection_path(const Surface& s, const SaddleConnection& sc) {
  TraceConfig tc;
  tc.detect_cycles = false;
  tc.record_path = true;
  tc.max_crossings = 100000;
  tc.max_path_length = sc.chart_length * (1 + 1e-6) + 1e-12;
  TraceResult r;
  try {
    r = trace_from_corner(s, sc.start_corner, sc.direction, tc);
  } catch (const Error& e) {
    throw Error(ErrorCode::NotASaddleConnection, e.what());
  }
  if (r.outcome.kind != OutcomeKind::HitSingularity ||
      std::abs(r.path_length - sc.chart_length) > 1e-6 * std::max(1.0, sc.chart_length))
    throw Error(ErrorCode::NotASaddleConnection, "trace from the start corner does not end on a singularity at the given length");
  return r;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b, double* param = nullptr) {
  const Vec2 w = b - a;
  const double t = std::clamp(dot(p - a, w) / dot(w, w), 0.0, 1.0);
  if (param) *param = t;
  return distance(a + t * w, p);
}

// Edge of poly that contains the whole segment, or -1.
int edge_along(const Polygon& poly, Vec2 a, Vec2 b, double tol) {
  for (int i = 0; i < poly.size(); ++i)
    if (segment_distance(a, poly.edge_start(i), poly.edge_end(i)) <= tol &&
        segment_distance(b, poly.edge_start(i), poly.edge_end(i)) <= tol)
      return i;
  return -1;
}

struct WorkPoly {
  int origin{0};
  std::vector<Vec2> v;
  std::vector<int> tag;  // edge i -> glue group, -1 for boundary
};

int find_vertex(const WorkPoly& w, Vec2 p, double tol) {
  for (std::size_t i = 0; i < w.v.size(); ++i)
    if (distance(w.v[i], p) <= tol) return static_cast<int>(i);
  return -1;
}

}  // namespace

Surface cut_along(const Surface& s, const SaddleConnection& sc) {
  const TraceResult path = connection_path(s, sc);
  const int np = s.num_polygons();
  auto tol_of = [&](int p) { return 1e-10 * s.diameter(p); };

  // Split coordinates per edge, mirrored onto partners.
  std::vector<std::vector<std::vector<double>>> splits(static_cast<std::size_t>(np));
  for (int p = 0; p < np; ++p) splits[static_cast<std::size_t>(p)].resize(static_cast<std::size_t>(s.num_edges(p)));
  auto add_split = [&](EdgeRef e, double t) {
    splits[static_cast<std::size_t>(e.polygon)][static_cast<std::size_t>(e.edge)].push_back(t);
    if (auto f = s.partner(e)) splits[static_cast<std::size_t>(f->polygon)][static_cast<std::size_t>(f->edge)].push_back(1 - t);
  };
  auto locate = [&](int p, Vec2 q) {
    const Polygon& poly = s.polygon(p);
    const double tol = tol_of(p);
    for (int i = 0; i < poly.size(); ++i)
      if (distance(poly.vertex(i), q) <= tol) return;
    for (int i = 0; i < poly.size(); ++i) {
      double t = 0;
      if (segment_distance(q, poly.edge_start(i), poly.edge_end(i), &t) <= tol) {
        add_split({p, i}, t);
        return;
      }
    }
    throw Error(ErrorCode::NotASaddleConnection, "connection piece does not end on the polygon boundary");
  };
  for (const PathPiece& piece : path.path) {
    locate(piece.polygon, piece.from);
    locate(piece.polygon, piece.to);
  }

  // Subdivided polygons with glue groups shared by matching edge pieces.
  std::vector<WorkPoly> work;
  std::map<int, int> group_base;
  int next_group = 0;
  for (int p = 0; p < np; ++p) {
    const Polygon& poly = s.polygon(p);
    WorkPoly w;
    w.origin = p;
    for (int e = 0; e < poly.size(); ++e) {
      auto& cut = splits[static_cast<std::size_t>(p)][static_cast<std::size_t>(e)];
      std::sort(cut.begin(), cut.end());
      std::vector<double> ts;
      for (double t : cut)
        if (t > 1e-10 && t < 1 - 1e-10 && (ts.empty() || t - ts.back() > 1e-12)) ts.push_back(t);
      cut = ts;
      const int pieces = static_cast<int>(ts.size()) + 1;
      const EdgeRef me{p, e};
      const int pi = s.pair_index(me);
      int base = -1;
      if (pi >= 0) {
        auto it = group_base.find(pi);
        if (it == group_base.end()) {
          it = group_base.emplace(pi, next_group).first;
          next_group += pieces;
        }
        base = it->second;
      }
      const bool canonical = s.canonical_edge(me) == me;
      for (int j = 0; j < pieces; ++j) {
        const double t = j == 0 ? 0.0 : ts[static_cast<std::size_t>(j - 1)];
        w.v.push_back(poly.edge_start(e) + t * poly.edge_vector(e));
        w.tag.push_back(base < 0 ? -1 : base + (canonical ? j : pieces - 1 - j));
      }
    }
    work.push_back(std::move(w));
  }

  // Pieces along an edge open that edge; the others split their polygon.
  std::vector<int> opened;
  std::vector<std::pair<int, std::pair<Vec2, Vec2>>> chords;
  for (const PathPiece& piece : path.path) {
    const WorkPoly& w = work[static_cast<std::size_t>(piece.polygon)];
    const double tol = tol_of(piece.polygon);
    const int i = find_vertex(w, piece.from, tol), j = find_vertex(w, piece.to, tol);
    if (i < 0 || j < 0) throw Error(ErrorCode::NotASaddleConnection, "connection piece endpoints not found after subdivision");
    const int n = static_cast<int>(w.v.size());
    if (i == j) continue;
    if ((i + 1) % n == j) {
      opened.push_back(w.tag[static_cast<std::size_t>(i)]);
    } else if ((j + 1) % n == i) {
      opened.push_back(w.tag[static_cast<std::size_t>(j)]);
    } else {
      chords.push_back({piece.polygon, {piece.from, piece.to}});
    }
  }
  for (const auto& [origin, chord] : chords) {
    const double tol = tol_of(origin);
    bool done = false;
    for (std::size_t k = 0; k < work.size() && !done; ++k) {
      if (work[k].origin != origin) continue;
      int i = find_vertex(work[k], chord.first, tol), j = find_vertex(work[k], chord.second, tol);
      if (i < 0 || j < 0) continue;
      if (i > j) std::swap(i, j);
      const WorkPoly w = work[k];
      const int n = static_cast<int>(w.v.size());
      WorkPoly a{origin, {}, {}}, b{origin, {}, {}};
      for (int m = i; m <= j; ++m) {
        a.v.push_back(w.v[static_cast<std::size_t>(m)]);
        a.tag.push_back(m < j ? w.tag[static_cast<std::size_t>(m)] : -1);
      }
      for (int m = j; m != i; m = (m + 1) % n) {
        b.v.push_back(w.v[static_cast<std::size_t>(m)]);
        b.tag.push_back(w.tag[static_cast<std::size_t>(m)]);
      }
      b.v.push_back(w.v[static_cast<std::size_t>(i)]);
      b.tag.push_back(-1);
      work[k] = std::move(a);
      work.push_back(std::move(b));
      done = true;
    }
    if (!done) throw Error(ErrorCode::NotASaddleConnection, "connection chord not inside a single piece");
  }
  for (auto& w : work)
    for (int& t : w.tag)
      if (std::find(opened.begin(), opened.end(), t) != opened.end()) t = -1;

  SurfaceSpec spec;
  std::map<int, std::vector<EdgeRef>> groups;
  for (std::size_t k = 0; k < work.size(); ++k) {
    const WorkPoly& w = work[k];
    Polygon poly;
    poly.id = static_cast<int>(k);
    poly.vertices = w.v;
    spec.polygons.push_back(std::move(poly));
    for (std::size_t e = 0; e < w.tag.size(); ++e)
      if (w.tag[e] >= 0) groups[w.tag[e]].push_back({static_cast<int>(k), static_cast<int>(e)});
    // Corners at singular vertices of the original stay marked.
    const Polygon& orig = s.polygon(w.origin);
    for (std::size_t i = 0; i < w.v.size(); ++i)
      for (int m = 0; m < orig.size(); ++m)
        if (distance(orig.vertex(m), w.v[i]) <= tol_of(w.origin) && s.singularity_at({w.origin, m}) >= 0)
          spec.marked_points.push_back({static_cast<int>(k), static_cast<int>(i)});
  }
  for (const auto& [tag, edges] : groups)
    if (edges.size() == 2) spec.pairings.push_back({edges[0], edges[1]});

  ValidateOptions opts;
  opts.allow_disconnected = true;
  return Surface::validate(std::move(spec), opts);
}

Disconnection is_disconnecting(const Surface& s, const SaddleConnection& sc) {
  const Surface cut = cut_along(s, sc);
  return {cut.num_components() > s.num_components(), cut.num_components()};
}

SaddleConnection edge_connection(const Surface& s, EdgeRef e) {
  if (e.polygon < 0 || e.polygon >= s.num_polygons() || e.edge < 0 || e.edge >= s.num_edges(e.polygon))
    throw Error(ErrorCode::NotASaddleConnection, "edge out of range");
  const Corner a{e.polygon, e.edge}, b{e.polygon, (e.edge + 1) % s.num_edges(e.polygon)};
  if (s.singularity_at(a) < 0 || s.singularity_at(b) < 0)
    throw Error(ErrorCode::NotASaddleConnection, "edge endpoints are not both singular");
  SaddleConnection sc;
  sc.start_singularity = s.singularity_at(a);
  sc.end_singularity = s.singularity_at(b);
  sc.start_corner = a;
  sc.end_corner = b;
  const Vec2 w = s.polygon(e.polygon).edge_vector(e.edge);
  sc.direction = Direction(angle_of(w));
  sc.chart_length = norm(w);
  return sc;
}

ConnectionGeometry::ConnectionGeometry(const Surface& s, const SaddleConnection& sc)
    : s_(&s), chords_(static_cast<std::size_t>(s.num_polygons())) {
  const TraceResult path = connection_path(s, sc);
  for (const PathPiece& piece : path.path) {
    const Polygon& poly = s.polygon(piece.polygon);
    const int e = edge_along(poly, piece.from, piece.to, 1e-8 * s.diameter(piece.polygon));
    if (e >= 0)
      along_.push_back(s.canonical_edge({piece.polygon, e}));
    else
      chords_[static_cast<std::size_t>(piece.polygon)].emplace_back(piece.from, piece.to);
  }
}

int ConnectionGeometry::count_step(const FlowStepper& st, FlowStepper::Event ev, bool first,
                                   ConnectionHit* last_hit) const {
  int count = 0;
  const PathPiece& piece = st.last_piece();
  const Vec2 w = piece.to - piece.from;
  for (const auto& [a, b] : chords_[static_cast<std::size_t>(piece.polygon)]) {
    const Vec2 c = b - a;
    const double den = cross(w, c);
    if (std::abs(den) <= 1e-300) continue;
    const double sp = cross(a - piece.from, c) / den;
    const double tc = cross(a - piece.from, w) / den;
    if (sp > (first ? 1e-9 : 0.0) && sp <= 1 && tc > 1e-12 && tc < 1 - 1e-12) {
      ++count;
      if (last_hit) *last_hit = {{piece.polygon, piece.from + sp * w}, std::nullopt, 0};
    }
  }
  auto along = [&](EdgeRef e) { return std::find(along_.begin(), along_.end(), s_->canonical_edge(e)) != along_.end(); };
  if (ev == FlowStepper::Event::Crossed && along(st.last_record().edge)) {
    ++count;
    if (last_hit) *last_hit = {{st.polygon(), st.position()}, st.last_record().edge, st.last_record().coord};
  } else if (ev == FlowStepper::Event::CrossedBoundary && along(st.boundary_edge())) {
    ++count;
    if (last_hit) *last_hit = {{piece.polygon, piece.to}, st.boundary_edge(), st.boundary_coord()};
  }
  return count;
}


namespace {

// A reproducible trace start: a chart point or a singular corner.
struct Launch {
  FlowPoint point;
  std::optional<Corner> corner;
};

struct Counted {
  int count{0};
  TraceResult result;
  ConnectionHit last_hit;
  bool cycle_crosses{false};
};

Counted count_trace(const Surface& s, const ConnectionGeometry& geo, FlowStepper& st, const TraceConfig& cfg) {
  Counted out;
  bool first = true;
  out.result = run_stepper(st, cfg, [&](const FlowStepper& fs, FlowStepper::Event ev) {
    out.count += geo.count_step(fs, ev, first, &out.last_hit);
    first = false;
  });
  if (out.result.outcome.kind == OutcomeKind::LimitCycle) {
    // A cycle that meets the connection once meets it forever.
    const std::size_t period = out.result.outcome.cycle->signature.size();
    for (std::size_t k = 0; k < period; ++k) {
      const auto ev = st.step();
      if (geo.count_step(st, ev, false) > 0) out.cycle_crosses = true;
      if (ev == FlowStepper::Event::HitSingularity || ev == FlowStepper::Event::CrossedBoundary) break;
    }
  }
  (void)s;
  return out;
}

std::optional<Counted> run_launch(const Surface& s, const ConnectionGeometry& geo, const Launch& l, double theta,
                                  const TraceConfig& cfg) {
  FlowStepper st(s, Direction(theta), cfg.eps_hit);
  try {
    if (l.corner)
      st.start_at_corner(*l.corner);
    else
      st.start_at(l.point);
  } catch (const Error&) {
    return std::nullopt;
  }
  return count_trace(s, geo, st, cfg);
}

// Random starts and separatrices for one direction.
std::vector<Launch> launches(const Surface& s, double theta, std::mt19937_64& rng, const HorizonConfig& cfg) {
  std::vector<Launch> out;
  for (int p = 0; p < s.num_polygons(); ++p)
    for (int k = 0; k < cfg.starts_per_polygon; ++k)
      out.push_back({{p, detail::random_interior_point(s.polygon(p), rng)}, std::nullopt});
  if (cfg.separatrices)
    for (const Singularity& sing : s.singularities())
      for (const Corner& c : sing.corners)
        if (s.direction_in_corner(c, theta)) out.push_back({{c.polygon, s.polygon(c.polygon).vertex(c.vertex)}, c});
  return out;
}

struct Witness {
  Launch launch;
  double theta{0};
  Counted counted;
};

struct DirectionSurvey {
  double theta{0};
  int best{0};
  int traces{0};
  int cycles_crossing{0};
  int open_ended{0};
  std::vector<Witness> witnesses;  // traces realizing best
};

DirectionSurvey survey_direction(const Surface& s, const ConnectionGeometry& geo, double theta, std::size_t index,
                                 bool both_ways, const HorizonConfig& cfg) {
  DirectionSurvey out;
  out.theta = theta;
  std::mt19937_64 rng(detail::item_seed(cfg.seed, index));
  for (double dir : both_ways ? std::vector<double>{theta, theta + kPi} : std::vector<double>{theta}) {
    dir = normalize_angle(dir);
    for (const Launch& l : launches(s, dir, rng, cfg)) {
      auto c = run_launch(s, geo, l, dir, cfg.trace);
      if (!c) continue;
      ++out.traces;
      if (c->cycle_crosses) ++out.cycles_crossing;
      if (c->count > 0 && c->result.outcome.kind == OutcomeKind::BudgetExhausted) ++out.open_ended;
      if (c->count > out.best) {
        out.best = c->count;
        out.witnesses.clear();
      }
      if (c->count == out.best && c->count > 0) out.witnesses.push_back({l, dir, std::move(*c)});
    }
  }
  return out;
}

}  // namespace

CrossingBoundEstimate empirical_crossing_bound(const Surface& s, const SaddleConnection& sc,
                                               const std::vector<double>& grid, const HorizonConfig& cfg) {
  const ConnectionGeometry geo(s, sc);
  CrossingBoundEstimate est;
  est.saddle_connection = saddle_connection_key(sc);
  est.budget = cfg.trace.max_crossings;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const DirectionSurvey sv = survey_direction(s, geo, grid[i], i, cfg.both_orientations, cfg);
    est.per_direction.push_back({sv.theta, sv.best, sv.traces});
    est.global_max = std::max(est.global_max, sv.best);
    est.traces += sv.traces;
    est.cycles_crossing += sv.cycles_crossing;
    est.open_ended += sv.open_ended;
    if (sv.best == 0) continue;

    // Small deviations of a trace with r crossings keep at least r of them.
    OpennessCheck chk{sv.theta, sv.best, false, false};
    for (const Witness& w : sv.witnesses) {
      for (int side = 0; side < 2; ++side) {
        bool& ok = side == 0 ? chk.plus : chk.minus;
        if (ok) continue;
        const double dir = w.theta + (side == 0 ? 1 : -1) * cfg.openness_delta;
        auto c = run_launch(s, geo, w.launch, dir, cfg.trace);
        if (c && c->count >= sv.best) ok = true;
      }
      if (chk.plus && chk.minus) break;
    }
    est.openness_passed = est.openness_passed && chk.plus && chk.minus;
    est.openness.push_back(chk);
  }
  if (is_disconnecting(s, sc).disconnecting) est.certified = 1;
  return est;
}

namespace {

FlowStepper stepper_at_hit(const Surface& s, const ConnectionHit& h, double theta, bool forward, double eps_hit) {
  FlowStepper st(s, Direction(theta), eps_hit);
  if (h.edge) {
    if (forward)
      st.start_after_crossing(*h.edge, h.coord);
    else
      st.start_on_edge(*h.edge, h.coord);
  } else {
    st.start_at(h.point);
  }
  return st;
}

}  // namespace

Pencil max_crossing_pencil(const Surface& s, const SaddleConnection& sc, double lo, double hi,
                           const HorizonConfig& cfg, int directions, int witnesses) {
  if (!(hi > lo)) throw Error(ErrorCode::ParamOutOfRange, "empty direction interval");
  const ConnectionGeometry geo(s, sc);
  auto survey = [&](const HorizonConfig& c) {
    std::vector<DirectionSurvey> out;
    for (int j = 0; j < directions; ++j)
      out.push_back(survey_direction(s, geo, lo + (j + 0.5) * (hi - lo) / directions, static_cast<std::size_t>(j), false, c));
    return out;
  };
  auto best_of = [](const std::vector<DirectionSurvey>& v) {
    const DirectionSurvey* best = &v.front();
    for (const auto& d : v)
      if (d.best > best->best) best = &d;
    return best;
  };
  const auto runs = survey(cfg);
  const DirectionSurvey& top = *best_of(runs);
  const int k = top.best;

  HorizonConfig doubled = cfg;
  doubled.trace.max_crossings *= 2;
  doubled.trace.max_path_length *= 2;
  const auto again = survey(doubled);
  const int k2 = best_of(again)->best;
  bool cycles = false;
  for (const auto& d : runs) cycles = cycles || d.cycles_crossing > 0;
  if (k2 > k || cycles)
    throw Error(ErrorCode::UnboundedCrossings, "maximal crossing count grows with the budget (" + std::to_string(k) +
                                                   " at " + std::to_string(cfg.trace.max_crossings) + " crossings, " +
                                                   std::to_string(k2) + " at twice that)");

  Pencil pencil;
  pencil.k = k;
  auto forward_count = [&](const ConnectionHit& apex, double theta, TraceResult* keep) -> std::optional<int> {
    FlowStepper st = stepper_at_hit(s, apex, theta, true, cfg.trace.eps_hit);
    Counted c = count_trace(s, geo, st, cfg.trace);
    if (c.cycle_crosses) return std::nullopt;
    if (keep) *keep = std::move(c.result);
    return c.count;
  };

  if (k == 0) {
    // No trace in the interval meets the connection: any start will do.
    pencil.note = "no crossing found in the interval; the pencil avoids the connection trivially";
    std::mt19937_64 rng(detail::item_seed(cfg.seed, 0));
    pencil.apex.point = {0, detail::random_interior_point(s.polygon(0), rng)};
    pencil.lo = lo;
    pencil.hi = hi;
  } else {
    const Witness& w = top.witnesses.front();
    pencil.apex = w.counted.last_hit;
    const double theta = w.theta;
    double half = 0.999 * std::min({theta - lo, hi - theta, 0.05});
    for (int attempt = 0; attempt < 40; ++attempt, half *= 0.5) {
      bool ok = true;
      for (int j = 0; j < witnesses && ok; ++j) {
        const double t = theta - half + (j + 0.5) * 2 * half / witnesses;
        FlowStepper back = stepper_at_hit(s, pencil.apex, t + kPi, false, cfg.trace.eps_hit);
        const Counted b = count_trace(s, geo, back, cfg.trace);
        const auto f = forward_count(pencil.apex, t, nullptr);
        ok = b.count >= k - 1 && f && *f == 0;
      }
      if (ok) {
        pencil.lo = theta - half;
        pencil.hi = theta + half;
        break;
      }
    }
    if (!(pencil.hi > pencil.lo)) {
      pencil.note = "no neighborhood of the maximal direction passed the backward check";
      pencil.lo = pencil.hi = theta;
    }
  }
  for (int j = 0; j < witnesses && pencil.hi > pencil.lo; ++j) {
    const double t = pencil.lo + (j + 0.5) * (pencil.hi - pencil.lo) / witnesses;
    TraceResult r;
    std::optional<int> c;
    if (k == 0) {
      FlowStepper st(s, Direction(t), cfg.trace.eps_hit);
      st.start_at(pencil.apex.point);
      Counted cc = count_trace(s, geo, st, cfg.trace);
      if (!cc.cycle_crosses) c = cc.count;
      r = std::move(cc.result);
    } else {
      c = forward_count(pencil.apex, t, &r);
    }
    pencil.witness_crossings.push_back(c ? *c : -1);
    pencil.witnesses.push_back(std::move(r));
  }
  return pencil;
}

}  // namespace dilaflow
