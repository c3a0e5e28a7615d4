#include "dilaflow/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dilaflow/errors.hpp"

namespace dilaflow {

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::HitSingularity: return "HitSingularity";
    case OutcomeKind::CrossedBoundary: return "CrossedBoundary";
    case OutcomeKind::LimitCycle: return "LimitCycle";
    case OutcomeKind::BudgetExhausted: return "BudgetExhausted";
  }
  return "Unknown";
}

EdgeRef signature_step(const CrossingRecord& r) {
  return r.through_vertex ? EdgeRef{r.edge.polygon, -(r.edge.edge + 1)} : r.edge;
}

bool is_vertex_step(EdgeRef step) { return step.edge < 0; }

FlowStepper::FlowStepper(const Surface& s, Direction d, double eps_hit)
    : s_(&s), d_(d), u_(d.unit()), eps_hit_(eps_hit) {}

namespace {

// Corner of c's vertex class whose half-open sector [0, angle) contains theta.
std::optional<std::size_t> corner_for_direction(const Surface& s, const VertexClass& vc, double theta) {
  std::optional<std::size_t> best;
  double best_excess = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < vc.corners.size(); ++k) {
    double rel = s.corner_relative(vc.corners[k], theta);
    if (rel > kTwoPi - 1e-12) rel = 0;
    const double excess = rel - s.corner_angle(vc.corners[k]);
    if (excess < 0) return k;
    if (excess < best_excess) {
      best_excess = excess;
      best = k;
    }
  }
  // Rounding at a sector seam: accept the nearest sector.
  if (best && best_excess < 1e-12) return best;
  return std::nullopt;
}

std::size_t position_in_class(const VertexClass& vc, Corner c) {
  const auto it = std::find(vc.corners.begin(), vc.corners.end(), c);
  return static_cast<std::size_t>(it - vc.corners.begin());
}

}  // namespace

bool FlowStepper::enter_vertex(Corner c, Event& event) {
  const Polygon& poly = s_->polygon(c.polygon);
  c.vertex = ((c.vertex % poly.size()) + poly.size()) % poly.size();
  const int sing = s_->singularity_at(c);
  if (sing >= 0) {
    poly_ = c.polygon;
    pos_ = poly.vertex(c.vertex);
    hit_sing_ = sing;
    hit_corner_ = c;
    event = Event::HitSingularity;
    return true;
  }
  const VertexClass& vc = s_->vertex_classes()[static_cast<std::size_t>(s_->vertex_class_of(c))];
  const auto next = corner_for_direction(*s_, vc, d_.theta());
  if (!next) {
    const Corner first = vc.corners.front();
    poly_ = c.polygon;
    pos_ = poly.vertex(c.vertex);
    boundary_edge_ = {first.polygon, (first.vertex + s_->num_edges(first.polygon) - 1) % s_->num_edges(first.polygon)};
    boundary_coord_ = 1.0;
    event = Event::CrossedBoundary;
    return true;
  }
  const std::size_t cur = position_in_class(vc, c);
  const Corner nc = vc.corners[*next];
  ratio_ *= vc.ratio_to_first[cur] / vc.ratio_to_first[*next];
  poly_ = nc.polygon;
  pos_ = s_->polygon(nc.polygon).vertex(nc.vertex);
  skip_vertex_ = nc.vertex;
  entry_edge_ = -1;
  last_ = {{nc.polygon, nc.vertex}, 0.0, ratio_, true};
  event = Event::PassedVertex;
  return false;
}

void FlowStepper::start_at_corner(Corner c) {
  if (c.polygon < 0 || c.polygon >= s_->num_polygons() || c.vertex < 0 || c.vertex >= s_->num_edges(c.polygon))
    throw Error(ErrorCode::InvalidStart, "corner out of range");
  const VertexClass& vc = s_->vertex_classes()[static_cast<std::size_t>(s_->vertex_class_of(c))];
  std::optional<std::size_t> k;
  {
    double rel = s_->corner_relative(c, d_.theta());
    if (rel > kTwoPi - 1e-12) rel = 0;
    if (rel < s_->corner_angle(c)) k = position_in_class(vc, c);
  }
  if (!k) k = corner_for_direction(*s_, vc, d_.theta());
  if (!k) throw Error(ErrorCode::InvalidStart, "direction points out of the surface at this boundary vertex");
  const Corner nc = vc.corners[*k];
  poly_ = nc.polygon;
  pos_ = s_->polygon(nc.polygon).vertex(nc.vertex);
  ratio_ = 1;
  skip_vertex_ = nc.vertex;
  entry_edge_ = -1;
}

void FlowStepper::start_at(FlowPoint p) {
  if (p.polygon < 0 || p.polygon >= s_->num_polygons()) throw Error(ErrorCode::InvalidStart, "polygon out of range");
  if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y)) throw Error(ErrorCode::InvalidStart, "non-finite start");
  const Polygon& poly = s_->polygon(p.polygon);
  const double eps = eps_hit_ * s_->diameter(p.polygon);
  for (int k = 0; k < poly.size(); ++k) {
    if (distance(poly.vertex(k), p.position) <= eps) {
      const Corner c{p.polygon, k};
      if (s_->singularity_at(c) >= 0) {
        start_at_corner(c);
        return;
      }
      const VertexClass& vc = s_->vertex_classes()[static_cast<std::size_t>(s_->vertex_class_of(c))];
      const auto next = corner_for_direction(*s_, vc, d_.theta());
      if (!next) throw Error(ErrorCode::InvalidStart, "direction points out of the surface at this boundary vertex");
      const Corner nc = vc.corners[*next];
      poly_ = nc.polygon;
      pos_ = s_->polygon(nc.polygon).vertex(nc.vertex);
      ratio_ = 1;
      skip_vertex_ = nc.vertex;
      entry_edge_ = -1;
      return;
    }
  }
  // Inside test by winding, with points within eps of an edge accepted.
  bool inside = false;
  for (int i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly.vertex(i), b = poly.vertex(i + 1);
    const Vec2 w = b - a;
    const double t = std::clamp(dot(p.position - a, w) / dot(w, w), 0.0, 1.0);
    if (distance(a + t * w, p.position) <= eps) {
      inside = true;
      break;
    }
  }
  if (!inside) inside = poly.contains(p.position);
  if (!inside) throw Error(ErrorCode::InvalidStart, "start point is outside its polygon");
  poly_ = p.polygon;
  pos_ = p.position;
  ratio_ = 1;
  skip_vertex_ = -1;
  entry_edge_ = -1;
}

void FlowStepper::start_after_crossing(EdgeRef e, double s) {
  const auto f = s_->partner(e);
  if (!f) throw Error(ErrorCode::InvalidStart, "edge is not glued");
  poly_ = f->polygon;
  pos_ = s_->edge_point(*f, 1.0 - s);
  ratio_ = 1;
  skip_vertex_ = -1;
  entry_edge_ = f->edge;
}

void FlowStepper::start_on_edge(EdgeRef e, double s) {
  poly_ = e.polygon;
  pos_ = s_->edge_point(e, s);
  ratio_ = 1;
  skip_vertex_ = -1;
  entry_edge_ = -1;
}

FlowStepper::Event FlowStepper::step() {
  const Polygon& poly = s_->polygon(poly_);
  const int n = poly.size();
  const double eps = eps_hit_ * s_->diameter(poly_);
  const int skip_prev = skip_vertex_ >= 0 ? (skip_vertex_ + n - 1) % n : -1;

  double best_t = std::numeric_limits<double>::infinity();
  double best_s = 0;
  int best_edge = -1;
  double loose_t = std::numeric_limits<double>::infinity();
  double loose_s = 0;
  int loose_edge = -1;
  for (int i = 0; i < n; ++i) {
    if (i == skip_vertex_ || i == skip_prev || i == entry_edge_) continue;
    const Vec2 v = poly.vertex(i);
    const Vec2 w = poly.edge_vector(i);
    const double cw = cross(w, u_);
    if (cw >= 0) continue;
    const double t = cross(v - pos_, w) / (-cw);
    const double sp = cross(pos_ - v, u_) / cw;
    if (t < -eps) continue;
    if (sp < -1e-12 || sp > 1 + 1e-12) {
      if (t < loose_t) {
        loose_t = t;
        loose_s = sp;
        loose_edge = i;
      }
      continue;
    }
    if (t < best_t) {
      best_t = t;
      best_s = sp;
      best_edge = i;
    }
  }
  if (best_edge < 0) {
    // Rounding pushed the position just outside the polygon.
    if (loose_edge < 0) throw Error(ErrorCode::InvalidStart, "flow has no exit from the current polygon");
    best_t = loose_t;
    best_s = loose_s;
    best_edge = loose_edge;
  }
  best_t = std::max(best_t, 0.0);
  best_s = std::clamp(best_s, 0.0, 1.0);

  int hit_vertex = -1;
  double hit_tau = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (k == skip_vertex_) continue;
    const Vec2 r = poly.vertex(k) - pos_;
    const double tau = dot(r, u_);
    if (tau <= 0 || tau > best_t + eps) continue;
    if (std::abs(cross(u_, r)) <= eps && tau < hit_tau) {
      hit_tau = tau;
      hit_vertex = k;
    }
  }

  piece_.polygon = poly_;
  piece_.from = pos_;
  piece_.accumulated_ratio = ratio_;
  if (hit_vertex >= 0) {
    piece_.to = poly.vertex(hit_vertex);
    piece_len_ = hit_tau;
    Event ev;
    enter_vertex({poly_, hit_vertex}, ev);
    return ev;
  }

  const Vec2 q = pos_ + best_t * u_;
  piece_.to = q;
  piece_len_ = best_t;
  const EdgeRef e{poly_, best_edge};
  const auto f = s_->partner(e);
  if (!f) {
    pos_ = q;
    boundary_edge_ = e;
    boundary_coord_ = best_s;
    return Event::CrossedBoundary;
  }
  ratio_ *= s_->ratio(e);
  last_ = {e, best_s, ratio_, false};
  poly_ = f->polygon;
  pos_ = s_->edge_point(*f, 1.0 - best_s);
  skip_vertex_ = -1;
  entry_edge_ = f->edge;
  return Event::Crossed;
}

TraceResult run_stepper(FlowStepper& st, const TraceConfig& cfg, const StepObserver& observe) {
  TraceResult res;
  res.start = {st.polygon(), st.position()};
  res.direction = st.direction();
  int retry_after = 0;
  for (;;) {
    if (static_cast<int>(res.crossings.size()) >= cfg.max_crossings) {
      res.outcome.kind = OutcomeKind::BudgetExhausted;
      res.outcome.budget_reason = "max_crossings";
      break;
    }
    const double r0 = st.accumulated_ratio();
    const FlowStepper::Event ev = st.step();
    res.path_length += st.last_length() / r0;
    if (cfg.record_path) res.path.push_back(st.last_piece());
    if (observe) observe(st, ev);
    if (ev == FlowStepper::Event::HitSingularity) {
      res.outcome.kind = OutcomeKind::HitSingularity;
      res.outcome.singularity = st.hit_singularity();
      res.outcome.corner = st.hit_corner();
      break;
    }
    if (ev == FlowStepper::Event::CrossedBoundary) {
      res.outcome.kind = OutcomeKind::CrossedBoundary;
      res.outcome.boundary_edge = st.boundary_edge();
      res.outcome.boundary_coord = st.boundary_coord();
      break;
    }
    res.crossings.push_back(st.last_record());
    if (res.path_length > cfg.max_path_length) {
      res.outcome.kind = OutcomeKind::BudgetExhausted;
      res.outcome.budget_reason = "max_path_length";
      break;
    }
    if (cfg.detect_cycles && static_cast<int>(res.crossings.size()) >= retry_after) {
      auto g = detect_limit_cycle(res.crossings, cfg);
      if (g) {
        g->direction = st.direction();
        if (verify_closed_geodesic(st.surface(), *g)) {
          res.outcome.kind = OutcomeKind::LimitCycle;
          res.outcome.cycle = std::move(g);
          break;
        }
        retry_after = static_cast<int>(res.crossings.size() + g->signature.size());
      }
    }
  }
  res.end = {st.polygon(), st.position()};
  return res;
}

TraceResult trace(const Surface& s, FlowPoint start, Direction d, const TraceConfig& cfg) {
  FlowStepper st(s, d, cfg.eps_hit);
  st.start_at(start);
  TraceResult res = run_stepper(st, cfg);
  res.start = start;
  return res;
}

TraceResult trace_from_corner(const Surface& s, Corner c, Direction d, const TraceConfig& cfg) {
  FlowStepper st(s, d, cfg.eps_hit);
  st.start_at_corner(c);
  return run_stepper(st, cfg);
}

TraceResult trace_after_crossing(const Surface& s, EdgeRef e, double x, Direction d, const TraceConfig& cfg) {
  FlowStepper st(s, d, cfg.eps_hit);
  st.start_after_crossing(e, x);
  return run_stepper(st, cfg);
}

std::optional<ClosedGeodesic> detect_limit_cycle(std::span<const CrossingRecord> h, const TraceConfig& cfg) {
  const int n = static_cast<int>(h.size());
  const int conf = std::max(cfg.cycle_confirmations, 2);
  auto step = [&](int i) { return signature_step(h[static_cast<std::size_t>(i)]); };
  for (int P = 1; P <= cfg.max_period; ++P) {
    if (n < (conf + 1) * P) break;
    if (step(n - 1) != step(n - 1 - P)) continue;
    bool periodic = true;
    for (int i = n - conf * P; i < n && periodic; ++i) periodic = step(i) == step(i - P);
    if (!periodic) continue;

    // Only the smallest period is examined: multiples repeat its verdict.
    int phase = -1;
    for (int i = n - 1; i >= n - P; --i)
      if (!h[static_cast<std::size_t>(i)].through_vertex) {
        phase = i;
        break;
      }
    if (phase < 0) return std::nullopt;

    auto rec = [&](int j) -> const CrossingRecord& { return h[static_cast<std::size_t>(phase - j * P)]; };
    const double lambda = rec(0).accumulated_ratio / rec(1).accumulated_ratio;
    if (!(lambda < 1 - kEpsGeo)) return std::nullopt;
    for (int j = 1; j <= conf; ++j)
      if (std::abs(rec(j - 1).accumulated_ratio / rec(j).accumulated_ratio - lambda) > 1e-9 * lambda) return std::nullopt;
    const double c = rec(0).coord - lambda * rec(1).coord;
    for (int j = 1; j <= conf; ++j)
      if (std::abs(rec(j - 1).coord - (lambda * rec(j).coord + c)) > 1e-9) return std::nullopt;
    const double fixed = c / (1 - lambda);
    if (!(fixed > 1e-12 && fixed < 1 - 1e-12)) return std::nullopt;

    ClosedGeodesic g;
    for (int i = phase - P; i < phase; ++i) g.signature.push_back(step(i));
    g.holonomy = lambda;
    g.base = {h[static_cast<std::size_t>(phase)].edge, fixed, 1.0, false};
    g.is_hyperbolic = true;
    return g;
  }
  return std::nullopt;
}

bool verify_closed_geodesic(const Surface& s, const ClosedGeodesic& g, double tol) {
  if (g.signature.empty() || is_vertex_step(g.signature.front())) return false;
  FlowStepper st(s, g.direction);
  try {
    st.start_after_crossing(g.base.edge, g.base.coord);
  } catch (const Error&) {
    return false;
  }
  const std::size_t P = g.signature.size();
  for (std::size_t k = 1; k <= P; ++k) {
    const auto ev = st.step();
    if (ev != FlowStepper::Event::Crossed && ev != FlowStepper::Event::PassedVertex) return false;
    if (signature_step(st.last_record()) != g.signature[k % P]) return false;
  }
  return std::abs(st.last_record().coord - g.base.coord) <= tol &&
         std::abs(st.accumulated_ratio() - g.holonomy) <= 1e-9 * std::max(1.0, g.holonomy);
}

}  // namespace dilaflow
