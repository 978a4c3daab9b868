#include "sticky/kpz_shape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sticky/cluster_dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/rate_functionals.hpp"

namespace sticky {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlopeTolerance = 1e-10;

void validate_nodes(double t, std::span<const double> x, std::span<const double> h, const char* who) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(who) + ": t must be positive");
  if (x.empty()) throw DomainError(std::string(who) + ": at least one node is required");
  if (x.size() != h.size()) throw DomainError(std::string(who) + ": x and h differ in length");
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (!std::isfinite(x[c]) || !std::isfinite(h[c])) {
      throw DomainError(std::string(who) + ": non-finite node");
    }
    if (c > 0 && !(x[c] > x[c - 1])) {
      throw DomainError(std::string(who) + ": node positions must be strictly increasing");
    }
    const double p = parabola(t, x[c]);
    if (h[c] < p - 1e-12 * std::max(1.0, std::abs(p))) {
      throw DomainError(std::string(who) + ": node " + std::to_string(c) + " lies below the parabola (h = " +
                        std::to_string(h[c]) + " < " + std::to_string(p) + ")");
    }
  }
}

// Square root of the tangency discriminant x^2 + 2 t h; zero for nodes on the parabola.
double root_disc(double t, double x, double h) {
  const double d = x * x + 2.0 * t * h;
  if (d <= 1e-14 * std::max(1.0, x * x)) return 0.0;
  return std::sqrt(d);
}

// Connection between consecutive nodes (x1, h1) and (x2, h2).
struct Link {
  bool chord;
  double slope_after_left;    // slope just right of x1
  double slope_before_right;  // slope just left of x2
  double y1;                  // tangent points when not a chord
  double y2;
  double r1;  // root discriminants
  double r2;
};

Link make_link(double t, double x1, double h1, double x2, double h2) {
  const double sigma = (h2 - h1) / (x2 - x1);
  const double xs = -sigma * t;
  bool chord = true;
  if (xs > x1 && xs < x2) {
    const double gap = h1 + sigma * (xs - x1) + xs * xs / (2.0 * t);
    if (gap < -1e-14 * std::max({1.0, std::abs(h1), std::abs(h2)})) chord = false;
  }
  const double r1 = root_disc(t, x1, h1);
  const double r2 = root_disc(t, x2, h2);
  if (!chord) {
    const double y1 = x1 + r1;
    const double y2 = x2 - r2;
    if (y1 <= y2) return {false, -y1 / t, -y2 / t, y1, y2, r1, r2};
  }
  return {true, sigma, sigma, 0.0, 0.0, r1, r2};
}

double left_wing_slope(double t, double x, double r) { return (r - x) / t; }
double right_wing_slope(double t, double x, double r) { return -(x + r) / t; }

double inv_or_huge(double r) { return r > 0.0 ? 1.0 / r : 1e300; }

struct NodeSlopes {
  double minus;
  double plus;
};

NodeSlopes node_slopes(double t, std::span<const double> x, std::span<const double> h, std::size_t c) {
  const std::size_t n = x.size();
  NodeSlopes s{};
  if (c == 0) {
    s.minus = left_wing_slope(t, x[0], root_disc(t, x[0], h[0]));
  } else {
    s.minus = make_link(t, x[c - 1], h[c - 1], x[c], h[c]).slope_before_right;
  }
  if (c + 1 == n) {
    s.plus = right_wing_slope(t, x[c], root_disc(t, x[c], h[c]));
  } else {
    s.plus = make_link(t, x[c], h[c], x[c + 1], h[c + 1]).slope_after_left;
  }
  return s;
}

double node_drop(double t, std::span<const double> x, std::span<const double> h, std::size_t c) {
  const NodeSlopes s = node_slopes(t, x, h, c);
  return s.minus - s.plus;
}

double max_residual(double t, std::span<const double> x, std::span<const double> h,
                    std::span<const double> m) {
  double r = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) r = std::max(r, std::abs(node_drop(t, x, h, c) - m[c]));
  return r;
}

// Tridiagonal Jacobian of the slope drops with respect to h.
void drop_jacobian(double t, std::span<const double> x, std::span<const double> h,
                   std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper) {
  const std::size_t n = x.size();
  lower.assign(n, 0.0);
  diag.assign(n, 0.0);
  upper.assign(n, 0.0);
  diag[0] += inv_or_huge(root_disc(t, x[0], h[0]));
  diag[n - 1] += inv_or_huge(root_disc(t, x[n - 1], h[n - 1]));
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const Link link = make_link(t, x[c], h[c], x[c + 1], h[c + 1]);
    if (link.chord) {
      const double w = 1.0 / (x[c + 1] - x[c]);
      diag[c] += w;
      diag[c + 1] += w;
      upper[c] -= w;
      lower[c + 1] -= w;
    } else {
      diag[c] += inv_or_huge(link.r1);
      diag[c + 1] += inv_or_huge(link.r2);
    }
  }
}

std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> out(n);
  out[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
  return out;
}

// Newton iterations from h; keeps only steps that reduce the max residual.
void newton_polish(double t, std::span<const double> x, std::vector<double>& h,
                   std::span<const double> m, int max_steps) {
  const std::size_t n = x.size();
  double current = max_residual(t, x, h, m);
  std::vector<double> lower, diag, upper, rhs(n), trial(n);
  for (int step = 0; step < max_steps && current > 0.0; ++step) {
    drop_jacobian(t, x, h, lower, diag, upper);
    for (std::size_t c = 0; c < n; ++c) rhs[c] = m[c] - node_drop(t, x, h, c);
    const auto delta = solve_tridiagonal(lower, diag, upper, rhs);
    bool improved = false;
    for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
      for (std::size_t c = 0; c < n; ++c) {
        trial[c] = std::max(h[c] + lambda * delta[c], parabola(t, x[c]));
      }
      const double r = max_residual(t, x, trial, m);
      if (r < current) {
        h = trial;
        current = r;
        improved = true;
        break;
      }
    }
    if (!improved) return;
  }
}

struct Line {
  double u;
  double anchor_x;
  double anchor_h;

  double value(double x) const { return anchor_h + u * (x - anchor_x); }
};

// Abscissa where two lines of different slope agree.
double crossing(const Line& p, const Line& q) {
  return p.anchor_x + (q.value(p.anchor_x) - p.anchor_h) / (p.u - q.u);
}

struct Run {
  std::vector<Line> lines;  // left to right
  double left;
  double right;
};

std::vector<Run> linear_runs(const ShapeFunction& shape) {
  std::vector<Run> runs;
  bool in_run = false;
  for (const ShapePiece& p : shape.pieces()) {
    if (p.kind == ShapePiece::Kind::linear) {
      if (!in_run) runs.push_back({{}, p.a, p.bx});
      runs.back().lines.push_back({p.u, p.anchor_x, p.anchor_h});
      runs.back().right = p.bx;
      in_run = true;
    } else {
      in_run = false;
    }
  }
  return runs;
}

void push_piece(std::vector<ShapePiece>& pieces, ShapePiece p) {
  if (!(p.bx > p.a)) return;
  if (!pieces.empty() && p.kind == ShapePiece::Kind::parabola &&
      pieces.back().kind == ShapePiece::Kind::parabola) {
    pieces.back().bx = p.bx;
    return;
  }
  pieces.push_back(p);
}

ShapePiece linear_piece(double a, double b, double u, double ax, double ah) {
  return {ShapePiece::Kind::linear, a, b, u, ax, ah};
}

ShapePiece parabola_piece(double a, double b) { return {ShapePiece::Kind::parabola, a, b}; }

struct PositionGroups {
  std::vector<double> positions;
  std::vector<double> masses;
  std::vector<std::vector<std::size_t>> groups;
};

PositionGroups group_positions(std::span<const double> positions, std::span<const double> masses) {
  PositionGroups out;
  for (std::size_t c = 0; c < positions.size(); ++c) {
    const double x = positions[c];
    if (!out.positions.empty() &&
        std::abs(x - out.positions.back()) <= 1e-12 * std::max(1.0, std::abs(x))) {
      out.masses.back() += masses[c];
      out.groups.back().push_back(c);
    } else {
      out.positions.push_back(x);
      out.masses.push_back(masses[c]);
      out.groups.push_back({c});
    }
  }
  return out;
}

}  // namespace

ShapeFunction::ShapeFunction(double t, std::vector<ShapePiece> pieces, std::vector<ShapeNode> nodes)
    : t_(t), pieces_(std::move(pieces)), nodes_(std::move(nodes)) {
  if (!(t_ > 0.0) || !std::isfinite(t_)) throw DomainError("ShapeFunction: t must be positive");
  if (pieces_.empty()) throw DomainError("ShapeFunction: no pieces");
  if (pieces_.front().a != -kInf || pieces_.back().bx != kInf) {
    throw DomainError("ShapeFunction: pieces must cover the whole line");
  }
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    if (!(pieces_[k].bx > pieces_[k].a)) throw DomainError("ShapeFunction: empty piece");
    if (k > 0 && pieces_[k].a != pieces_[k - 1].bx) {
      throw DomainError("ShapeFunction: pieces must be contiguous");
    }
  }
  for (std::size_t c = 1; c < nodes_.size(); ++c) {
    if (!(nodes_[c].x > nodes_[c - 1].x)) {
      throw DomainError("ShapeFunction: node positions must be strictly increasing");
    }
  }
}

double ShapeFunction::piece_value(const ShapePiece& p, double x) const {
  if (p.kind == ShapePiece::Kind::parabola) return parabola(t_, x);
  return p.anchor_h + p.u * (x - p.anchor_x);
}

double ShapeFunction::piece_slope(const ShapePiece& p, double x) const {
  if (p.kind == ShapePiece::Kind::parabola) return -x / t_;
  return p.u;
}

double ShapeFunction::operator()(double x) const {
  auto node = std::lower_bound(nodes_.begin(), nodes_.end(), x,
                               [](const ShapeNode& n, double v) { return n.x < v; });
  if (node != nodes_.end() && node->x == x) return node->h;
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x,
                             [](const ShapePiece& p, double v) { return p.bx < v; });
  return piece_value(*it, x);
}

double ShapeFunction::slope_left(double x) const {
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x,
                             [](const ShapePiece& p, double v) { return p.bx < v; });
  return piece_slope(*it, x);
}

double ShapeFunction::slope_right(double x) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const ShapePiece& p) { return v < p.bx; });
  if (it == pieces_.end()) it = std::prev(pieces_.end());
  return piece_slope(*it, x);
}

ShapeFunction build_hf(double t, std::span<const double> x, std::span<const double> h) {
  validate_nodes(t, x, h, "build_hf");
  const std::size_t n = x.size();
  std::vector<ShapePiece> pieces;
  double cursor = -kInf;

  const double r0 = root_disc(t, x[0], h[0]);
  const double y0 = x[0] - r0;
  push_piece(pieces, parabola_piece(cursor, y0));
  cursor = y0;
  push_piece(pieces, linear_piece(cursor, x[0], left_wing_slope(t, x[0], r0), x[0], h[0]));
  cursor = x[0];

  for (std::size_t c = 0; c + 1 < n; ++c) {
    const Link link = make_link(t, x[c], h[c], x[c + 1], h[c + 1]);
    if (link.chord) {
      push_piece(pieces, linear_piece(cursor, x[c + 1], link.slope_after_left, x[c], h[c]));
    } else {
      push_piece(pieces, linear_piece(cursor, link.y1, link.slope_after_left, x[c], h[c]));
      cursor = std::max(cursor, link.y1);
      push_piece(pieces, parabola_piece(cursor, link.y2));
      cursor = std::max(cursor, link.y2);
      push_piece(pieces,
                 linear_piece(cursor, x[c + 1], link.slope_before_right, x[c + 1], h[c + 1]));
    }
    cursor = x[c + 1];
  }

  const double rn = root_disc(t, x[n - 1], h[n - 1]);
  const double yn = x[n - 1] + rn;
  push_piece(pieces, linear_piece(cursor, yn, right_wing_slope(t, x[n - 1], rn), x[n - 1], h[n - 1]));
  cursor = std::max(cursor, yn);
  push_piece(pieces, parabola_piece(cursor, kInf));

  std::vector<ShapeNode> nodes;
  nodes.reserve(n);
  for (std::size_t c = 0; c < n; ++c) nodes.push_back({x[c], h[c]});
  return ShapeFunction(t, std::move(pieces), std::move(nodes));
}

double i_kpz(const ShapeFunction& shape) {
  const double t = shape.time();
  double total = 0.0;
  for (const ShapePiece& p : shape.pieces()) {
    if (p.kind != ShapePiece::Kind::linear) continue;
    if (!std::isfinite(p.a) || !std::isfinite(p.bx)) return kInf;
    total += (p.bx - p.a) * p.u * p.u / 2.0 - (p.bx * p.bx * p.bx - p.a * p.a * p.a) / (6.0 * t * t);
  }
  return total;
}

double i_kpz(double t, std::span<const double> x, std::span<const double> h) {
  return i_kpz(build_hf(t, x, h));
}

std::vector<double> i_kpz_gradient(double t, std::span<const double> x, std::span<const double> h) {
  validate_nodes(t, x, h, "i_kpz_gradient");
  std::vector<double> out;
  out.reserve(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) out.push_back(node_drop(t, x, h, c));
  return out;
}

ConcavityCheck concavity(const ShapeFunction& shape) {
  ConcavityCheck check{true, false};
  const auto pieces = shape.pieces();
  for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
    const double b = pieces[k].bx;
    const double drop = shape.slope_left(b) - shape.slope_right(b);
    if (drop < -kSlopeTolerance) check.concave = false;
  }
  for (const ShapeNode& node : shape.nodes()) {
    if (std::abs(shape.slope_left(node.x) - shape.slope_right(node.x)) <= kSlopeTolerance) {
      check.boundary = true;
    }
  }
  return check;
}

ConcavityCheck concavity(double t, std::span<const double> x, std::span<const double> h) {
  return concavity(build_hf(t, x, h));
}

std::vector<double> invert_gradient(double t, std::span<const double> x, std::span<const double> m,
                                    const InversionOptions& options) {
  if (x.size() != m.size()) throw DomainError("invert_gradient: x and m differ in length");
  for (double v : m) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("invert_gradient: m must be nonnegative");
  }
  std::vector<double> h(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) h[c] = parabola(t, x[c]);
  validate_nodes(t, x, h, "invert_gradient");
  const std::size_t n = x.size();

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (std::size_t c = 0; c < n; ++c) {
      // Raising neighbours only lowers this drop, so the current value stays a lower bracket.
      double lo = std::max(h[c], parabola(t, x[c]));
      h[c] = lo;
      if (node_drop(t, x, h, c) >= m[c]) continue;
      double width = std::max({1e-3, std::abs(lo) * 1e-3, m[c] * m[c] * t});
      double hi = lo + width;
      h[c] = hi;
      for (int k = 0; k < 2000 && node_drop(t, x, h, c) < m[c]; ++k) {
        lo = hi;
        width *= 2.0;
        hi = lo + width;
        h[c] = hi;
      }
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        h[c] = mid;
        if (node_drop(t, x, h, c) < m[c]) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      h[c] = hi;
    }
    const double r = max_residual(t, x, h, m);
    if (r <= options.tolerance) {
      newton_polish(t, x, h, m, 8);
      return h;
    }
    // Strongly coupled nodes make Gauss-Seidel slow; finish with Newton once near.
    if (sweep >= 10 && sweep % 10 == 0) {
      newton_polish(t, x, h, m, 50);
      if (max_residual(t, x, h, m) <= options.tolerance) return h;
    }
  }
  throw ConvergenceError("invert_gradient: no convergence after " +
                         std::to_string(options.max_sweeps) + " sweeps (residual " +
                         std::to_string(max_residual(t, x, h, m)) + ")");
}

ShapeFunction hopf_lax_evolve(const ShapeFunction& shape, double back_time) {
  const double t = shape.time();
  if (!(back_time >= 0.0) || !(back_time < t)) {
    throw DomainError("hopf_lax_evolve: back time " + std::to_string(back_time) +
                      " outside [0, " + std::to_string(t) + ")");
  }
  if (back_time == 0.0) return shape;
  if (!concavity(shape).concave) throw DomainError("hopf_lax_evolve: shape is not concave");
  const double s = back_time;
  const double tn = t - s;
  const double ratio = tn / t;

  std::vector<ShapePiece> pieces;
  std::vector<ShapeNode> nodes;
  double cursor = -kInf;
  for (const Run& run : linear_runs(shape)) {
    std::vector<Line> hull;
    for (Line line : run.lines) {
      line.anchor_h -= 0.5 * s * line.u * line.u;
      if (!hull.empty() && line.u >= hull.back().u) {
        // Equal slopes: keep the lower line.
        if (line.value(0.0) < hull.back().value(0.0)) hull.back() = line;
        continue;
      }
      while (hull.size() >= 2 &&
             crossing(hull[hull.size() - 2], line) <= crossing(hull[hull.size() - 2], hull.back())) {
        hull.pop_back();
      }
      hull.push_back(line);
    }
    const double left = ratio * run.left;
    const double right = ratio * run.right;
    push_piece(pieces, parabola_piece(cursor, left));
    cursor = left;
    const Line* previous = nullptr;
    for (std::size_t k = 0; k < hull.size(); ++k) {
      const double end = (k + 1 < hull.size()) ? std::min(crossing(hull[k], hull[k + 1]), right) : right;
      if (end > cursor) {
        if (previous != nullptr) {
          nodes.push_back({cursor, std::min(previous->value(cursor), hull[k].value(cursor))});
        }
        push_piece(pieces, linear_piece(cursor, end, hull[k].u, hull[k].anchor_x, hull[k].anchor_h));
        cursor = end;
        previous = &hull[k];
      }
    }
    cursor = std::max(cursor, right);
  }
  push_piece(pieces, parabola_piece(cursor, kInf));
  return ShapeFunction(tn, std::move(pieces), std::move(nodes));
}

std::vector<double> ShockFan::positions_at(double s) const {
  std::vector<double> out;
  out.reserve(shocks.size());
  for (const Shock& shock : shocks) out.push_back(shock.trajectory(s));
  return out;
}

ShockFan shock_fan(double t, std::span<const double> x, std::span<const double> h) {
  const ShapeFunction shape = build_hf(t, x, h);
  const auto drops = i_kpz_gradient(t, x, h);
  if (!concavity(shape).concave) throw DomainError("shock_fan: shape is not concave");
  for (std::size_t c = 0; c < drops.size(); ++c) {
    if (!(drops[c] > kSlopeTolerance)) {
      throw DomainError("shock_fan: node " + std::to_string(c) + " has no kink");
    }
  }

  const std::size_t n = x.size();
  std::vector<std::vector<Knot>> knots(n);
  std::vector<std::vector<ShockSegment>> segments(n);

  struct Front {
    std::vector<std::size_t> nodes;
    std::size_t left_line;
    std::size_t right_line;
    double s0;
    double p0;
    double v;
    double position(double s) const { return p0 + v * (s - s0); }
  };

  std::size_t next_node = 0;
  for (const Run& run : linear_runs(shape)) {
    const auto& lines = run.lines;
    std::vector<Front> fronts;
    for (std::size_t j = 0; j + 1 < lines.size(); ++j) {
      const std::size_t c = next_node++;
      fronts.push_back({{c}, j, j + 1, 0.0, x[c], 0.5 * (lines[j].u + lines[j + 1].u)});
      knots[c].push_back({0.0, x[c]});
    }
    auto close_segments = [&](const Front& f, double end) {
      for (std::size_t c : f.nodes) {
        segments[c].push_back({f.s0, end, lines[f.left_line].u, lines[f.right_line].u, f.v});
      }
    };

    while (fronts.size() > 1) {
      std::vector<double> meet(fronts.size() - 1, kInf);
      double earliest = kInf;
      for (std::size_t k = 0; k + 1 < fronts.size(); ++k) {
        const Front& a = fronts[k];
        const Front& b = fronts[k + 1];
        if (a.v > b.v) {
          const double s0 = std::max(a.s0, b.s0);
          meet[k] = s0 + std::max(b.position(s0) - a.position(s0), 0.0) / (a.v - b.v);
          earliest = std::min(earliest, meet[k]);
        }
      }
      if (!(earliest < t * (1.0 - 1e-10))) break;
      const double window = 1e-10 * std::max(earliest, 1e-300);
      std::vector<Front> next;
      std::size_t k = 0;
      while (k < fronts.size()) {
        std::size_t j = k;
        while (j + 1 < fronts.size() && meet[j] - earliest <= window) ++j;
        if (j == k) {
          next.push_back(fronts[k]);
          ++k;
          continue;
        }
        double sum = 0.0;
        Front merged{{}, fronts[k].left_line, fronts[j].right_line, earliest, 0.0, 0.0};
        for (std::size_t g = k; g <= j; ++g) {
          close_segments(fronts[g], earliest);
          sum += fronts[g].position(earliest);
          merged.nodes.insert(merged.nodes.end(), fronts[g].nodes.begin(), fronts[g].nodes.end());
        }
        merged.p0 = sum / static_cast<double>(j - k + 1);
        merged.v = 0.5 * (lines[merged.left_line].u + lines[merged.right_line].u);
        for (std::size_t c : merged.nodes) knots[c].push_back({earliest, merged.p0});
        next.push_back(std::move(merged));
        k = j + 1;
      }
      fronts = std::move(next);
    }
    for (const Front& f : fronts) {
      close_segments(f, t);
      for (std::size_t c : f.nodes) knots[c].push_back({t, f.position(t)});
    }
  }
  if (next_node != n) throw DomainError("shock_fan: nodes do not match the kinks of the shape");

  ShockFan fan;
  fan.horizon = t;
  for (std::size_t c = 0; c < n; ++c) {
    fan.shocks.push_back({c, PiecewiseLinear(std::move(knots[c])), std::move(segments[c])});
  }
  return fan;
}

double DualityResult::residual() const { return std::abs(from_clusters - from_legendre); }

DualityResult duality_check(double t, std::span<const double> x, std::span<const double> m) {
  if (x.size() != m.size()) throw DomainError("duality_check: x and m differ in length");
  std::vector<double> xs;
  std::vector<double> ms;
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (!(m[c] >= 0.0) || !std::isfinite(m[c])) throw DomainError("duality_check: m must be nonnegative");
    if (m[c] > 0.0) {
      xs.push_back(x[c]);
      ms.push_back(m[c]);
    }
  }
  if (xs.empty()) return {0.0, 0.0, {}};
  DualityResult result{};
  result.from_clusters = lyapunov_exponent(0.0, t, xs, ms);
  result.h = invert_gradient(t, xs, ms);
  double dot = 0.0;
  for (std::size_t c = 0; c < ms.size(); ++c) dot += ms[c] * result.h[c];
  result.from_legendre = dot - i_kpz(t, xs, result.h);
  return result;
}

DecompositionReport intermediate_decomposition(double t, std::span<const double> x,
                                               std::span<const double> m, double t_mid) {
  if (!(t_mid > 0.0) || !(t_mid <= t)) {
    throw DomainError("intermediate_decomposition: t' must lie in (0, t]");
  }
  const double back = t - t_mid;
  const auto opt = optimal_deviation(x, m, 0.0, t);
  for (const MergeEvent& e : opt.tree.events) {
    if (std::abs(e.time - back) <= 1e-9 * t) {
      throw DomainError("intermediate_decomposition: t' = " + std::to_string(t_mid) +
                        " falls on a merge at back time " + std::to_string(e.time));
    }
  }
  const auto split = group_positions(opt.deviation.positions_at(back), m);

  DecompositionReport report;
  report.back_time = back;
  report.positions = split.positions;
  report.masses = split.masses;
  report.groups = split.groups;
  report.lhs = mom_functional(opt.deviation, {0.0, t});
  report.rhs = lyapunov_exponent(0.0, t_mid, split.positions, split.masses);
  if (back > 0.0) {
    for (std::size_t a = 0; a < split.groups.size(); ++a) {
      std::vector<double> gx;
      std::vector<double> gm;
      for (std::size_t c : split.groups[a]) {
        gx.push_back(x[c]);
        gm.push_back(m[c]);
      }
      report.rhs += lyapunov_exponent(split.positions[a], back, gx, gm);
    }
  }
  report.decomposition_residual = std::abs(report.lhs - report.rhs);

  const auto h = invert_gradient(t, x, m);
  const ShapeFunction evolved = hopf_lax_evolve(build_hf(t, x, h), back);
  for (double p : split.positions) report.evolved_values.push_back(evolved(p));
  report.gradient = i_kpz_gradient(t_mid, split.positions, report.evolved_values);
  report.gradient_residual = 0.0;
  for (std::size_t a = 0; a < split.masses.size(); ++a) {
    report.gradient_residual =
        std::max(report.gradient_residual, std::abs(report.gradient[a] - split.masses[a]));
  }
  return report;
}

double legendre_potential(double t, std::span<const double> x, std::span<const double> h,
                          double t_mid) {
  if (!(t_mid > 0.0) || !(t_mid <= t)) throw DomainError("legendre_potential: t' must lie in (0, t]");
  const double back = t - t_mid;
  const auto fan = shock_fan(t, x, h);
  const auto m = i_kpz_gradient(t, x, h);
  const ShapeFunction evolved = hopf_lax_evolve(build_hf(t, x, h), back);
  const auto split = group_positions(fan.positions_at(back), m);
  double g = -i_kpz(evolved);
  for (std::size_t a = 0; a < split.positions.size(); ++a) {
    g += split.masses[a] * evolved(split.positions[a]);
  }
  return g;
}

}  // namespace sticky
