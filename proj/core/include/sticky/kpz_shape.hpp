#ifndef STICKY_KPZ_SHAPE_HPP_
#define STICKY_KPZ_SHAPE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "sticky/deviation.hpp"

namespace sticky {

// The parabola p(t, x) = -x^2 / (2t).
inline double parabola(double t, double x) { return -x * x / (2.0 * t); }

struct ShapePiece {
  enum class Kind { linear, parabola };

  Kind kind = Kind::parabola;
  double a = 0.0;   // left end, may be -inf
  double bx = 0.0;  // right end, may be +inf
  // Linear pieces: h(x) = anchor_h + u (x - anchor_x).
  double u = 0.0;
  double anchor_x = 0.0;
  double anchor_h = 0.0;

  double intercept() const { return anchor_h - u * anchor_x; }
};

struct ShapeNode {
  double x;
  double h;
};

/// Piecewise description of a profile on the real line made of straight
/// segments and arcs of p(t, .). Pieces are contiguous and cover the line.
class ShapeFunction {
 public:
  ShapeFunction(double t, std::vector<ShapePiece> pieces, std::vector<ShapeNode> nodes);

  double time() const { return t_; }
  std::span<const ShapePiece> pieces() const { return pieces_; }
  std::span<const ShapeNode> nodes() const { return nodes_; }

  double operator()(double x) const;
  double slope_left(double x) const;
  double slope_right(double x) const;

 private:
  double piece_value(const ShapePiece& p, double x) const;
  double piece_slope(const ShapePiece& p, double x) const;

  double t_;
  std::vector<ShapePiece> pieces_;
  std::vector<ShapeNode> nodes_;
};

/// The shape through the nodes (x_c, h_c): chords between neighbours where the
/// chord stays above the parabola, tangent lines and a parabolic arc otherwise,
/// tangent wings outside the outermost nodes. h(x_c) = h_c exactly.
ShapeFunction build_hf(double t, std::span<const double> x, std::span<const double> h);

/// Integral of (h'^2 - p'^2)/2 over the line, exact per piece.
double i_kpz(const ShapeFunction& shape);
double i_kpz(double t, std::span<const double> x, std::span<const double> h);

/// Slope drop h'(x_c-) - h'(x_c+) at every node.
std::vector<double> i_kpz_gradient(double t, std::span<const double> x, std::span<const double> h);

struct ConcavityCheck {
  bool concave;   // slope sequence nonincreasing within 1e-10
  bool boundary;  // some node has a slope drop within 1e-10 of zero
};

ConcavityCheck concavity(const ShapeFunction& shape);
ConcavityCheck concavity(double t, std::span<const double> x, std::span<const double> h);

struct InversionOptions {
  double tolerance = 1e-10;
  int max_sweeps = 10000;
};

/// Solves i_kpz_gradient(t, x, h) = m for h by monotone coordinate bisection,
/// finished with Newton steps on the tridiagonal system.
std::vector<double> invert_gradient(double t, std::span<const double> x, std::span<const double> m,
                                    const InversionOptions& options = {});

/// Backward Hopf-Lax evolution by back time s in [0, t): every line drops by
/// (s/2)u^2, the parabola becomes p(t - s, .), cones contract by (t - s)/t.
/// The input shape must be concave. Nodes of the result are its kinks.
ShapeFunction hopf_lax_evolve(const ShapeFunction& shape, double back_time);

struct ShockSegment {
  double begin;
  double end;
  double u_minus;
  double u_plus;
  double velocity;
};

struct Shock {
  std::size_t node;
  PiecewiseLinear trajectory;
  std::vector<ShockSegment> segments;
};

struct ShockFan {
  double horizon = 0.0;
  std::vector<Shock> shocks;  // one per node, ordered by node

  std::vector<double> positions_at(double s) const;
};

/// Kinks of the backward-evolved shape, one per node, tracked event by event
/// with Rankine-Hugoniot velocities (u- + u+)/2 in back time s in [0, t].
ShockFan shock_fan(double t, std::span<const double> x, std::span<const double> h);

struct DualityResult {
  double from_clusters;
  double from_legendre;
  std::vector<double> h;  // maximizer of m.h - I

  double residual() const;
};

/// Moment Lyapunov exponent at the origin computed twice: from the optimal
/// clusters, and as m.h - I(h) with h = invert_gradient(m). Nodes with m_c = 0
/// are dropped; `h` then covers the remaining nodes only.
DualityResult duality_check(double t, std::span<const double> x, std::span<const double> m);

struct DecompositionReport {
  double back_time;                              // t - t'
  std::vector<double> positions;                 // distinct cluster positions at back_time
  std::vector<double> masses;                    // aggregated masses
  std::vector<std::vector<std::size_t>> groups;  // original clusters per position
  double lhs;                                    // L(0 -> t (x, m))
  double rhs;                                    // L(0 -> t' (positions, masses)) + sum of group terms
  std::vector<double> evolved_values;            // evolved shape at the positions
  std::vector<double> gradient;                  // slope drops of build_hf(t', positions, values)
  double decomposition_residual;
  double gradient_residual;
};

/// Splits the optimal deviation to the origin at back time t - t_mid. Throws
/// DomainError if that time is within 1e-9 t of a merge.
DecompositionReport intermediate_decomposition(double t, std::span<const double> x,
                                               std::span<const double> m, double t_mid);

/// G(t') = sum_a m'_a h_{t'}(s_a) - I(h_{t'}), with h_{t'} the shape evolved
/// back by t - t' and s_a the distinct shock positions carrying masses m'_a.
double legendre_potential(double t, std::span<const double> x, std::span<const double> h,
                          double t_mid);

}  // namespace sticky

#endif  // STICKY_KPZ_SHAPE_HPP_
