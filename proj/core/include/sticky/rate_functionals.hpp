#ifndef STICKY_RATE_FUNCTIONALS_HPP_
#define STICKY_RATE_FUNCTIONALS_HPP_

#include <span>
#include <vector>

#include "sticky/cluster_dynamics.hpp"
#include "sticky/deviation.hpp"
#include "sticky/measure.hpp"

namespace sticky {

struct Interval {
  double begin;
  double end;
  double length() const { return end - begin; }
};

struct SegmentContribution {
  Interval interval;
  double contribution;
};

struct RateBreakdown {
  double total = 0.0;
  std::vector<SegmentContribution> per_segment;
  std::vector<double> per_cluster;
};

/// Quantile-form rate of a clustering deviation on `interval`:
///   integral of sum_c (m_c/2) (x_c' - Sgn[nu](x_c))^2,
/// evaluated exactly segment by segment between knot times.
RateBreakdown rateq_clustering(const ClusteringDeviation& dev, Interval interval);
RateBreakdown rateq_clustering(const ClusteringDeviation& dev);

/// Closed-form rate of the optimal deviation: sum over branches of t (m_b/2) d_b^2.
double rateq_optimal(const MergeTree& tree, std::span<const double> masses, double horizon,
                     std::span<const double> drifts);

/// Integral of (sum over atoms of mass^3/24 - sum_c (m_c/2) x_c'^2) over `interval`.
double mom_functional(const ClusteringDeviation& dev, Interval interval);

// Pair energy -<mu, x Sgn[mu](x)> = (1/2) sum_{c<c'} m_c m_c' |x_c - x_c'| at time s.
double pair_energy(const ClusteringDeviation& dev, double s);

struct IdentityCheck {
  double lhs;  // t m^3/24 + pair energy increment - rate
  double rhs;  // moment functional over [0, t]
};

IdentityCheck mom_identity_check(const ClusteringDeviation& dev);

/// ((s''-s')/2) * integral over a of (|Q_end(a) - Q_start(a)|/(s''-s') + 1/2)^2.
double transition_cost(const AtomicMeasure& start, const AtomicMeasure& end, Interval interval);

/// Moment Lyapunov exponent: the moment functional of the optimal deviation that
/// starts at sum_c m_c delta_{x_c} and ends at m delta_{terminal_point}.
double lyapunov_exponent(double terminal_point, double horizon,
                         std::span<const double> start_positions, std::span<const double> masses);

}  // namespace sticky

#endif  // STICKY_RATE_FUNCTIONALS_HPP_
