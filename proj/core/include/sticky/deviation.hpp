#ifndef STICKY_DEVIATION_HPP_
#define STICKY_DEVIATION_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "sticky/measure.hpp"

namespace sticky {

struct Knot {
  double time;
  double position;
};

/// Continuous piecewise-linear function of time, given by knots with strictly
/// increasing times. Evaluation outside the knot range clamps to the end values.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  explicit PiecewiseLinear(std::vector<Knot> knots);

  double operator()(double s) const;
  // Slope of the segment containing s; at a knot the segment to the right is used
  // (the left one at the final knot).
  double slope_at(double s) const;

  std::span<const Knot> knots() const { return knots_; }
  double start_time() const { return knots_.front().time; }
  double end_time() const { return knots_.back().time; }

 private:
  std::size_t segment_index(double s) const;

  std::vector<Knot> knots_;
};

/// A finite sum of moving point masses  sum_c m_c delta_{x_c(s)}  on [0, horizon],
/// with piecewise-linear, ordered cluster trajectories.
class ClusteringDeviation {
 public:
  ClusteringDeviation(std::vector<double> masses, std::vector<PiecewiseLinear> trajectories,
                      double horizon);

  std::size_t size() const { return masses_.size(); }
  std::span<const double> masses() const { return masses_; }
  std::span<const PiecewiseLinear> trajectories() const { return trajectories_; }
  const PiecewiseLinear& trajectory(std::size_t c) const { return trajectories_[c]; }
  double horizon() const { return horizon_; }
  double total_mass() const { return total_mass_; }

  std::vector<double> positions_at(double s) const;
  AtomicMeasure snapshot(double s) const;
  // Sorted union of all knot times, always containing 0 and the horizon.
  std::vector<double> knot_times() const;

 private:
  std::vector<double> masses_;
  std::vector<PiecewiseLinear> trajectories_;
  double horizon_;
  double total_mass_;
};

// Positions multiplied by position_factor and masses by mass_factor (both > 0).
ClusteringDeviation rescale(const ClusteringDeviation& dev, double position_factor,
                            double mass_factor);

// (1/m) S_m applied at every time: positions and masses divided by the total mass.
ClusteringDeviation normalize_scaling(const ClusteringDeviation& dev);

}  // namespace sticky

#endif  // STICKY_DEVIATION_HPP_
