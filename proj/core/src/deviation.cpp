#include "sticky/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sticky/error.hpp"

namespace sticky {

PiecewiseLinear::PiecewiseLinear(std::vector<Knot> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw DomainError("PiecewiseLinear: at least one knot is required");
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (!std::isfinite(knots_[k].time) || !std::isfinite(knots_[k].position)) {
      throw DomainError("PiecewiseLinear: non-finite knot");
    }
    if (k > 0 && !(knots_[k].time > knots_[k - 1].time)) {
      throw DomainError("PiecewiseLinear: knot times must be strictly increasing");
    }
  }
}

std::size_t PiecewiseLinear::segment_index(double s) const {
  // Index k of the segment [knots_[k], knots_[k+1]] containing s, preferring the right one.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), s,
                             [](double v, const Knot& k) { return v < k.time; });
  std::size_t k = static_cast<std::size_t>(it - knots_.begin());
  if (k == 0) return 0;
  if (k >= knots_.size()) return knots_.size() - 2;
  return k - 1;
}

double PiecewiseLinear::operator()(double s) const {
  if (knots_.size() == 1 || s <= knots_.front().time) return knots_.front().position;
  if (s >= knots_.back().time) return knots_.back().position;
  const std::size_t k = segment_index(s);
  const Knot& a = knots_[k];
  const Knot& b = knots_[k + 1];
  const double w = (s - a.time) / (b.time - a.time);
  return a.position + w * (b.position - a.position);
}

double PiecewiseLinear::slope_at(double s) const {
  if (knots_.size() == 1) return 0.0;
  const std::size_t k = segment_index(s);
  const Knot& a = knots_[k];
  const Knot& b = knots_[k + 1];
  return (b.position - a.position) / (b.time - a.time);
}

ClusteringDeviation::ClusteringDeviation(std::vector<double> masses,
                                         std::vector<PiecewiseLinear> trajectories, double horizon)
    : masses_(std::move(masses)),
      trajectories_(std::move(trajectories)),
      horizon_(horizon),
      total_mass_(0.0) {
  if (masses_.empty()) throw DomainError("ClusteringDeviation: no clusters");
  if (masses_.size() != trajectories_.size()) {
    throw DomainError("ClusteringDeviation: one trajectory per mass is required");
  }
  if (!(horizon_ > 0.0)) throw DomainError("ClusteringDeviation: horizon must be positive");
  for (double m : masses_) {
    if (!(m > 0.0)) throw DomainError("ClusteringDeviation: cluster masses must be positive");
    total_mass_ += m;
  }
  const double time_slack = 1e-12 * horizon_;
  for (const auto& tr : trajectories_) {
    if (tr.start_time() > time_slack || tr.end_time() < horizon_ - time_slack) {
      throw DomainError("ClusteringDeviation: trajectories must cover [0, horizon]");
    }
  }
  double scale = 1.0;
  for (const auto& tr : trajectories_) {
    for (const Knot& k : tr.knots()) scale = std::max(scale, std::abs(k.position));
  }
  const double order_slack = 1e-10 * scale;
  for (double s : knot_times()) {
    for (std::size_t c = 0; c + 1 < trajectories_.size(); ++c) {
      if (trajectories_[c](s) > trajectories_[c + 1](s) + order_slack) {
        throw DomainError("ClusteringDeviation: clusters " + std::to_string(c) + " and " +
                          std::to_string(c + 1) + " cross at s = " + std::to_string(s));
      }
    }
  }
}

std::vector<double> ClusteringDeviation::positions_at(double s) const {
  std::vector<double> out;
  out.reserve(trajectories_.size());
  for (const auto& tr : trajectories_) out.push_back(tr(s));
  return out;
}

AtomicMeasure ClusteringDeviation::snapshot(double s) const {
  std::vector<Atom> atoms;
  atoms.reserve(masses_.size());
  for (std::size_t c = 0; c < masses_.size(); ++c) atoms.push_back({trajectories_[c](s), masses_[c]});
  return AtomicMeasure(std::move(atoms));
}

std::vector<double> ClusteringDeviation::knot_times() const {
  std::vector<double> times{0.0, horizon_};
  for (const auto& tr : trajectories_) {
    for (const Knot& k : tr.knots()) {
      if (k.time > 0.0 && k.time < horizon_) times.push_back(k.time);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

ClusteringDeviation rescale(const ClusteringDeviation& dev, double position_factor,
                            double mass_factor) {
  if (!(position_factor > 0.0) || !(mass_factor > 0.0)) {
    throw DomainError("rescale: factors must be positive");
  }
  std::vector<double> masses(dev.masses().begin(), dev.masses().end());
  for (double& m : masses) m *= mass_factor;
  std::vector<PiecewiseLinear> trajectories;
  trajectories.reserve(dev.size());
  for (const auto& tr : dev.trajectories()) {
    std::vector<Knot> knots(tr.knots().begin(), tr.knots().end());
    for (Knot& k : knots) k.position *= position_factor;
    trajectories.emplace_back(std::move(knots));
  }
  return ClusteringDeviation(std::move(masses), std::move(trajectories), dev.horizon());
}

ClusteringDeviation normalize_scaling(const ClusteringDeviation& dev) {
  const double inv = 1.0 / dev.total_mass();
  return rescale(dev, inv, inv);
}

}  // namespace sticky
