#include "sticky/rate_functionals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sticky/error.hpp"

namespace sticky {

namespace {

Interval checked_interval(const ClusteringDeviation& dev, Interval iv, const char* who) {
  const double slack = 1e-12 * dev.horizon();
  if (!(iv.begin >= -slack) || !(iv.end <= dev.horizon() + slack) || !(iv.begin <= iv.end)) {
    throw DomainError(std::string(who) + ": interval [" + std::to_string(iv.begin) + ", " +
                      std::to_string(iv.end) + "] not within [0, " +
                      std::to_string(dev.horizon()) + "]");
  }
  return {std::max(iv.begin, 0.0), std::min(iv.end, dev.horizon())};
}

// Linear pieces of the deviation inside the interval.
std::vector<Interval> segments(const ClusteringDeviation& dev, Interval iv) {
  std::vector<Interval> out;
  if (iv.length() <= 0.0) return out;
  double prev = iv.begin;
  for (double s : dev.knot_times()) {
    if (s <= iv.begin) continue;
    if (s >= iv.end) break;
    out.push_back({prev, s});
    prev = s;
  }
  out.push_back({prev, iv.end});
  return out;
}

const Atom& atom_near(const AtomicMeasure& snap, double x) {
  const auto atoms = snap.atoms();
  auto it = std::lower_bound(atoms.begin(), atoms.end(), x,
                             [](const Atom& a, double v) { return a.position < v; });
  if (it == atoms.end()) return atoms.back();
  if (it != atoms.begin() && x - std::prev(it)->position < it->position - x) return *std::prev(it);
  return *it;
}

// Sgn[nu](x_c) for each cluster, own atom excluded.
std::vector<double> cluster_drifts(const ClusteringDeviation& dev, double s) {
  const AtomicMeasure snap = dev.snapshot(s);
  std::vector<double> out;
  out.reserve(dev.size());
  for (double x : dev.positions_at(s)) out.push_back(sgn_drift(snap, atom_near(snap, x).position));
  return out;
}

}  // namespace

RateBreakdown rateq_clustering(const ClusteringDeviation& dev, Interval interval) {
  const Interval iv = checked_interval(dev, interval, "rateq_clustering");
  RateBreakdown result;
  result.per_cluster.assign(dev.size(), 0.0);
  const auto masses = dev.masses();
  for (const Interval& seg : segments(dev, iv)) {
    const double mid = 0.5 * (seg.begin + seg.end);
    const auto drift = cluster_drifts(dev, mid);
    double sum = 0.0;
    for (std::size_t c = 0; c < dev.size(); ++c) {
      const double dv = dev.trajectory(c).slope_at(mid) - drift[c];
      const double part = seg.length() * 0.5 * masses[c] * dv * dv;
      result.per_cluster[c] += part;
      sum += part;
    }
    result.per_segment.push_back({seg, sum});
    result.total += sum;
  }
  return result;
}

RateBreakdown rateq_clustering(const ClusteringDeviation& dev) {
  return rateq_clustering(dev, {0.0, dev.horizon()});
}

double rateq_optimal(const MergeTree& tree, std::span<const double> masses, double horizon,
                     std::span<const double> drifts) {
  const auto branches = branch_partition(tree, masses.size(), horizon);
  if (branches.size() != drifts.size()) {
    throw DomainError("rateq_optimal: " + std::to_string(drifts.size()) + " drifts for " +
                      std::to_string(branches.size()) + " branches");
  }
  double total = 0.0;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    double mass = 0.0;
    for (std::size_t c = branches[b].first; c <= branches[b].last; ++c) mass += masses[c];
    total += horizon * 0.5 * mass * drifts[b] * drifts[b];
  }
  return total;
}

double mom_functional(const ClusteringDeviation& dev, Interval interval) {
  const Interval iv = checked_interval(dev, interval, "mom_functional");
  const auto masses = dev.masses();
  double total = 0.0;
  for (const Interval& seg : segments(dev, iv)) {
    const double mid = 0.5 * (seg.begin + seg.end);
    double cubes = 0.0;
    const AtomicMeasure snap = dev.snapshot(mid);
    for (const Atom& a : snap.atoms()) cubes += a.mass * a.mass * a.mass / 24.0;
    double kinetic = 0.0;
    for (std::size_t c = 0; c < dev.size(); ++c) {
      const double v = dev.trajectory(c).slope_at(mid);
      kinetic += 0.5 * masses[c] * v * v;
    }
    total += seg.length() * (cubes - kinetic);
  }
  return total;
}

double pair_energy(const ClusteringDeviation& dev, double s) {
  const AtomicMeasure snap = dev.snapshot(s);
  double energy = 0.0;
  for (const Atom& a : snap.atoms()) energy -= a.mass * a.position * sgn_drift(snap, a.position);
  return energy;
}

IdentityCheck mom_identity_check(const ClusteringDeviation& dev) {
  const double t = dev.horizon();
  const double m = dev.total_mass();
  const double lhs = t * m * m * m / 24.0 + pair_energy(dev, t) - pair_energy(dev, 0.0) -
                     rateq_clustering(dev).total;
  return {lhs, mom_functional(dev, {0.0, t})};
}

double transition_cost(const AtomicMeasure& start, const AtomicMeasure& end, Interval interval) {
  const double len = interval.length();
  if (!(len > 0.0)) throw DomainError("transition_cost: interval must have positive length");
  const double scale = std::max(start.total_mass(), end.total_mass());
  if (std::abs(start.total_mass() - end.total_mass()) > 1e-12 * scale) {
    throw MassMismatchError("transition_cost: total masses differ");
  }
  const auto v1 = quantile_view(start);
  const auto v2 = quantile_view(end);
  std::size_t i = 0;
  std::size_t j = 0;
  double level = 0.0;
  double integral = 0.0;
  const double eps = 1e-15 * scale;
  while (i < v1.values.size() && j < v2.values.size()) {
    const double next = std::min(v1.breakpoints[i + 1], v2.breakpoints[j + 1]);
    if (next > level) {
      const double g = std::abs(v2.values[j] - v1.values[i]) / len + 0.5;
      integral += (next - level) * g * g;
    }
    level = std::max(level, next);
    if (v1.breakpoints[i + 1] <= level + eps) ++i;
    if (v2.breakpoints[j + 1] <= level + eps) ++j;
  }
  return 0.5 * len * integral;
}

double lyapunov_exponent(double terminal_point, double horizon,
                         std::span<const double> start_positions, std::span<const double> masses) {
  const auto opt = optimal_deviation(start_positions, masses, terminal_point, horizon);
  return mom_functional(opt.deviation, {0.0, horizon});
}

}  // namespace sticky
