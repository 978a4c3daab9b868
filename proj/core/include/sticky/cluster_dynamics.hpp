#ifndef STICKY_CLUSTER_DYNAMICS_HPP_
#define STICKY_CLUSTER_DYNAMICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "sticky/deviation.hpp"

namespace sticky {

struct MergeEvent {
  double time;
  std::vector<std::size_t> clusters;  // original cluster indices in the merged group, ascending
  double mass;                        // mass of the merged group
  double velocity;                    // velocity of the merged group after the event
  double position;                    // common position at the event
};

struct MergeTree {
  std::size_t cluster_count = 0;
  double horizon = 0.0;
  std::vector<MergeEvent> events;  // sorted by time
};

// Closed index interval [first, last] of clusters.
struct Branch {
  std::size_t first;
  std::size_t last;

  std::size_t size() const { return last - first + 1; }
  bool contains(std::size_t c) const { return first <= c && c <= last; }
  friend bool operator==(const Branch&, const Branch&) = default;
};

/// phi_c = (sum of masses to the right of c - sum of masses to the left of c) / 2.
std::vector<double> inertia_velocities(std::span<const double> masses);

struct ClusterEvolution {
  ClusteringDeviation deviation;
  MergeTree tree;
};

/// Exact event-driven sticky dynamics: clusters start at `start_positions` with
/// the inertia velocities, move ballistically, and merge with momentum
/// conservation when they meet. Meetings whose times agree within 1e-10
/// (relative) are handled as one event step.
ClusterEvolution evolve_inertia_clusters(std::span<const double> start_positions,
                                         std::span<const double> masses, double horizon);

/// Groups clusters that merged strictly inside (0, horizon). A merge exactly at
/// the horizon does not join branches.
std::vector<Branch> branch_partition(const MergeTree& tree, std::size_t n, double horizon);

struct OptimalDeviation {
  ClusteringDeviation deviation;
  MergeTree tree;                      // events of the drifted clusters
  std::vector<Branch> branches;
  std::vector<double> drifts;          // one constant drift per branch
  std::vector<double> inertia_velocities;
  double terminal_point;
};

/// Inertia clusters plus, on every branch, the constant drift that lands the
/// branch at `terminal_point` at the horizon.
OptimalDeviation optimal_deviation(std::span<const double> start_positions,
                                   std::span<const double> masses, double terminal_point,
                                   double horizon);

}  // namespace sticky

#endif  // STICKY_CLUSTER_DYNAMICS_HPP_
