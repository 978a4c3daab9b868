#include "sticky/cluster_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sticky/error.hpp"

namespace sticky {

namespace {

constexpr double kSimultaneityTolerance = 1e-10;

struct Group {
  std::size_t first;
  std::size_t last;
  double mass;
  double anchor_time;
  double anchor_position;
  double velocity;

  double position(double t) const { return anchor_position + velocity * (t - anchor_time); }
};

void validate_start(std::span<const double> x, std::span<const double> m, double horizon) {
  if (m.empty()) throw DomainError("at least one cluster is required");
  if (x.size() != m.size()) {
    throw DomainError("start positions and masses differ in length (" + std::to_string(x.size()) +
                      " vs " + std::to_string(m.size()) + ")");
  }
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (!std::isfinite(x[c])) throw DomainError("start positions must be finite");
    if (!(m[c] > 0.0) || !std::isfinite(m[c])) throw DomainError("masses must be positive");
    if (c > 0 && !(x[c] > x[c - 1])) {
      throw DomainError("start positions must be strictly increasing (x[" + std::to_string(c - 1) +
                        "] >= x[" + std::to_string(c) + "])");
    }
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
}

void append_knot(std::vector<Knot>& knots, double time, double position) {
  if (!knots.empty() && time <= knots.back().time) {
    knots.back().position = position;
  } else {
    knots.push_back({time, position});
  }
}

}  // namespace

std::vector<double> inertia_velocities(std::span<const double> masses) {
  if (masses.empty()) throw DomainError("inertia_velocities: empty mass list");
  double total = 0.0;
  for (double m : masses) {
    if (!(m > 0.0)) throw DomainError("inertia_velocities: masses must be positive");
    total += m;
  }
  std::vector<double> phi;
  phi.reserve(masses.size());
  double left = 0.0;
  for (double m : masses) {
    const double right = total - left - m;
    phi.push_back(0.5 * (right - left));
    left += m;
  }
  return phi;
}

ClusterEvolution evolve_inertia_clusters(std::span<const double> start_positions,
                                         std::span<const double> masses, double horizon) {
  validate_start(start_positions, masses, horizon);
  const std::size_t n = masses.size();
  const auto phi = inertia_velocities(masses);

  std::vector<Group> groups;
  groups.reserve(n);
  std::vector<std::vector<Knot>> knots(n);
  for (std::size_t c = 0; c < n; ++c) {
    groups.push_back({c, c, masses[c], 0.0, start_positions[c], phi[c]});
    knots[c].push_back({0.0, start_positions[c]});
  }

  MergeTree tree;
  tree.cluster_count = n;
  tree.horizon = horizon;

  while (groups.size() > 1) {
    std::vector<double> meet(groups.size() - 1, std::numeric_limits<double>::infinity());
    double earliest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < groups.size(); ++k) {
      const Group& a = groups[k];
      const Group& b = groups[k + 1];
      if (a.velocity > b.velocity) {
        // Both anchors are at or before the current time; solve a(t) = b(t).
        const double t0 = std::max(a.anchor_time, b.anchor_time);
        const double gap = b.position(t0) - a.position(t0);
        meet[k] = t0 + std::max(gap, 0.0) / (a.velocity - b.velocity);
        earliest = std::min(earliest, meet[k]);
      }
    }
    if (!(earliest <= horizon)) break;

    const double window = kSimultaneityTolerance * std::max(earliest, 1e-300);
    std::vector<Group> next;
    next.reserve(groups.size());
    std::size_t k = 0;
    while (k < groups.size()) {
      std::size_t j = k;
      while (j + 1 < groups.size() && meet[j] - earliest <= window) ++j;
      if (j == k) {
        next.push_back(groups[k]);
        ++k;
        continue;
      }
      Group merged{groups[k].first, groups[j].last, 0.0, earliest, 0.0, 0.0};
      double momentum = 0.0;
      double moment = 0.0;
      for (std::size_t g = k; g <= j; ++g) {
        merged.mass += groups[g].mass;
        momentum += groups[g].mass * groups[g].velocity;
        moment += groups[g].mass * groups[g].position(earliest);
      }
      merged.velocity = momentum / merged.mass;
      merged.anchor_position = moment / merged.mass;
      MergeEvent event{earliest, {}, merged.mass, merged.velocity, merged.anchor_position};
      for (std::size_t c = merged.first; c <= merged.last; ++c) {
        event.clusters.push_back(c);
        append_knot(knots[c], earliest, merged.anchor_position);
      }
      tree.events.push_back(std::move(event));
      next.push_back(merged);
      k = j + 1;
    }
    groups = std::move(next);
  }

  for (const Group& g : groups) {
    const double end = g.position(horizon);
    for (std::size_t c = g.first; c <= g.last; ++c) append_knot(knots[c], horizon, end);
  }

  std::vector<PiecewiseLinear> trajectories;
  trajectories.reserve(n);
  for (auto& k : knots) trajectories.emplace_back(std::move(k));
  return {ClusteringDeviation(std::vector<double>(masses.begin(), masses.end()),
                              std::move(trajectories), horizon),
          std::move(tree)};
}

std::vector<Branch> branch_partition(const MergeTree& tree, std::size_t n, double horizon) {
  if (n != tree.cluster_count) {
    throw DomainError("branch_partition: tree has " + std::to_string(tree.cluster_count) +
                      " clusters, asked for " + std::to_string(n));
  }
  if (n == 0) return {};
  if (horizon > tree.horizon * (1.0 + 1e-12)) {
    throw DomainError("branch_partition: horizon exceeds the evolved time range");
  }
  std::vector<bool> joined_right(n, false);  // c and c+1 share a branch
  for (const MergeEvent& e : tree.events) {
    if (!(e.time > 0.0 && e.time < horizon)) continue;
    for (std::size_t i = 0; i + 1 < e.clusters.size(); ++i) joined_right[e.clusters[i]] = true;
  }
  std::vector<Branch> branches;
  std::size_t first = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (c + 1 == n || !joined_right[c]) {
      branches.push_back({first, c});
      first = c + 1;
    }
  }
  return branches;
}

OptimalDeviation optimal_deviation(std::span<const double> start_positions,
                                   std::span<const double> masses, double terminal_point,
                                   double horizon) {
  if (!std::isfinite(terminal_point)) throw DomainError("terminal point must be finite");
  auto inertia = evolve_inertia_clusters(start_positions, masses, horizon);
  const std::size_t n = masses.size();
  auto branches = branch_partition(inertia.tree, n, horizon);

  std::vector<double> drifts;
  std::vector<double> drift_of(n, 0.0);
  drifts.reserve(branches.size());
  for (const Branch& b : branches) {
    double mass = 0.0;
    double moment = 0.0;
    for (std::size_t c = b.first; c <= b.last; ++c) {
      mass += masses[c];
      moment += masses[c] * inertia.deviation.trajectory(c).knots().back().position;
    }
    const double d = (terminal_point - moment / mass) / horizon;
    drifts.push_back(d);
    for (std::size_t c = b.first; c <= b.last; ++c) drift_of[c] = d;
  }

  std::vector<PiecewiseLinear> trajectories;
  trajectories.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Knot> knots(inertia.deviation.trajectory(c).knots().begin(),
                            inertia.deviation.trajectory(c).knots().end());
    for (Knot& k : knots) k.position += drift_of[c] * k.time;
    knots.back().position = terminal_point;
    trajectories.emplace_back(std::move(knots));
  }

  MergeTree tree;
  tree.cluster_count = n;
  tree.horizon = horizon;
  for (const MergeEvent& e : inertia.tree.events) {
    if (!(e.time < horizon)) continue;
    MergeEvent shifted = e;
    const double d = drift_of[e.clusters.front()];
    shifted.velocity += d;
    shifted.position += d * e.time;
    tree.events.push_back(std::move(shifted));
  }

  return {ClusteringDeviation(std::vector<double>(masses.begin(), masses.end()),
                              std::move(trajectories), horizon),
          std::move(tree),
          std::move(branches),
          std::move(drifts),
          inertia_velocities(masses),
          terminal_point};
}

}  // namespace sticky
