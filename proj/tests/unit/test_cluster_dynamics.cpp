#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"
#include "sticky/cluster_dynamics.hpp"
#include "sticky/error.hpp"

namespace sticky {
namespace {

// Small-step sticky dynamics: each group moves at (mass right - mass left) / 2 and
// groups that cross are joined.
std::vector<double> sticky_oracle(std::vector<double> x, const std::vector<double>& m, double horizon,
                                  double dt) {
  const std::size_t n = x.size();
  std::vector<std::size_t> group(n);
  for (std::size_t c = 0; c < n; ++c) group[c] = c;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt));
  for (std::size_t k = 0; k < steps; ++k) {
    const double h = std::min(dt, horizon - dt * static_cast<double>(k));
    std::vector<double> v(n);
    for (std::size_t c = 0; c < n; ++c) {
      double left = 0.0, right = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (group[j] < group[c]) left += m[j];
        if (group[j] > group[c]) right += m[j];
      }
      v[c] = 0.5 * (right - left);
    }
    for (std::size_t c = 0; c < n; ++c) x[c] += v[c] * h;
    for (std::size_t c = 1; c < n; ++c) {
      if (group[c] != group[c - 1] && x[c] <= x[c - 1]) {
        const std::size_t old = group[c];
        double mass = 0.0, moment = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (group[j] == old || group[j] == group[c - 1]) {
            mass += m[j];
            moment += m[j] * x[j];
          }
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (group[j] == old) group[j] = group[c - 1];
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (group[j] == group[c - 1]) x[j] = moment / mass;
        }
      }
    }
  }
  return x;
}

TEST(InertiaVelocities, Examples) {
  const double half[] = {0.5, 0.5};
  EXPECT_EQ(inertia_velocities(half), (std::vector<double>{0.25, -0.25}));
  const double third[] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const auto v = inertia_velocities(third);
  EXPECT_NEAR(v[0], 1.0 / 3.0, 1e-16);
  EXPECT_NEAR(v[1], 0.0, 1e-16);
  EXPECT_NEAR(v[2], -1.0 / 3.0, 1e-16);
  const double one[] = {1.0};
  EXPECT_EQ(inertia_velocities(one), std::vector<double>{0.0});
}

TEST(EvolveInertiaClusters, TwoClustersMergeAtFour) {
  const double x[] = {-1.0, 1.0};
  const double m[] = {0.5, 0.5};
  const auto ev = evolve_inertia_clusters(x, m, 10.0);
  ASSERT_EQ(ev.tree.events.size(), 1u);
  EXPECT_NEAR(ev.tree.events[0].time, 4.0, 1e-14);
  EXPECT_NEAR(ev.tree.events[0].position, 0.0, 1e-14);
  EXPECT_EQ(ev.tree.events[0].clusters, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(ev.tree.events[0].velocity, 0.0, 1e-16);
  EXPECT_NEAR(ev.deviation.positions_at(2.0)[0], -0.5, 1e-14);
  for (double s : {4.0, 7.0, 10.0}) {
    for (double p : ev.deviation.positions_at(s)) EXPECT_NEAR(p, 0.0, 1e-14);
  }
}

TEST(EvolveInertiaClusters, TripleMergeIsOneEvent) {
  const double x[] = {-1.0, 0.0, 1.0};
  const double m[] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const auto ev = evolve_inertia_clusters(x, m, 10.0);
  ASSERT_EQ(ev.tree.events.size(), 1u);
  EXPECT_NEAR(ev.tree.events[0].time, 3.0, 1e-13);
  EXPECT_NEAR(ev.tree.events[0].position, 0.0, 1e-14);
  EXPECT_EQ(ev.tree.events[0].clusters, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(EvolveInertiaClusters, SimultaneousDisjointMerges) {
  const double x[] = {-2.0, -1.0, 1.0, 2.0};
  const double m[] = {0.25, 0.25, 0.25, 0.25};
  const auto ev = evolve_inertia_clusters(x, m, 10.0);
  ASSERT_EQ(ev.tree.events.size(), 3u);
  EXPECT_NEAR(ev.tree.events[0].time, 4.0, 1e-13);
  EXPECT_NEAR(ev.tree.events[1].time, 4.0, 1e-13);
  EXPECT_NEAR(ev.tree.events[2].time, 6.0, 1e-13);
  EXPECT_EQ(ev.tree.events[2].clusters, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_NEAR(ev.tree.events[0].position, -0.5, 1e-14);
  EXPECT_NEAR(ev.tree.events[0].velocity, 0.25, 1e-15);
}

TEST(EvolveInertiaClusters, FarApartNoMerge) {
  const double x[] = {0.0, 100.0};
  const double m[] = {0.5, 0.5};
  const auto ev = evolve_inertia_clusters(x, m, 1.0);
  EXPECT_TRUE(ev.tree.events.empty());
  for (double s : {0.0, 0.3, 1.0}) {
    const auto p = ev.deviation.positions_at(s);
    EXPECT_NEAR(p[0], s / 4.0, 1e-15);
    EXPECT_NEAR(p[1], 100.0 - s / 4.0, 1e-13);
  }
}

TEST(EvolveInertiaClusters, RejectsBadInput) {
  const double bad_x[] = {1.0, 0.0};
  const double m[] = {0.5, 0.5};
  EXPECT_THROW(evolve_inertia_clusters(bad_x, m, 1.0), DomainError);
  const double x[] = {0.0, 1.0};
  const double bad_m[] = {0.5, -0.5};
  EXPECT_THROW(evolve_inertia_clusters(x, bad_m, 1.0), DomainError);
  const double short_m[] = {1.0};
  EXPECT_THROW(evolve_inertia_clusters(x, short_m, 1.0), DomainError);
  EXPECT_THROW(evolve_inertia_clusters(x, m, 0.0), DomainError);
}

TEST(EvolveInertiaClusters, MatchesSmallStepOracle) {
  testing::Rng rng(21);
  for (int k = 0; k < 30; ++k) {
    const auto n = static_cast<std::size_t>(1 + k % 5);
    const auto pm = testing::random_point_masses(rng, n);
    const double horizon = testing::uniform(rng, 0.5, 6.0);
    const auto ev = evolve_inertia_clusters(pm.x, pm.m, horizon);
    const auto oracle = sticky_oracle(pm.x, pm.m, horizon, 1e-5);
    const auto got = ev.deviation.positions_at(horizon);
    for (std::size_t c = 0; c < n; ++c) EXPECT_NEAR(got[c], oracle[c], 1e-4) << "instance " << k;
  }
}

TEST(EvolveInertiaClusters, OrderStickinessMomentum) {
  testing::Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const auto n = static_cast<std::size_t>(2 + k % 5);
    const auto pm = testing::random_point_masses(rng, n);
    const double horizon = testing::uniform(rng, 0.5, 8.0);
    const auto ev = evolve_inertia_clusters(pm.x, pm.m, horizon);
    double mass = 0.0, com0 = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      mass += pm.m[c];
      com0 += pm.m[c] * pm.x[c];
    }
    std::vector<bool> joined(n, false);
    for (int j = 0; j <= 200; ++j) {
      const double s = horizon * j / 200.0;
      const auto p = ev.deviation.positions_at(s);
      double com = 0.0;
      for (std::size_t c = 0; c < n; ++c) com += pm.m[c] * p[c];
      EXPECT_NEAR(com, com0, 1e-12 * (1.0 + std::abs(com0)));
      for (std::size_t c = 1; c < n; ++c) {
        EXPECT_LE(p[c - 1], p[c] + 1e-12);
        const bool together = std::abs(p[c] - p[c - 1]) <= 1e-12;
        if (joined[c]) {
          EXPECT_TRUE(together) << "separated after merging";
        }
        joined[c] = joined[c] || together;
      }
    }
  }
}

TEST(BranchPartition, Examples) {
  MergeTree empty;
  empty.cluster_count = 3;
  empty.horizon = 1.0;
  EXPECT_EQ(branch_partition(empty, 3, 1.0),
            (std::vector<Branch>{{0, 0}, {1, 1}, {2, 2}}));
  const double x[] = {-1.0, 1.0};
  const double m[] = {0.5, 0.5};
  const auto tree = evolve_inertia_clusters(x, m, 10.0).tree;
  EXPECT_EQ(branch_partition(tree, 2, 10.0), (std::vector<Branch>{{0, 1}}));
  EXPECT_EQ(branch_partition(tree, 2, 3.0), (std::vector<Branch>{{0, 0}, {1, 1}}));
  // A merge exactly at the horizon does not join.
  EXPECT_EQ(branch_partition(tree, 2, 4.0), (std::vector<Branch>{{0, 0}, {1, 1}}));
  EXPECT_THROW(branch_partition(tree, 3, 10.0), DomainError);
}

TEST(OptimalDeviation, Examples) {
  {
    const double x[] = {2.0};
    const double m[] = {1.0};
    const auto opt = optimal_deviation(x, m, 0.0, 1.0);
    for (double s : {0.0, 0.25, 1.0}) EXPECT_NEAR(opt.deviation.positions_at(s)[0], 2.0 - 2.0 * s, 1e-15);
    EXPECT_EQ(opt.drifts, std::vector<double>{-2.0});
  }
  {
    const double x[] = {0.0};
    const double m[] = {1.0};
    for (double t : {0.5, 3.0}) {
      const auto opt = optimal_deviation(x, m, 0.0, t);
      EXPECT_EQ(opt.deviation.positions_at(0.5 * t)[0], 0.0);
    }
  }
  {
    const double x[] = {-1.0, 1.0};
    const double m[] = {0.5, 0.5};
    const auto opt = optimal_deviation(x, m, 0.0, 10.0);
    EXPECT_NEAR(opt.drifts[0], 0.0, 1e-16);
    EXPECT_NEAR(opt.deviation.positions_at(2.0)[0], -0.5, 1e-15);
    EXPECT_NEAR(opt.deviation.positions_at(2.0)[1], 0.5, 1e-15);
    ASSERT_EQ(opt.tree.events.size(), 1u);
    EXPECT_NEAR(opt.tree.events[0].time, 4.0, 1e-14);
    for (double p : opt.deviation.positions_at(6.0)) EXPECT_NEAR(p, 0.0, 1e-15);
  }
}

TEST(OptimalDeviation, TerminalCondition) {
  testing::Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto pm = testing::random_point_masses(rng, static_cast<std::size_t>(1 + k % 6));
    const double xi = testing::uniform(rng, -2.0, 2.0);
    const double t = testing::uniform(rng, 0.2, 6.0);
    const auto opt = optimal_deviation(pm.x, pm.m, xi, t);
    for (double p : opt.deviation.positions_at(t)) EXPECT_LE(std::abs(p - xi), 1e-12);
    for (std::size_t c = 0; c < pm.x.size(); ++c) {
      EXPECT_EQ(opt.deviation.positions_at(0.0)[c], pm.x[c]);
    }
  }
}

}  // namespace
}  // namespace sticky
