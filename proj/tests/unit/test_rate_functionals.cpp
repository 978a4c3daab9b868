#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"
#include "oracles.hpp"
#include "sticky/cluster_dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/rate_functionals.hpp"

namespace sticky {
namespace {

ClusteringDeviation stationary(double mass, double x, double t) {
  return ClusteringDeviation({mass}, {PiecewiseLinear({{0.0, x}, {t, x}})}, t);
}

ClusteringDeviation straight(double from, double to, double t, double mass = 1.0) {
  return ClusteringDeviation({mass}, {PiecewiseLinear({{0.0, from}, {t, to}})}, t);
}

ClusteringDeviation two_half_optimal() {
  const double x[] = {-1.0, 1.0};
  const double m[] = {0.5, 0.5};
  return optimal_deviation(x, m, 0.0, 10.0).deviation;
}

TEST(RateqClustering, Examples) {
  EXPECT_EQ(rateq_clustering(stationary(1.0, 0.0, 3.0)).total, 0.0);
  EXPECT_NEAR(rateq_clustering(straight(2.0, 0.0, 1.0)).total, 2.0, 1e-15);
  EXPECT_NEAR(rateq_clustering(two_half_optimal()).total, 0.0, 1e-15);
}

TEST(RateqClustering, BreakdownSumsAndAdditivity) {
  testing::Rng rng(31);
  for (int k = 0; k < 50; ++k) {
    const double t = testing::uniform(rng, 0.5, 4.0);
    const auto dev = testing::random_pl_clustering(rng, 1 + k % 4, 6, t);
    const auto r = rateq_clustering(dev);
    double seg = 0.0, clu = 0.0;
    for (const auto& s : r.per_segment) seg += s.contribution;
    for (double v : r.per_cluster) clu += v;
    EXPECT_NEAR(seg, r.total, 1e-12 * std::max(1.0, r.total));
    EXPECT_NEAR(clu, r.total, 1e-12 * std::max(1.0, r.total));
    const double a = testing::uniform(rng, 0.0, t);
    const double split = rateq_clustering(dev, {0.0, a}).total + rateq_clustering(dev, {a, t}).total;
    EXPECT_NEAR(split, r.total, 1e-11 * std::max(1.0, r.total));
  }
}

TEST(RateqClustering, MatchesTimeQuadrature) {
  testing::Rng rng(32);
  for (int k = 0; k < 10; ++k) {
    const auto dev = testing::random_pl_clustering(rng, 3, 4, 2.0);
    const double exact = rateq_clustering(dev).total;
    const double quad = testing::rate_quadrature(dev, 20000);
    EXPECT_NEAR(exact, quad, 2e-2 * std::max(1.0, exact)) << "instance " << k;
  }
}

TEST(RateqClustering, RejectsOutsideInterval) {
  const auto dev = stationary(1.0, 0.0, 1.0);
  EXPECT_THROW(rateq_clustering(dev, {-0.5, 0.5}), DomainError);
  EXPECT_THROW(rateq_clustering(dev, {0.0, 2.0}), DomainError);
  EXPECT_THROW(rateq_clustering(dev, {0.6, 0.5}), DomainError);
}

TEST(RateqOptimal, Examples) {
  {
    const double x[] = {2.0};
    const double m[] = {1.0};
    const auto opt = optimal_deviation(x, m, 0.0, 1.0);
    EXPECT_NEAR(rateq_optimal(opt.tree, m, 1.0, opt.drifts), 2.0, 1e-15);
  }
  {
    const double x[] = {0.0};
    const double m[] = {1.0};
    const auto opt = optimal_deviation(x, m, 0.0, 1.0);
    EXPECT_EQ(rateq_optimal(opt.tree, m, 1.0, opt.drifts), 0.0);
  }
  {
    const double x[] = {-1.0, 1.0};
    const double m[] = {0.5, 0.5};
    const auto opt = optimal_deviation(x, m, 1.0, 10.0);
    EXPECT_NEAR(rateq_optimal(opt.tree, m, 10.0, opt.drifts), 0.05, 1e-15);
  }
}

TEST(RateqOptimal, AgreesWithClusteringRate) {
  testing::Rng rng(33);
  for (int k = 0; k < 100; ++k) {
    const auto pm = testing::random_point_masses(rng, static_cast<std::size_t>(1 + k % 5));
    const double t = testing::uniform(rng, 0.2, 6.0);
    const double xi = testing::uniform(rng, -2.0, 2.0);
    const auto opt = optimal_deviation(pm.x, pm.m, xi, t);
    const double closed = rateq_optimal(opt.tree, pm.m, t, opt.drifts);
    EXPECT_NEAR(closed, rateq_clustering(opt.deviation).total, 1e-10 * std::max(1.0, closed));
  }
}

TEST(MomFunctional, Examples) {
  EXPECT_NEAR(mom_functional(stationary(1.0, 0.0, 3.0), {0.0, 3.0}), 3.0 / 24.0, 1e-16);
  EXPECT_NEAR(mom_functional(straight(2.0, 0.0, 1.0), {0.0, 1.0}), 1.0 / 24.0 - 2.0, 1e-15);
  const ClusteringDeviation pair({0.5, 0.5},
                                 {PiecewiseLinear({{0.0, -1.0}, {1.0, -1.0}}),
                                  PiecewiseLinear({{0.0, 1.0}, {1.0, 1.0}})},
                                 1.0);
  EXPECT_NEAR(mom_functional(pair, {0.0, 1.0}), 1.0 / 96.0, 1e-17);
}

TEST(MomIdentity, Examples) {
  const auto id = mom_identity_check(stationary(1.0, 0.0, 2.0));
  EXPECT_NEAR(id.lhs, 2.0 / 24.0, 1e-16);
  EXPECT_NEAR(id.rhs, 2.0 / 24.0, 1e-16);
  const auto opt = mom_identity_check(two_half_optimal());
  EXPECT_NEAR(opt.lhs, opt.rhs, 1e-10);
  EXPECT_NEAR(opt.rhs, 1.0 / 6.0, 1e-14);
}

TEST(MomIdentity, RandomThreeClusterDeviations) {
  testing::Rng rng(34);
  for (int k = 0; k < 50; ++k) {
    const auto dev = testing::random_pl_clustering(rng, 3, 7, testing::uniform(rng, 0.3, 4.0));
    const auto id = mom_identity_check(dev);
    EXPECT_LE(std::abs(id.lhs - id.rhs), 1e-9);
  }
}

TEST(PairEnergy, EqualsHalfPairwiseDistances) {
  testing::Rng rng(35);
  for (int k = 0; k < 20; ++k) {
    const auto dev = testing::random_pl_clustering(rng, 4, 5, 1.0);
    const double s = testing::uniform(rng, 0.0, 1.0);
    const auto p = dev.positions_at(s);
    double direct = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
      for (std::size_t b = a + 1; b < p.size(); ++b) {
        direct += 0.5 * dev.masses()[a] * dev.masses()[b] * std::abs(p[a] - p[b]);
      }
    }
    EXPECT_NEAR(pair_energy(dev, s), direct, 1e-13);
  }
}

TEST(ScalingIdentity, RateScalesWithInverseCube) {
  testing::Rng rng(36);
  for (int k = 0; k < 50; ++k) {
    const auto dev = testing::random_pl_clustering(rng, 1 + k % 4, 5, testing::uniform(rng, 0.5, 3.0));
    const double m = dev.total_mass();
    const double r = rateq_clustering(dev).total;
    const double scaled = rateq_clustering(normalize_scaling(dev)).total;
    EXPECT_NEAR(scaled, r / (m * m * m), 1e-10 * std::max(1e-300, r / (m * m * m)));
  }
}

TEST(TransitionCost, Examples) {
  const auto d0 = AtomicMeasure::dirac(0.0);
  EXPECT_NEAR(transition_cost(d0, d0, {0.0, 2.5}), 2.5 / 8.0, 1e-16);
  EXPECT_NEAR(transition_cost(d0, AtomicMeasure::dirac(1.0), {0.0, 1.0}), 1.125, 1e-15);
  const double ell = 1.7;
  EXPECT_NEAR(transition_cost(d0, AtomicMeasure::dirac(1e-9 * ell), {0.0, ell}), ell / 8.0, 1e-9);
  EXPECT_THROW(transition_cost(d0, AtomicMeasure::dirac(0.0, 2.0), {0.0, 1.0}), MassMismatchError);
  EXPECT_THROW(transition_cost(d0, d0, {1.0, 1.0}), DomainError);
}

TEST(LyapunovExponent, Examples) {
  for (double m : {0.5, 1.0, 2.0}) {
    const double x[] = {0.7};
    const double mass[] = {m};
    EXPECT_NEAR(lyapunov_exponent(0.7, 3.0, x, mass), 3.0 * m * m * m / 24.0, 1e-14);
  }
  const double x2[] = {2.0};
  const double m1[] = {1.0};
  EXPECT_NEAR(lyapunov_exponent(0.0, 1.0, x2, m1), 1.0 / 24.0 - 2.0, 1e-15);
  // Segment oracle: two half atoms on [0, 4] with velocities -+1/4, one unit atom on [4, 10].
  const double segment_oracle = 4.0 * (2.0 * 0.125 / 24.0) + 6.0 / 24.0 - 4.0 * 0.5 * 1.0 * 0.0625;
  const double x3[] = {-1.0, 1.0};
  const double m3[] = {0.5, 0.5};
  EXPECT_NEAR(lyapunov_exponent(0.0, 10.0, x3, m3), segment_oracle, 1e-14);
  EXPECT_NEAR(segment_oracle, 1.0 / 6.0, 1e-15);
}

}  // namespace
}  // namespace sticky
