#include <gtest/gtest.h>

#include <cmath>

#include "instances.hpp"
#include "sticky/deviation.hpp"
#include "sticky/error.hpp"
#include "sticky/measure.hpp"

namespace sticky {
namespace {

AtomicMeasure two_point() { return AtomicMeasure({{-1.0, 0.5}, {1.0, 0.5}}); }
AtomicMeasure three_point() {
  return AtomicMeasure({{-1.0, 1.0 / 3.0}, {0.0, 1.0 / 3.0}, {1.0, 1.0 / 3.0}});
}

void expect_atoms(const AtomicMeasure& m, const std::vector<Atom>& want, double tol = 1e-15) {
  ASSERT_EQ(m.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_NEAR(m.atoms()[k].position, want[k].position, tol) << "atom " << k;
    EXPECT_NEAR(m.atoms()[k].mass, want[k].mass, tol) << "atom " << k;
  }
}

TEST(AtomicMeasure, RejectsNonPositiveMassAndCoalesces) {
  EXPECT_THROW(AtomicMeasure({{0.0, 0.0}}), DomainError);
  EXPECT_THROW(AtomicMeasure({{0.0, -1.0}}), DomainError);
  EXPECT_THROW(AtomicMeasure(std::vector<Atom>{}), DomainError);
  const AtomicMeasure m({{1.0, 0.25}, {0.0, 0.5}, {1.0 + 1e-14, 0.25}});
  expect_atoms(m, {{0.0, 0.5}, {1.0, 0.5}});
}

TEST(CdfAt, Examples) {
  EXPECT_EQ(cdf_at(AtomicMeasure::dirac(0.0), -1.0), 0.0);
  EXPECT_EQ(cdf_at(AtomicMeasure::dirac(0.0), 0.0), 1.0);
  EXPECT_EQ(cdf_at(two_point(), 0.0), 0.5);
}

TEST(Quantile, Examples) {
  EXPECT_EQ(quantile(two_point(), 0.3), -1.0);
  EXPECT_EQ(quantile(two_point(), 0.5), -1.0);
  EXPECT_EQ(quantile(two_point(), 0.7), 1.0);
  EXPECT_THROW(quantile(two_point(), 1.5), DomainError);
  EXPECT_THROW(quantile(two_point(), -0.1), DomainError);
}

TEST(Quantile, ViewRoundTrip) {
  testing::Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const AtomicMeasure m = testing::random_measure(rng);
    EXPECT_EQ(from_quantile_view(quantile_view(m)).size(), m.size());
    expect_atoms(from_quantile_view(quantile_view(m)),
                 std::vector<Atom>(m.atoms().begin(), m.atoms().end()), 1e-14);
    for (const Atom& a : m.atoms()) EXPECT_EQ(quantile(m, cdf_at(m, a.position)), a.position);
  }
}

TEST(SgnDrift, Examples) {
  EXPECT_EQ(sgn_drift(AtomicMeasure::dirac(0.0), -1.0), 0.5);
  EXPECT_EQ(sgn_drift(AtomicMeasure::dirac(0.0), 1.0), -0.5);
  EXPECT_EQ(sgn_drift(AtomicMeasure::dirac(0.0), 0.0), 0.0);
  EXPECT_NEAR(sgn_drift(three_point(), 0.0), 0.0, 1e-16);
}

TEST(W1Distance, Examples) {
  EXPECT_NEAR(w1_distance(AtomicMeasure::dirac(-0.5), AtomicMeasure::dirac(2.0)), 2.5, 1e-15);
  EXPECT_NEAR(w1_distance(AtomicMeasure({{0.0, 0.5}, {1.0, 0.5}}), AtomicMeasure::dirac(0.0)), 0.5,
              1e-15);
  EXPECT_EQ(w1_distance(three_point(), three_point()), 0.0);
  EXPECT_THROW(w1_distance(AtomicMeasure::dirac(0.0, 1.0), AtomicMeasure::dirac(0.0, 2.0)),
               MassMismatchError);
}

TEST(WeakDistance, Examples) {
  EXPECT_EQ(weak_distance(AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(0.0)).value, 0.0);
  const auto w = weak_distance(AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(0.5));
  EXPECT_NEAR(w.value, 0.5 * (1.0 - std::ldexp(1.0, -kDefaultWeakTerms)), 1e-15);
  EXPECT_EQ(w.truncation_tail, std::ldexp(1.0, -kDefaultWeakTerms));
  const auto far = weak_distance(AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(1e3));
  EXPECT_LE(far.value, 1.0);
  EXPECT_GE(far.value, 1.0 - std::ldexp(1.0, -kDefaultWeakTerms));
  const int k = 10;
  EXPECT_NEAR(weak_distance(AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(0.5), k).value,
              0.5 * (1.0 - std::ldexp(1.0, -k)), 1e-15);
}

TEST(Metrics, AxiomsOnRandomTriples) {
  testing::Rng rng(11);
  for (int k = 0; k < 300; ++k) {
    const auto a = testing::with_total_mass(testing::random_measure(rng), 1.0);
    const auto b = testing::with_total_mass(testing::random_measure(rng), 1.0);
    const auto c = testing::with_total_mass(testing::random_measure(rng), 1.0);
    EXPECT_NEAR(w1_distance(a, b), w1_distance(b, a), 1e-14);
    EXPECT_LE(w1_distance(a, c), w1_distance(a, b) + w1_distance(b, c) + 1e-13);
    const auto wab = weak_distance(a, b);
    EXPECT_NEAR(wab.value, weak_distance(b, a).value, 1e-14);
    EXPECT_LE(weak_distance(a, c).value, wab.value + weak_distance(b, c).value + 1e-13);
    EXPECT_LE(wab.value, w1_distance(a, b) + wab.truncation_tail + 1e-14);
    EXPECT_EQ(w1_distance(a, a), 0.0);
  }
}

TEST(DivideMeasure, Examples) {
  const double half[] = {0.5, 0.5};
  auto p = divide_measure(AtomicMeasure::dirac(0.0), half);
  expect_atoms(p[0], {{0.0, 0.5}});
  expect_atoms(p[1], {{0.0, 0.5}});
  p = divide_measure(three_point(), half);
  expect_atoms(p[0], {{-1.0, 1.0 / 3.0}, {0.0, 1.0 / 6.0}});
  expect_atoms(p[1], {{0.0, 1.0 / 6.0}, {1.0, 1.0 / 3.0}});
  p = divide_measure(AtomicMeasure({{-3, 0.25}, {-1, 0.25}, {1, 0.25}, {3, 0.25}}), half);
  expect_atoms(p[0], {{-3.0, 0.25}, {-1.0, 0.25}});
  expect_atoms(p[1], {{1.0, 0.25}, {3.0, 0.25}});
  const double wrong[] = {0.5, 0.6};
  EXPECT_THROW(divide_measure(three_point(), wrong), MassMismatchError);
  const double zero[] = {1.0, 0.0};
  EXPECT_THROW(divide_measure(three_point(), zero), DomainError);
}

TEST(DivideMeasure, PiecesRecompose) {
  testing::Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto m = testing::random_measure(rng);
    const auto parts = std::uniform_int_distribution<int>(1, 5)(rng);
    std::vector<double> masses;
    for (int j = 0; j < parts; ++j) masses.push_back(testing::uniform(rng, 0.1, 1.0));
    double sum = 0.0;
    for (double v : masses) sum += v;
    for (double& v : masses) v *= m.total_mass() / sum;
    const auto pieces = divide_measure(m, masses);
    ASSERT_EQ(pieces.size(), masses.size());
    std::vector<Atom> all;
    for (std::size_t j = 0; j < pieces.size(); ++j) {
      EXPECT_NEAR(pieces[j].total_mass(), masses[j], 1e-13 * m.total_mass());
      for (const Atom& a : pieces[j].atoms()) all.push_back(a);
      if (j > 0) {
        EXPECT_LE(pieces[j - 1].max_position(), pieces[j].min_position());
      }
    }
    const AtomicMeasure recomposed(all);
    ASSERT_EQ(recomposed.size(), m.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
      EXPECT_EQ(recomposed.atoms()[j].position, m.atoms()[j].position);
      EXPECT_NEAR(recomposed.atoms()[j].mass, m.atoms()[j].mass, 1e-13 * m.total_mass());
    }
  }
}

TEST(ScaleMeasure, Examples) {
  expect_atoms(scale_measure(AtomicMeasure::dirac(2.0), 3.0), {{6.0, 1.0}});
  expect_atoms(scale_measure(two_point(), 2.0), {{-2.0, 0.5}, {2.0, 0.5}});
  testing::Rng rng(2);
  const auto m = testing::random_measure(rng);
  const auto back = scale_measure(scale_measure(m, 3.7), 1.0 / 3.7);
  expect_atoms(back, std::vector<Atom>(m.atoms().begin(), m.atoms().end()), 1e-15 * 4.0);
  EXPECT_THROW(scale_measure(m, 0.0), DomainError);
  const auto n = normalize_scaling(AtomicMeasure({{-1.0, 1.0}, {3.0, 1.0}}));
  expect_atoms(n, {{-0.5, 0.5}, {1.5, 0.5}});
}

TEST(ClusterApproximate, Examples) {
  const MeasurePath dirac_path{{0.0, AtomicMeasure::dirac(0.0)}, {1.0, AtomicMeasure::dirac(0.0)}};
  auto dev = cluster_approximate(dirac_path, 4);
  ASSERT_EQ(dev.size(), 4u);
  for (double x : dev.positions_at(0.5)) EXPECT_EQ(x, 0.0);

  const MeasurePath two{{0.0, two_point()}, {1.0, two_point()}};
  dev = cluster_approximate(two, 2);
  EXPECT_EQ(dev.positions_at(0.3), (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(dev.masses()[0], 0.5);

  const MeasurePath three{{0.0, three_point()}, {2.0, three_point()}};
  dev = cluster_approximate(three, 2);
  EXPECT_NEAR(dev.positions_at(1.0)[0], -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(dev.positions_at(1.0)[1], 2.0 / 3.0, 1e-15);
  EXPECT_THROW(cluster_approximate(three, 0), DomainError);
}

TEST(ClusterApproximate, ConvergesOnSmoothPath) {
  // Path of n_fine equal atoms uniformly spread, widening in time.
  auto sample = [](double s) {
    std::vector<Atom> atoms;
    const int fine = 256;
    for (int k = 0; k < fine; ++k) {
      const double q = (k + 0.5) / fine;
      atoms.push_back({(1.0 + s) * std::tan(3.0 * (q - 0.5)), 1.0 / fine});
    }
    return AtomicMeasure(atoms);
  };
  MeasurePath path;
  for (int k = 0; k <= 4; ++k) path.push_back({0.25 * k, sample(0.25 * k)});
  double previous = 1e300;
  for (std::size_t n : {2u, 4u, 8u, 16u, 32u}) {
    const auto dev = cluster_approximate(path, n);
    double worst = 0.0;
    for (const auto& [s, m] : path) {
      const auto approx = dev.snapshot(s);
      worst = std::max(worst, w1_distance(approx, m));
    }
    EXPECT_LT(worst, previous) << "n=" << n;
    previous = worst;
  }
}

}  // namespace
}  // namespace sticky
