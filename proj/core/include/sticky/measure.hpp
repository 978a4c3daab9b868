#ifndef STICKY_MEASURE_HPP_
#define STICKY_MEASURE_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace sticky {

class ClusteringDeviation;

struct Atom {
  double position;
  double mass;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite positive measure on the real line with finitely many atoms.
///
/// Atoms are kept sorted by position; positions closer than `kCoalesceTolerance`
/// are merged at construction by summing their masses.
class AtomicMeasure {
 public:
  static constexpr double kCoalesceTolerance = 1e-12;

  explicit AtomicMeasure(std::vector<Atom> atoms);

  static AtomicMeasure dirac(double position, double mass = 1.0);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double total_mass() const { return total_mass_; }
  double min_position() const { return atoms_.front().position; }
  double max_position() const { return atoms_.back().position; }

  // Mass located exactly at x (after coalescing), zero if x is not an atom.
  double mass_at(double x) const;

  friend bool operator==(const AtomicMeasure&, const AtomicMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
  double total_mass_ = 0.0;
};

/// The quantile function of an atomic measure: Q(a) = values[j] for a in
/// (breakpoints[j], breakpoints[j+1]].
struct QuantileView {
  std::vector<double> breakpoints;  // 0 = a_0 < a_1 < ... < a_k = total mass
  std::vector<double> values;       // one position per slab, nondecreasing
};

QuantileView quantile_view(const AtomicMeasure& m);
AtomicMeasure from_quantile_view(const QuantileView& view);

// F(x) = m((-inf, x]).
double cdf_at(const AtomicMeasure& m, double x);

// Q(a) = inf{x : a <= F(x)}; Q(0) is the leftmost atom. Throws DomainError for a
// outside [0, total_mass].
double quantile(const AtomicMeasure& m, double a);

// Net pairwise pull felt at x: (mass right of x - mass left of x) / 2. The mass
// sitting at x itself does not contribute.
double sgn_drift(const AtomicMeasure& m, double x);

double w1_distance(const AtomicMeasure& m1, const AtomicMeasure& m2);

struct WeakDistance {
  double value;
  // Upper bound on the omitted series tail, 2^-K.
  double truncation_tail;
};

inline constexpr int kDefaultWeakTerms = 64;

// Series metric for weak convergence, truncated after `terms` windows [-k, k].
WeakDistance weak_distance(const AtomicMeasure& m1, const AtomicMeasure& m2,
                           int terms = kDefaultWeakTerms);

// Slabs the CDF at the cumulative levels of `masses`; piece c carries mass masses[c].
std::vector<AtomicMeasure> divide_measure(const AtomicMeasure& m, std::span<const double> masses);

// Multiplies positions by factor (> 0); masses unchanged.
AtomicMeasure scale_measure(const AtomicMeasure& m, double factor);

// Multiplies every mass by factor (> 0).
AtomicMeasure scale_mass(const AtomicMeasure& m, double factor);

// (1/m) S_m: maps a measure of mass m to a probability measure with positions / m.
AtomicMeasure normalize_scaling(const AtomicMeasure& m);

// Sum of |mass difference| over the union of atoms.
double total_variation(const AtomicMeasure& m1, const AtomicMeasure& m2);

using MeasurePath = std::vector<std::pair<double, AtomicMeasure>>;

/// Approximates a sampled measure path by n equal-mass clusters sitting at the
/// barycenters of the n CDF slabs at every sample time. Sample times must be
/// strictly increasing and start at 0; the horizon is the last sample time.
ClusteringDeviation cluster_approximate(const MeasurePath& path, std::size_t n);

}  // namespace sticky

#endif  // STICKY_MEASURE_HPP_
