#include "sticky/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sticky/deviation.hpp"
#include "sticky/error.hpp"

namespace sticky {

namespace {

constexpr double kMassRelTolerance = 1e-12;

void require_equal_mass(const AtomicMeasure& m1, const AtomicMeasure& m2, const char* who) {
  const double scale = std::max(m1.total_mass(), m2.total_mass());
  if (std::abs(m1.total_mass() - m2.total_mass()) > kMassRelTolerance * scale) {
    throw MassMismatchError(std::string(who) + ": total masses differ (" +
                            std::to_string(m1.total_mass()) + " vs " +
                            std::to_string(m2.total_mass()) + ")");
  }
}

std::vector<double> cumulative_masses(const AtomicMeasure& m) {
  std::vector<double> cum;
  cum.reserve(m.size());
  double acc = 0.0;
  for (const Atom& atom : m.atoms()) {
    acc += atom.mass;
    cum.push_back(acc);
  }
  return cum;
}

}  // namespace

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("AtomicMeasure: at least one atom is required");
  for (const Atom& atom : atoms) {
    if (!std::isfinite(atom.position) || !std::isfinite(atom.mass)) {
      throw DomainError("AtomicMeasure: non-finite atom");
    }
    if (!(atom.mass > 0.0)) throw DomainError("AtomicMeasure: atom masses must be positive");
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.position < b.position; });
  atoms_.reserve(atoms.size());
  for (const Atom& atom : atoms) {
    if (!atoms_.empty() && atom.position - atoms_.back().position <= kCoalesceTolerance) {
      atoms_.back().mass += atom.mass;
    } else {
      atoms_.push_back(atom);
    }
  }
  for (const Atom& atom : atoms_) total_mass_ += atom.mass;
}

AtomicMeasure AtomicMeasure::dirac(double position, double mass) {
  return AtomicMeasure({{position, mass}});
}

double AtomicMeasure::mass_at(double x) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                             [](const Atom& a, double v) { return a.position < v; });
  if (it != atoms_.end() && it->position == x) return it->mass;
  return 0.0;
}

QuantileView quantile_view(const AtomicMeasure& m) {
  QuantileView view;
  view.breakpoints.reserve(m.size() + 1);
  view.breakpoints.push_back(0.0);
  for (double c : cumulative_masses(m)) view.breakpoints.push_back(c);
  for (const Atom& atom : m.atoms()) view.values.push_back(atom.position);
  return view;
}

AtomicMeasure from_quantile_view(const QuantileView& view) {
  if (view.breakpoints.size() != view.values.size() + 1 || view.values.empty()) {
    throw DomainError("QuantileView: need one value per slab");
  }
  std::vector<Atom> atoms;
  atoms.reserve(view.values.size());
  for (std::size_t j = 0; j < view.values.size(); ++j) {
    if (j > 0 && view.values[j] < view.values[j - 1]) {
      throw DomainError("QuantileView: values must be nondecreasing");
    }
    atoms.push_back({view.values[j], view.breakpoints[j + 1] - view.breakpoints[j]});
  }
  return AtomicMeasure(std::move(atoms));
}

double cdf_at(const AtomicMeasure& m, double x) {
  double acc = 0.0;
  for (const Atom& atom : m.atoms()) {
    if (atom.position > x) break;
    acc += atom.mass;
  }
  return acc;
}

double quantile(const AtomicMeasure& m, double a) {
  const double total = m.total_mass();
  if (a < 0.0 || a > total * (1.0 + kMassRelTolerance)) {
    throw DomainError("quantile: level " + std::to_string(a) + " outside [0, " +
                      std::to_string(total) + "]");
  }
  if (a == 0.0) return m.min_position();
  // Cumulative sums carry rounding; a level equal to a partial sum up to that
  // noise belongs to the lower atom.
  const double slack = 1e-13 * total;
  double acc = 0.0;
  for (const Atom& atom : m.atoms()) {
    acc += atom.mass;
    if (a <= acc + slack) return atom.position;
  }
  return m.max_position();
}

double sgn_drift(const AtomicMeasure& m, double x) {
  double left = 0.0;
  double right = 0.0;
  for (const Atom& atom : m.atoms()) {
    if (atom.position < x) {
      left += atom.mass;
    } else if (atom.position > x) {
      right += atom.mass;
    }
  }
  return 0.5 * (right - left);
}

double w1_distance(const AtomicMeasure& m1, const AtomicMeasure& m2) {
  require_equal_mass(m1, m2, "w1_distance");
  const auto c1 = cumulative_masses(m1);
  const auto c2 = cumulative_masses(m2);
  const auto a1 = m1.atoms();
  const auto a2 = m2.atoms();
  const double eps = 1e-15 * m1.total_mass();
  std::size_t i = 0;
  std::size_t j = 0;
  double level = 0.0;
  double result = 0.0;
  while (i < a1.size() && j < a2.size()) {
    const double next = std::min(c1[i], c2[j]);
    if (next > level) result += (next - level) * std::abs(a1[i].position - a2[j].position);
    level = std::max(level, next);
    if (c1[i] <= level + eps) ++i;
    if (c2[j] <= level + eps) ++j;
  }
  return result;
}

WeakDistance weak_distance(const AtomicMeasure& m1, const AtomicMeasure& m2, int terms) {
  require_equal_mass(m1, m2, "weak_distance");
  if (terms < 1) throw DomainError("weak_distance: need at least one term");
  // Piecewise-constant CDF difference on the merged support.
  std::vector<double> grid;
  grid.reserve(m1.size() + m2.size());
  for (const Atom& a : m1.atoms()) grid.push_back(a.position);
  for (const Atom& a : m2.atoms()) grid.push_back(a.position);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> gap(grid.size(), 0.0);  // |F1 - F2| on [grid[i], grid[i+1])
  {
    std::size_t i1 = 0;
    std::size_t i2 = 0;
    double f1 = 0.0;
    double f2 = 0.0;
    const auto a1 = m1.atoms();
    const auto a2 = m2.atoms();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      while (i1 < a1.size() && a1[i1].position <= grid[g]) f1 += a1[i1++].mass;
      while (i2 < a2.size() && a2[i2].position <= grid[g]) f2 += a2[i2++].mass;
      gap[g] = std::abs(f1 - f2);
    }
  }
  double value = 0.0;
  double weight = 1.0;
  for (int k = 1; k <= terms; ++k) {
    weight *= 0.5;
    const double lo = -static_cast<double>(k);
    const double hi = static_cast<double>(k);
    double integral = 0.0;
    for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
      const double a = std::max(grid[g], lo);
      const double b = std::min(grid[g + 1], hi);
      if (b > a) integral += (b - a) * gap[g];
    }
    value += weight * std::min(1.0, integral);
  }
  return {value, std::ldexp(1.0, -terms)};
}

std::vector<AtomicMeasure> divide_measure(const AtomicMeasure& m, std::span<const double> masses) {
  if (masses.empty()) throw DomainError("divide_measure: no piece masses given");
  double sum = 0.0;
  for (double v : masses) {
    if (!(v > 0.0)) throw DomainError("divide_measure: piece masses must be positive");
    sum += v;
  }
  const double total = m.total_mass();
  if (std::abs(sum - total) > kMassRelTolerance * total) {
    throw MassMismatchError("divide_measure: piece masses sum to " + std::to_string(sum) +
                            ", measure has mass " + std::to_string(total));
  }
  const auto cum = cumulative_masses(m);
  const auto atoms = m.atoms();
  const double drop = 1e-14 * total;
  std::vector<AtomicMeasure> pieces;
  pieces.reserve(masses.size());
  double lower = 0.0;
  for (std::size_t c = 0; c < masses.size(); ++c) {
    const double upper = (c + 1 == masses.size()) ? cum.back() : lower + masses[c];
    std::vector<Atom> piece;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const double slab_lo = (j == 0) ? 0.0 : cum[j - 1];
      const double slab_hi = cum[j];
      if (slab_hi <= lower) continue;
      if (slab_lo >= upper) break;
      const double overlap = std::min(slab_hi, upper) - std::max(slab_lo, lower);
      if (overlap > drop) piece.push_back({atoms[j].position, overlap});
    }
    if (piece.empty()) {
      // Rounding left nothing above the drop threshold; keep the mass at the slab quantile.
      piece.push_back({quantile(m, std::min(upper, total)), masses[c]});
    }
    pieces.emplace_back(std::move(piece));
    lower = upper;
  }
  return pieces;
}

AtomicMeasure scale_measure(const AtomicMeasure& m, double factor) {
  if (!(factor > 0.0)) throw DomainError("scale_measure: factor must be positive");
  std::vector<Atom> atoms(m.atoms().begin(), m.atoms().end());
  for (Atom& a : atoms) a.position *= factor;
  return AtomicMeasure(std::move(atoms));
}

AtomicMeasure scale_mass(const AtomicMeasure& m, double factor) {
  if (!(factor > 0.0)) throw DomainError("scale_mass: factor must be positive");
  std::vector<Atom> atoms(m.atoms().begin(), m.atoms().end());
  for (Atom& a : atoms) a.mass *= factor;
  return AtomicMeasure(std::move(atoms));
}

AtomicMeasure normalize_scaling(const AtomicMeasure& m) {
  const double total = m.total_mass();
  return scale_mass(scale_measure(m, 1.0 / total), 1.0 / total);
}

double total_variation(const AtomicMeasure& m1, const AtomicMeasure& m2) {
  const auto a1 = m1.atoms();
  const auto a2 = m2.atoms();
  std::size_t i = 0;
  std::size_t j = 0;
  double tv = 0.0;
  while (i < a1.size() || j < a2.size()) {
    if (j == a2.size() || (i < a1.size() && a1[i].position < a2[j].position)) {
      tv += a1[i++].mass;
    } else if (i == a1.size() || a2[j].position < a1[i].position) {
      tv += a2[j++].mass;
    } else {
      tv += std::abs(a1[i++].mass - a2[j++].mass);
    }
  }
  return tv;
}

ClusteringDeviation cluster_approximate(const MeasurePath& path, std::size_t n) {
  if (path.empty()) throw DomainError("cluster_approximate: empty path");
  if (n == 0) throw DomainError("cluster_approximate: need at least one cluster");
  if (path.size() < 2 || path.front().first != 0.0) {
    throw DomainError("cluster_approximate: path must be sampled at s = 0 and at least one later time");
  }
  const double total = path.front().second.total_mass();
  const std::vector<double> pieces_mass(n, total / static_cast<double>(n));
  std::vector<std::vector<Knot>> knots(n);
  double previous_time = -1.0;
  for (const auto& [time, measure] : path) {
    if (!(time > previous_time)) throw DomainError("cluster_approximate: sample times must increase");
    previous_time = time;
    require_equal_mass(path.front().second, measure, "cluster_approximate");
    const auto pieces = divide_measure(measure, pieces_mass);
    for (std::size_t c = 0; c < n; ++c) {
      double moment = 0.0;
      double mass = 0.0;
      for (const Atom& a : pieces[c].atoms()) {
        moment += a.position * a.mass;
        mass += a.mass;
      }
      knots[c].push_back({time, moment / mass});
    }
  }
  std::vector<PiecewiseLinear> trajectories;
  trajectories.reserve(n);
  for (auto& k : knots) trajectories.emplace_back(std::move(k));
  return ClusteringDeviation(pieces_mass, std::move(trajectories), path.back().first);
}

}  // namespace sticky
