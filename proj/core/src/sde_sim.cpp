#include "sticky/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "sticky/cluster_dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/random.hpp"

namespace sticky {

namespace {

void validate_config(const SimConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    throw DomainError("simulate: dt must be positive (got " + std::to_string(config.dt) + ")");
  }
  if (!(config.noise_scale >= 0.0 && config.noise_scale <= 1.0)) {
    throw DomainError("simulate: noise_scale must lie in [0, 1]");
  }
}

void validate_scales(const Scales& scales) {
  if (scales.n == 0) throw DomainError("scales: N must be positive");
  if (!(scales.t_scale > 0.0) || !std::isfinite(scales.t_scale)) {
    throw DomainError("scales: T must be positive");
  }
}

}  // namespace

SimConfig default_sim_config(std::size_t n) {
  SimConfig c;
  c.dt = 1e-3 / static_cast<double>(std::max<std::size_t>(n, 1));
  return c;
}

std::vector<double> drift_vector(std::span<const double> positions) {
  const std::size_t n = positions.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
  std::vector<double> drift(n, 0.0);
  std::size_t k = 0;
  while (k < n) {
    std::size_t j = k;
    while (j + 1 < n && positions[order[j + 1]] == positions[order[k]]) ++j;
    // Particles k..j coincide: k lie strictly left, n - 1 - j strictly right.
    const double value = 0.5 * (static_cast<double>(n - 1 - j) - static_cast<double>(k));
    for (std::size_t g = k; g <= j; ++g) drift[order[g]] = value;
    k = j + 1;
  }
  return drift;
}

std::vector<double> drift_vector(const ParticleState& state) { return drift_vector(state.positions); }

std::vector<ParticleState> simulate(const ParticleState& initial, const SimConfig& config,
                                    double horizon_micro, std::span<const double> snapshot_times) {
  validate_config(config);
  if (!(horizon_micro >= 0.0) || !std::isfinite(horizon_micro)) {
    throw DomainError("simulate: horizon must be nonnegative");
  }
  std::vector<double> targets(snapshot_times.begin(), snapshot_times.end());
  for (double s : targets) {
    if (!(s >= initial.micro_time && s <= initial.micro_time + horizon_micro)) {
      throw DomainError("simulate: snapshot time " + std::to_string(s) + " outside the run");
    }
  }
  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return targets[a] < targets[b]; });

  std::vector<ParticleState> out(targets.size(), initial);
  const std::size_t n = initial.positions.size();
  std::vector<double> x = initial.positions;
  std::vector<double> prev = x;
  double t = initial.micro_time;
  const double t_end = initial.micro_time + horizon_micro;
  std::size_t next = 0;

  auto emit_until = [&](double t_now) {
    while (next < order.size() && targets[order[next]] <= t_now) {
      ParticleState& snap = out[order[next]];
      snap.micro_time = targets[order[next]];
      snap.positions = x;
      next++;
    }
  };
  auto emit_interpolated = [&](double t0, double t1) {
    while (next < order.size() && targets[order[next]] <= t1) {
      const double target = targets[order[next]];
      const double w = (t1 > t0) ? (target - t0) / (t1 - t0) : 1.0;
      ParticleState& snap = out[order[next]];
      snap.micro_time = target;
      for (std::size_t i = 0; i < n; ++i) snap.positions[i] = prev[i] + w * (x[i] - prev[i]);
      next++;
    }
  };

  emit_until(t);
  const auto steps = static_cast<std::uint64_t>(std::ceil(horizon_micro / config.dt - 1e-9));
  for (std::uint64_t step = 0; step < steps; ++step) {
    const double h = (step + 1 == steps) ? t_end - t : config.dt;
    if (!(h > 0.0)) break;
    prev = x;
    const auto drift = drift_vector(prev);
    const double noise = config.noise_scale * std::sqrt(h);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = prev[i] + drift[i] * h;
      if (noise > 0.0) {
        x[i] += noise * philox_normal(config.seed, config.replica, static_cast<std::uint32_t>(i), step);
      }
    }
    const double t0 = t;
    t = (step + 1 == steps) ? t_end : t + h;
    emit_interpolated(t0, t);
  }
  emit_until(std::max(t, t_end));
  return out;
}

AtomicMeasure empirical_measure(const ParticleState& state) {
  validate_scales(state.scales);
  const double n = static_cast<double>(state.scales.n);
  const double scale = n * state.scales.t_scale;
  std::vector<Atom> atoms;
  atoms.reserve(state.positions.size());
  for (double x : state.positions) atoms.push_back({x / scale, 1.0 / n});
  return AtomicMeasure(std::move(atoms));
}

std::vector<std::size_t> index_assignment(std::size_t n_particles, std::span<const double> masses) {
  if (masses.empty()) throw DomainError("index_assignment: no clusters");
  double total = 0.0;
  for (double m : masses) {
    if (!(m > 0.0)) throw DomainError("index_assignment: masses must be positive");
    total += m;
  }
  std::vector<double> cum;
  double acc = 0.0;
  for (double m : masses) cum.push_back((acc += m) / total);
  cum.back() = 1.0;
  std::vector<std::size_t> out(n_particles);
  const double slack = 1e-12;
  std::size_t c = 0;
  for (std::size_t i = 0; i < n_particles; ++i) {
    const double level = static_cast<double>(i + 1) / static_cast<double>(n_particles);
    while (c + 1 < cum.size() && cum[c] + slack < level) ++c;
    out[i] = c;
  }
  return out;
}

ParticleState cluster_initial_state(std::span<const double> x, std::span<const double> masses,
                                    Scales scales) {
  validate_scales(scales);
  if (x.size() != masses.size()) throw DomainError("cluster_initial_state: x and masses differ in length");
  const auto assignment = index_assignment(scales.n, masses);
  ParticleState state;
  state.scales = scales;
  const double factor = static_cast<double>(scales.n) * scales.t_scale;
  for (std::size_t i = 0; i < scales.n; ++i) state.positions.push_back(factor * x[assignment[i]]);
  return state;
}

DeviationDistance deviation_distance(std::span<const ParticleState> trajectory,
                                     const ClusteringDeviation& dev,
                                     std::span<const std::size_t> assignment) {
  DeviationDistance result;
  for (const ParticleState& state : trajectory) {
    validate_scales(state.scales);
    const double scale = static_cast<double>(state.scales.n) * state.scales.t_scale;
    const double s = state.micro_time / state.scales.t_scale;
    if (s > dev.horizon() * (1.0 + 1e-12) + 1e-15) {
      throw DomainError("deviation_distance: snapshot time " + std::to_string(s) +
                        " beyond the deviation horizon " + std::to_string(dev.horizon()));
    }
    if (assignment.size() != state.positions.size()) {
      throw DomainError("deviation_distance: one cluster index per particle is required");
    }
    const auto clusters = dev.positions_at(s);
    for (std::size_t i = 0; i < state.positions.size(); ++i) {
      if (assignment[i] >= clusters.size()) throw DomainError("deviation_distance: bad cluster index");
      result.sup_fine = std::max(result.sup_fine, std::abs(state.positions[i] / scale - clusters[assignment[i]]));
    }
    const AtomicMeasure target = scale_mass(dev.snapshot(s), 1.0 / dev.total_mass());
    const WeakDistance w = weak_distance(empirical_measure(state), target);
    result.sup_weak = std::max(result.sup_weak, w.value);
    result.truncation_tail = w.truncation_tail;
  }
  return result;
}

Quantiles sample_quantiles(std::vector<double> values) {
  Quantiles q;
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  q.q10 = at(0.10);
  q.q25 = at(0.25);
  q.median = at(0.50);
  q.q75 = at(0.75);
  q.q90 = at(0.90);
  return q;
}

McReport mc_clustering_experiment(std::size_t n_replicas, std::size_t n_particles, double t_scale,
                                  std::span<const double> x, std::span<const double> masses,
                                  double terminal_point, double horizon, const SimConfig& config,
                                  const McOptions& options) {
  validate_config(config);
  const Scales scales{n_particles, t_scale};
  validate_scales(scales);
  McReport report;
  report.n_particles = n_particles;
  report.t_scale = t_scale;
  report.horizon = horizon;
  report.clustering_regime = static_cast<double>(n_particles * n_particles) * t_scale >= 1.0;
  if (n_replicas == 0) return report;

  const auto opt = optimal_deviation(x, masses, terminal_point, horizon);
  const auto assignment = index_assignment(n_particles, masses);
  const ParticleState initial = cluster_initial_state(x, masses, scales);
  const std::size_t snaps = std::max<std::size_t>(options.snapshots, 2);
  std::vector<double> times(snaps);
  for (std::size_t k = 0; k < snaps; ++k) {
    times[k] = horizon * t_scale * static_cast<double>(k) / static_cast<double>(snaps - 1);
  }
  times.back() = horizon * t_scale;

  report.replicas.resize(n_replicas);
  auto run = [&](std::size_t r) {
    SimConfig c = config;
    c.replica = static_cast<std::uint32_t>(r);
    const auto path = simulate(initial, c, horizon * t_scale, times);
    const auto d = deviation_distance(path, opt.deviation, assignment);
    const auto& last = path.back().positions;
    const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
    report.replicas[r] = {c.replica, c.seed, d.sup_fine, d.sup_weak,
                          (*hi - *lo) / (static_cast<double>(n_particles) * t_scale)};
  };
  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_replicas)));
  if (threads == 1) {
    for (std::size_t r = 0; r < n_replicas; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < n_replicas; r += threads) run(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<double> spread, fine, weak;
  for (const auto& rr : report.replicas) {
    spread.push_back(rr.spread);
    fine.push_back(rr.sup_fine);
    weak.push_back(rr.sup_weak);
  }
  report.spread = sample_quantiles(spread);
  report.sup_fine = sample_quantiles(fine);
  report.sup_weak = sample_quantiles(weak);
  return report;
}

}  // namespace sticky
