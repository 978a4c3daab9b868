#ifndef STICKY_SDE_SIM_HPP_
#define STICKY_SDE_SIM_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sticky/deviation.hpp"
#include "sticky/measure.hpp"

namespace sticky {

struct Scales {
  std::size_t n = 1;     // number of particles N
  double t_scale = 1.0;  // time scale T
};

/// Particle positions X_i at microscopic time t; macroscopic coordinates are
/// X_i / (N T) at time t / T.
struct ParticleState {
  std::vector<double> positions;
  double micro_time = 0.0;
  Scales scales;
};

struct SimConfig {
  double dt = 1e-3;          // microscopic step
  std::uint64_t seed = 0;
  double noise_scale = 1.0;  // 1: standard Brownian noise, 0: drift flow only
  std::uint32_t replica = 0;
};

// Default step 1e-3 / N keeps the step well below the 2/N stability limit.
SimConfig default_sim_config(std::size_t n);

/// drift_i = sum_{j != i} sgn(X_j - X_i) / 2 with sgn(0) = 0, in O(N log N).
std::vector<double> drift_vector(std::span<const double> positions);
std::vector<double> drift_vector(const ParticleState& state);

/// Euler-Maruyama up to `horizon_micro`. Gaussian increments come from Philox
/// keyed by (seed, replica, particle, step). Snapshots are interpolated linearly
/// between steps.
std::vector<ParticleState> simulate(const ParticleState& initial, const SimConfig& config,
                                    double horizon_micro, std::span<const double> snapshot_times);

/// (1/N) sum_i delta_{X_i / (N T)}.
AtomicMeasure empirical_measure(const ParticleState& state);

/// Cluster of particle i (0-based): the smallest c with M_c >= (i + 1) / N, where
/// M_c are the normalized cumulative masses.
std::vector<std::size_t> index_assignment(std::size_t n_particles, std::span<const double> masses);

/// Microscopic initial state with particle i at N T x_{c(i)}.
ParticleState cluster_initial_state(std::span<const double> x, std::span<const double> masses,
                                    Scales scales);

struct DeviationDistance {
  double sup_fine = 0.0;
  double sup_weak = 0.0;
  double truncation_tail = 0.0;
};

/// sup over snapshots of max_i |X_i/(NT) - xi_{c(i)}(s)| and of the weak
/// distance between the empirical measure and the (mass-normalized) deviation.
DeviationDistance deviation_distance(std::span<const ParticleState> trajectory,
                                     const ClusteringDeviation& dev,
                                     std::span<const std::size_t> assignment);

struct ReplicaResult {
  std::uint32_t replica;
  std::uint64_t seed;
  double sup_fine;
  double sup_weak;
  double spread;  // (max X - min X) / (N T) at the horizon
};

struct Quantiles {
  double q10 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q90 = 0.0;
};

// Linear-interpolation sample quantiles; zeros for an empty sample.
Quantiles sample_quantiles(std::vector<double> values);

struct McReport {
  std::size_t n_particles = 0;
  double t_scale = 0.0;
  double horizon = 0.0;
  bool clustering_regime = false;  // N^2 T >= 1
  std::vector<ReplicaResult> replicas;
  Quantiles spread;
  Quantiles sup_fine;
  Quantiles sup_weak;
};

struct McOptions {
  std::size_t snapshots = 101;  // macro grid used for the deviation distance
  unsigned threads = 0;         // 0: hardware concurrency
};

/// Runs replicas from the cluster initial condition for macroscopic time
/// `horizon` and measures them against the optimal deviation to `terminal_point`.
McReport mc_clustering_experiment(std::size_t n_replicas, std::size_t n_particles, double t_scale,
                                  std::span<const double> x, std::span<const double> masses,
                                  double terminal_point, double horizon, const SimConfig& config,
                                  const McOptions& options = {});

}  // namespace sticky

#endif  // STICKY_SDE_SIM_HPP_
