#ifndef STICKY_SERIALIZATION_HPP_
#define STICKY_SERIALIZATION_HPP_

#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "sticky/cluster_dynamics.hpp"
#include "sticky/deviation.hpp"
#include "sticky/kpz_shape.hpp"
#include "sticky/measure.hpp"
#include "sticky/sde_sim.hpp"

namespace sticky {

using Json = nlohmann::json;

// Doubles printed with 17 significant digits, so text round-trips exactly.
std::string format_double(double v);

Json to_json(const AtomicMeasure& m);
AtomicMeasure measure_from_json(const Json& j);

Json to_json(const ClusteringDeviation& dev);
ClusteringDeviation deviation_from_json(const Json& j);

Json to_json(const MergeTree& tree);
Json to_json(std::span<const Branch> branches);

// Infinite piece ends are written as null.
Json to_json(const ShapeFunction& shape);
ShapeFunction shape_from_json(const Json& j);

Json to_json(const Quantiles& q);
Json to_json(const McReport& report, const SimConfig& config);

// CSV with header s,x_1..x_n sampled on `times`.
std::string trajectories_csv(const ClusteringDeviation& dev, std::span<const double> times);
// CSV with header x,h,u; u is the right slope.
std::string shape_samples_csv(const ShapeFunction& shape, std::span<const double> xs);
// CSV with header s,shock_1..shock_n.
std::string shocks_csv(const ShockFan& fan, std::span<const double> times);
// CSV with header t,X_1..X_N (microscopic units).
std::string particles_csv(std::span<const ParticleState> path);

// n points evenly spaced on [a, b], both ends included.
std::vector<double> linspace(double a, double b, std::size_t n);

}  // namespace sticky

#endif  // STICKY_SERIALIZATION_HPP_
