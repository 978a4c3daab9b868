#include "sticky/serialization.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "sticky/error.hpp"

namespace sticky {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw DomainError(std::string("expected a number for ") + what);
  return j.get<double>();
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DomainError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double end_or_inf(const Json& j, double inf_value, const char* what) {
  return j.is_null() ? inf_value : number(j, what);
}

void append_row(std::string& out, double first, std::span<const double> rest) {
  out += format_double(first);
  for (double v : rest) {
    out += ',';
    out += format_double(v);
  }
  out += '\n';
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

Json to_json(const AtomicMeasure& m) {
  Json atoms = Json::array();
  for (const Atom& a : m.atoms()) atoms.push_back({a.position, a.mass});
  return {{"atoms", atoms}};
}

AtomicMeasure measure_from_json(const Json& j) {
  const Json& atoms = field(j, "atoms");
  if (!atoms.is_array()) throw DomainError("\"atoms\" must be an array");
  std::vector<Atom> out;
  for (const Json& a : atoms) {
    if (!a.is_array() || a.size() != 2) throw DomainError("each atom must be [x, mass]");
    out.push_back({number(a[0], "atom position"), number(a[1], "atom mass")});
  }
  return AtomicMeasure(std::move(out));
}

Json to_json(const ClusteringDeviation& dev) {
  Json trajectories = Json::array();
  for (const auto& tr : dev.trajectories()) {
    Json knots = Json::array();
    for (const Knot& k : tr.knots()) knots.push_back({k.time, k.position});
    trajectories.push_back(knots);
  }
  return {{"masses", std::vector<double>(dev.masses().begin(), dev.masses().end())},
          {"horizon", dev.horizon()},
          {"trajectories", trajectories}};
}

ClusteringDeviation deviation_from_json(const Json& j) {
  std::vector<double> masses;
  for (const Json& m : field(j, "masses")) masses.push_back(number(m, "mass"));
  const double horizon = number(field(j, "horizon"), "horizon");
  std::vector<PiecewiseLinear> trajectories;
  for (const Json& tr : field(j, "trajectories")) {
    std::vector<Knot> knots;
    for (const Json& k : tr) {
      if (!k.is_array() || k.size() != 2) throw DomainError("each knot must be [s, x]");
      knots.push_back({number(k[0], "knot time"), number(k[1], "knot position")});
    }
    trajectories.emplace_back(std::move(knots));
  }
  return ClusteringDeviation(std::move(masses), std::move(trajectories), horizon);
}

Json to_json(const MergeTree& tree) {
  Json events = Json::array();
  for (const MergeEvent& e : tree.events) {
    events.push_back({{"time", e.time},
                      {"clusters", e.clusters},
                      {"mass", e.mass},
                      {"velocity", e.velocity},
                      {"position", e.position}});
  }
  return {{"cluster_count", tree.cluster_count}, {"horizon", tree.horizon}, {"events", events}};
}

Json to_json(std::span<const Branch> branches) {
  Json out = Json::array();
  for (const Branch& b : branches) {
    Json members = Json::array();
    for (std::size_t c = b.first; c <= b.last; ++c) members.push_back(c);
    out.push_back(members);
  }
  return out;
}

Json to_json(const ShapeFunction& shape) {
  Json pieces = Json::array();
  for (const ShapePiece& p : shape.pieces()) {
    if (p.kind == ShapePiece::Kind::linear) {
      pieces.push_back({{"kind", "linear"},
                        {"u", p.u},
                        {"b", p.intercept()},
                        {"a", finite_or_null(p.a)},
                        {"bx", finite_or_null(p.bx)},
                        {"anchor", {p.anchor_x, p.anchor_h}}});
    } else {
      pieces.push_back({{"kind", "parabola"}, {"a", finite_or_null(p.a)}, {"bx", finite_or_null(p.bx)}});
    }
  }
  Json nodes = Json::array();
  for (const ShapeNode& n : shape.nodes()) nodes.push_back({n.x, n.h});
  return {{"t", shape.time()}, {"pieces", pieces}, {"nodes", nodes}};
}

ShapeFunction shape_from_json(const Json& j) {
  const double t = number(field(j, "t"), "t");
  std::vector<ShapePiece> pieces;
  for (const Json& p : field(j, "pieces")) {
    ShapePiece piece;
    const std::string kind = field(p, "kind").get<std::string>();
    piece.a = end_or_inf(field(p, "a"), -kInf, "piece start");
    piece.bx = end_or_inf(field(p, "bx"), kInf, "piece end");
    if (kind == "linear") {
      piece.kind = ShapePiece::Kind::linear;
      piece.u = number(field(p, "u"), "slope");
      if (p.contains("anchor")) {
        piece.anchor_x = number(p["anchor"][0], "anchor x");
        piece.anchor_h = number(p["anchor"][1], "anchor h");
      } else {
        piece.anchor_x = 0.0;
        piece.anchor_h = number(field(p, "b"), "intercept");
      }
    } else if (kind == "parabola") {
      piece.kind = ShapePiece::Kind::parabola;
    } else {
      throw DomainError("unknown piece kind \"" + kind + "\"");
    }
    pieces.push_back(piece);
  }
  std::vector<ShapeNode> nodes;
  if (j.contains("nodes")) {
    for (const Json& n : j["nodes"]) nodes.push_back({number(n[0], "node x"), number(n[1], "node h")});
  }
  return ShapeFunction(t, std::move(pieces), std::move(nodes));
}

Json to_json(const Quantiles& q) {
  return {{"q10", q.q10}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"q90", q.q90}};
}

Json to_json(const McReport& report, const SimConfig& config) {
  Json seeds = Json::array();
  Json replicas = Json::array();
  for (const ReplicaResult& r : report.replicas) {
    seeds.push_back({{"replica", r.replica}, {"seed", r.seed}});
    replicas.push_back({{"replica", r.replica},
                        {"sup_fine", r.sup_fine},
                        {"sup_weak", r.sup_weak},
                        {"spread", r.spread}});
  }
  return {{"quantiles",
           {{"spread", to_json(report.spread)},
            {"sup_fine", to_json(report.sup_fine)},
            {"sup_weak", to_json(report.sup_weak)}}},
          {"seeds", seeds},
          {"replicas", replicas},
          {"config",
           {{"n", report.n_particles},
            {"t_scale", report.t_scale},
            {"horizon", report.horizon},
            {"dt", config.dt},
            {"seed", config.seed},
            {"noise_scale", config.noise_scale},
            {"clustering_regime", report.clustering_regime}}}};
}

std::string trajectories_csv(const ClusteringDeviation& dev, std::span<const double> times) {
  std::string out = "s";
  for (std::size_t c = 0; c < dev.size(); ++c) out += fmt::format(",x_{}", c + 1);
  out += '\n';
  for (double s : times) append_row(out, s, dev.positions_at(s));
  return out;
}

std::string shape_samples_csv(const ShapeFunction& shape, std::span<const double> xs) {
  std::string out = "x,h,u\n";
  for (double x : xs) {
    const double row[2] = {shape(x), shape.slope_right(x)};
    append_row(out, x, row);
  }
  return out;
}

std::string shocks_csv(const ShockFan& fan, std::span<const double> times) {
  std::string out = "s";
  for (std::size_t c = 0; c < fan.shocks.size(); ++c) out += fmt::format(",shock_{}", c + 1);
  out += '\n';
  for (double s : times) append_row(out, s, fan.positions_at(s));
  return out;
}

std::string particles_csv(std::span<const ParticleState> path) {
  std::string out = "t";
  const std::size_t n = path.empty() ? 0 : path.front().positions.size();
  for (std::size_t i = 0; i < n; ++i) out += fmt::format(",X_{}", i + 1);
  out += '\n';
  for (const ParticleState& st : path) append_row(out, st.micro_time, st.positions);
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out;
  if (n == 0) return out;
  if (n == 1) return {a};
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  out.back() = b;
  return out;
}

}  // namespace sticky
