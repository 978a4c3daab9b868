#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "manifest.hpp"
#include "sticky/cluster_dynamics.hpp"
#include "sticky/error.hpp"
#include "sticky/kpz_shape.hpp"
#include "sticky/rate_functionals.hpp"
#include "sticky/sde_sim.hpp"
#include "sticky/serialization.hpp"

#ifndef STICKY_VERSION
#define STICKY_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using sticky::Json;

namespace {

enum ExitCode : int { kOk = 0, kValidation = 2, kTolerance = 3, kInternal = 4 };

class ToleranceBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sticky::DomainError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw sticky::DomainError("invalid JSON in " + path + ": " + e.what());
  }
}

std::vector<double> equal_masses(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(std::max<std::size_t>(n, 1)));
}

Json breakdown_json(const sticky::RateBreakdown& r) {
  Json segs = Json::array();
  for (const auto& s : r.per_segment) {
    segs.push_back({{"begin", s.interval.begin}, {"end", s.interval.end}, {"contribution", s.contribution}});
  }
  return {{"per_segment", segs}, {"per_cluster", r.per_cluster}};
}

struct Context {
  std::string out = "out";
  std::vector<std::uint64_t> seeds;
};

struct OptimalArgs {
  std::vector<double> x;
  std::vector<double> m;
  double xi = 0.0;
  double t = 1.0;
  std::size_t samples = 201;
};

void cmd_optimal(const OptimalArgs& a, sticky::cli::OutputDir& out) {
  if (a.x.empty()) throw sticky::DomainError("--x: at least one start position is required");
  const auto m = a.m.empty() ? equal_masses(a.x.size()) : a.m;
  const auto opt = sticky::optimal_deviation(a.x, m, a.xi, a.t);
  const double rate = sticky::rateq_clustering(opt.deviation).total;
  const double closed = sticky::rateq_optimal(opt.tree, m, a.t, opt.drifts);
  const double lyap = sticky::mom_functional(opt.deviation, {0.0, a.t});
  out.write_json("deviation.json", sticky::to_json(opt.deviation));
  out.write_json("merge_tree.json", {{"tree", sticky::to_json(opt.tree)},
                                     {"branches", sticky::to_json(std::span<const sticky::Branch>(opt.branches))},
                                     {"drifts", opt.drifts},
                                     {"inertia_velocities", opt.inertia_velocities}});
  out.write("trajectories.csv",
            sticky::trajectories_csv(opt.deviation, sticky::linspace(0.0, a.t, std::max<std::size_t>(a.samples, 2))));
  const Json summary = {{"rateq", rate}, {"rateq_closed_form", closed}, {"L_SHE", lyap}};
  out.write_json("summary.json", summary);
  fmt::print("rateq = {}\nL_SHE = {}\n", sticky::format_double(rate), sticky::format_double(lyap));
}

struct ShapeArgs {
  double t = 1.0;
  std::vector<double> x;
  std::vector<double> h;
  std::vector<double> m;
  std::vector<double> back_times;
  std::size_t sample = 201;
};

void cmd_shape(const ShapeArgs& a, sticky::cli::OutputDir& out) {
  if (a.x.empty()) throw sticky::DomainError("--x: at least one node is required");
  if (a.h.empty() == a.m.empty()) throw sticky::DomainError("give exactly one of --h and --m");
  const auto h = a.h.empty() ? sticky::invert_gradient(a.t, a.x, a.m) : a.h;
  const auto shape = sticky::build_hf(a.t, a.x, h);
  const double I = sticky::i_kpz(shape);
  const auto grad = sticky::i_kpz_gradient(a.t, a.x, h);
  const auto conc = sticky::concavity(shape);

  double reach = 1.0;
  for (const auto& p : shape.pieces()) {
    if (std::isfinite(p.a)) reach = std::max(reach, std::abs(p.a));
    if (std::isfinite(p.bx)) reach = std::max(reach, std::abs(p.bx));
  }
  reach *= 1.25;
  const auto xs = sticky::linspace(-reach, reach, std::max<std::size_t>(a.sample, 2));
  out.write_json("shape.json", sticky::to_json(shape));
  out.write("samples.csv", sticky::shape_samples_csv(shape, xs));

  Json evolved = Json::array();
  for (std::size_t k = 0; k < a.back_times.size(); ++k) {
    const auto e = sticky::hopf_lax_evolve(shape, a.back_times[k]);
    const std::string name = fmt::format("shape_back_{}.json", k);
    out.write_json(name, sticky::to_json(e));
    out.write(fmt::format("samples_back_{}.csv", k), sticky::shape_samples_csv(e, xs));
    evolved.push_back({{"back_time", a.back_times[k]}, {"file", name}, {"I_KPZ", sticky::i_kpz(e)}});
  }
  bool interior = conc.concave;
  for (double g : grad) interior = interior && g > 1e-10;
  if (interior) {
    const auto fan = sticky::shock_fan(a.t, a.x, h);
    out.write("shocks.csv", sticky::shocks_csv(fan, sticky::linspace(0.0, a.t, std::max<std::size_t>(a.sample, 2))));
  }
  out.write_json("summary.json", {{"t", a.t},
                                  {"x", a.x},
                                  {"h", h},
                                  {"I_KPZ", I},
                                  {"gradient", grad},
                                  {"concave", conc.concave},
                                  {"boundary", conc.boundary},
                                  {"evolved", evolved}});
  fmt::print("I_KPZ = {}\n", sticky::format_double(I));
  for (std::size_t c = 0; c < h.size(); ++c) {
    fmt::print("h[{}] = {}  m[{}] = {}\n", c, sticky::format_double(h[c]), c, sticky::format_double(grad[c]));
  }
}

struct DualityArgs {
  double t = 1.0;
  std::vector<double> x;
  std::vector<double> m;
  double tol = 1e-8;
  std::size_t random = 0;
  std::uint64_t seed = 1;
};

void cmd_duality(DualityArgs a, Context& ctx, sticky::cli::OutputDir& out) {
  if (a.random > 0) {
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> gap(0.2, 1.5);
    std::uniform_real_distribution<double> mass(0.1, 2.0);
    a.x.clear();
    a.m.clear();
    double p = -0.5 * static_cast<double>(a.random);
    for (std::size_t c = 0; c < a.random; ++c) {
      p += gap(rng);
      a.x.push_back(p);
      a.m.push_back(mass(rng));
    }
    ctx.seeds.push_back(a.seed);
  }
  if (a.x.empty()) throw sticky::DomainError("--x: at least one node is required (or use --random)");
  if (a.m.size() != a.x.size()) throw sticky::DomainError("--m: one mass per node is required");
  const auto r = sticky::duality_check(a.t, a.x, a.m);
  const double residual = r.residual();
  out.write_json("duality.json", {{"t", a.t},
                                  {"x", a.x},
                                  {"m", a.m},
                                  {"h", r.h},
                                  {"L_from_clusters", r.from_clusters},
                                  {"L_from_legendre", r.from_legendre},
                                  {"residual", residual},
                                  {"tol", a.tol}});
  fmt::print("L_from_clusters = {}\nL_from_legendre = {}\nresidual = {}\n",
             sticky::format_double(r.from_clusters), sticky::format_double(r.from_legendre),
             sticky::format_double(residual));
  if (residual > a.tol) {
    throw ToleranceBreach(fmt::format("duality residual {} exceeds --tol {}", residual, a.tol));
  }
}

struct SimulateArgs {
  std::size_t n = 64;
  double t_scale = 1.0;
  double dt = 0.0;  // 0: default 1e-3 / N
  bool dt_given = false;
  std::uint64_t seed = 1;
  std::size_t replicas = 1;
  double noise_scale = 1.0;
  std::vector<double> x{0.0};
  std::vector<double> m;
  double xi = 0.0;
  double horizon = 1.0;
  std::size_t snapshots = 101;
  unsigned threads = 0;
};

void cmd_simulate(const SimulateArgs& a, Context& ctx, sticky::cli::OutputDir& out) {
  sticky::SimConfig config = sticky::default_sim_config(a.n);
  if (a.dt_given) config.dt = a.dt;
  config.seed = a.seed;
  config.noise_scale = a.noise_scale;
  if (!(config.dt > 0.0)) throw sticky::DomainError("--dt must be positive");
  if (!(a.horizon > 0.0)) throw sticky::DomainError("--horizon must be positive");
  const auto m = a.m.empty() ? equal_masses(a.x.size()) : a.m;
  const sticky::Scales scales{a.n, a.t_scale};
  const auto initial = sticky::cluster_initial_state(a.x, m, scales);
  const auto micro_times = sticky::linspace(0.0, a.horizon * a.t_scale, std::max<std::size_t>(a.snapshots, 2));
  const auto path = sticky::simulate(initial, config, a.horizon * a.t_scale, micro_times);
  out.write("trajectory.csv", sticky::particles_csv(path));
  const auto report = sticky::mc_clustering_experiment(a.replicas, a.n, a.t_scale, a.x, m, a.xi, a.horizon,
                                                       config, {a.snapshots, a.threads});
  out.write_json("report.json", sticky::to_json(report, config));
  ctx.seeds.push_back(a.seed);
  fmt::print("replicas = {}\nmedian scaled terminal spread = {}\n", report.replicas.size(),
             sticky::format_double(report.spread.median));
  if (!report.clustering_regime) fmt::print("note: N^2 T < 1, outside the clustering regime\n");
}

struct DeviationArgs {
  std::string deviation;
  double from = 0.0;
  double to = -1.0;  // negative: horizon
};

void cmd_rate(const DeviationArgs& a, sticky::cli::OutputDir& out) {
  const auto dev = sticky::deviation_from_json(read_json_file(a.deviation));
  const double to = a.to < 0.0 ? dev.horizon() : a.to;
  const auto r = sticky::rateq_clustering(dev, {a.from, to});
  out.write_json("rate.json", {{"total", r.total}, {"breakdown", breakdown_json(r)}});
  fmt::print("rateq = {}\n", sticky::format_double(r.total));
}

void cmd_mom(const DeviationArgs& a, sticky::cli::OutputDir& out) {
  const auto dev = sticky::deviation_from_json(read_json_file(a.deviation));
  const double to = a.to < 0.0 ? dev.horizon() : a.to;
  const double total = sticky::mom_functional(dev, {a.from, to});
  const auto id = sticky::mom_identity_check(dev);
  out.write_json("mom.json", {{"total", total},
                              {"identity", {{"lhs", id.lhs}, {"rhs", id.rhs}, {"residual", std::abs(id.lhs - id.rhs)}}}});
  fmt::print("mom = {}\n", sticky::format_double(total));
}

struct LyapunovArgs {
  std::vector<double> x;
  std::vector<double> m;
  double xi = 0.0;
  double t = 1.0;
  std::string deviation;
};

void cmd_lyapunov(LyapunovArgs a, sticky::cli::OutputDir& out) {
  Json extra = Json::object();
  if (!a.deviation.empty()) {
    // Start clusters and terminal point are read off the deviation.
    const auto dev = sticky::deviation_from_json(read_json_file(a.deviation));
    const auto start = dev.positions_at(0.0);
    const auto end = dev.positions_at(dev.horizon());
    const auto [lo, hi] = std::minmax_element(end.begin(), end.end());
    if (*hi - *lo > 1e-9 * std::max(1.0, std::abs(*lo))) {
      throw sticky::DomainError("deviation does not end at a single point");
    }
    a.x.clear();
    a.m.clear();
    for (std::size_t c = 0; c < dev.size(); ++c) {
      if (!a.x.empty() && start[c] == a.x.back()) {
        a.m.back() += dev.masses()[c];
      } else {
        a.x.push_back(start[c]);
        a.m.push_back(dev.masses()[c]);
      }
    }
    a.xi = *lo;
    a.t = dev.horizon();
    extra["mom_of_input"] = sticky::mom_functional(dev, {0.0, dev.horizon()});
  }
  if (a.x.empty()) throw sticky::DomainError("give --x or --deviation");
  const auto m = a.m.empty() ? equal_masses(a.x.size()) : a.m;
  const double total = sticky::lyapunov_exponent(a.xi, a.t, a.x, m);
  Json j = {{"total", total}, {"x", a.x}, {"m", m}, {"xi", a.xi}, {"t", a.t}};
  j.update(extra);
  out.write_json("lyapunov.json", j);
  fmt::print("L_SHE = {}\n", sticky::format_double(total));
}

int run(const std::vector<std::string>& args);

int cmd_replay(const std::string& manifest_path, const std::string& out_dir) {
  const auto manifest = sticky::cli::manifest_from_json(read_json_file(manifest_path));
  fs::path target = out_dir.empty() ? fs::temp_directory_path() / fmt::format("sticky_replay_{}", ::getpid())
                                    : fs::path(out_dir);
  std::vector<std::string> args;
  bool replaced = false;
  for (std::size_t i = 0; i < manifest.argv.size(); ++i) {
    const std::string& arg = manifest.argv[i];
    if (arg == "--out" && i + 1 < manifest.argv.size()) {
      args.push_back(arg);
      args.push_back(target.string());
      ++i;
      replaced = true;
    } else if (arg.rfind("--out=", 0) == 0) {
      args.push_back("--out=" + target.string());
      replaced = true;
    } else {
      args.push_back(arg);
    }
  }
  if (!replaced) {
    args.insert(args.begin(), target.string());
    args.insert(args.begin(), "--out");
  }
  const int code = run(args);
  if (code != kOk && code != kTolerance) return code;
  const auto replayed = sticky::cli::manifest_from_json(read_json_file((target / sticky::cli::kManifestName).string()));
  int mismatches = 0;
  for (const auto& [name, digest] : manifest.outputs) {
    auto it = replayed.outputs.find(name);
    if (it == replayed.outputs.end() || it->second != digest) {
      fmt::print(stderr, "replay mismatch: {}\n", name);
      ++mismatches;
    }
  }
  if (replayed.outputs.size() != manifest.outputs.size()) ++mismatches;
  if (mismatches > 0) {
    fmt::print(stderr, "replay: {} output(s) differ\n", mismatches);
    return kTolerance;
  }
  fmt::print("replay: {} output(s) identical\n", manifest.outputs.size());
  return kOk;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Sticky-cluster large deviations and KPZ upper-tail toolkit"};
  app.set_version_flag("--version", STICKY_VERSION);
  app.set_config("--config", "", "key=value config file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  app.add_option("--out", ctx.out, "output directory")->capture_default_str();

  OptimalArgs opt;
  auto* c_opt = app.add_subcommand("optimal", "optimal deviation of clusters to a terminal point");
  c_opt->add_option("--x", opt.x, "start positions, strictly increasing")->delimiter(',');
  c_opt->add_option("--m", opt.m, "cluster masses (default equal, summing to 1)")->delimiter(',');
  c_opt->add_option("--xi", opt.xi, "terminal point")->capture_default_str();
  c_opt->add_option("--t", opt.t, "horizon")->capture_default_str();
  c_opt->add_option("--samples", opt.samples, "time samples in trajectories.csv")->capture_default_str();

  ShapeArgs shp;
  auto* c_shape = app.add_subcommand("shape", "terminal shape, limit shapes and shocks");
  c_shape->set_help_flag("--help", "print this help message and exit");  // frees -h for --h
  c_shape->add_option("--t", shp.t, "time")->capture_default_str();
  c_shape->add_option("--x", shp.x, "node positions, strictly increasing")->delimiter(',');
  c_shape->add_option("--h", shp.h, "node values")->delimiter(',');
  c_shape->add_option("--m", shp.m, "slope drops to invert")->delimiter(',');
  c_shape->add_option("--back-times", shp.back_times, "back times for evolved shapes")->delimiter(',');
  c_shape->add_option("--sample", shp.sample, "number of sample points")->capture_default_str();

  DualityArgs dual;
  auto* c_dual = app.add_subcommand("duality", "Legendre duality check");
  c_dual->add_option("--t", dual.t, "time")->capture_default_str();
  c_dual->add_option("--x", dual.x, "node positions")->delimiter(',');
  c_dual->add_option("--m", dual.m, "masses")->delimiter(',');
  c_dual->add_option("--tol", dual.tol, "residual tolerance")->capture_default_str();
  c_dual->add_option("--random", dual.random, "draw a random instance with this many nodes");
  c_dual->add_option("--seed", dual.seed, "seed for --random")->capture_default_str();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Euler-Maruyama particle system and replica statistics");
  c_sim->add_option("--n", sim.n, "number of particles")->capture_default_str();
  c_sim->add_option("--t-scale", sim.t_scale, "time scale T")->capture_default_str();
  auto* dt_opt = c_sim->add_option("--dt", sim.dt, "microscopic step (default 1e-3/N)");
  c_sim->add_option("--seed", sim.seed, "seed")->capture_default_str();
  c_sim->add_option("--replicas", sim.replicas, "number of replicas")->capture_default_str();
  c_sim->add_option("--noise-scale", sim.noise_scale, "noise factor in [0, 1]")->capture_default_str();
  c_sim->add_option("--x", sim.x, "macroscopic cluster positions")->delimiter(',');
  c_sim->add_option("--m", sim.m, "cluster masses")->delimiter(',');
  c_sim->add_option("--xi", sim.xi, "terminal point of the reference deviation")->capture_default_str();
  c_sim->add_option("--horizon", sim.horizon, "macroscopic horizon")->capture_default_str();
  c_sim->add_option("--snapshots", sim.snapshots, "snapshots per run")->capture_default_str();
  c_sim->add_option("--threads", sim.threads, "worker threads (0: all cores)")->capture_default_str();

  DeviationArgs rate_args;
  auto* c_rate = app.add_subcommand("rate", "quantile-form rate of a clustering deviation");
  c_rate->add_option("--deviation", rate_args.deviation, "deviation JSON")->required();
  c_rate->add_option("--from", rate_args.from, "interval start");
  c_rate->add_option("--to", rate_args.to, "interval end (default horizon)");

  DeviationArgs mom_args;
  auto* c_mom = app.add_subcommand("mom", "moment functional of a clustering deviation");
  c_mom->add_option("--deviation", mom_args.deviation, "deviation JSON")->required();
  c_mom->add_option("--from", mom_args.from, "interval start");
  c_mom->add_option("--to", mom_args.to, "interval end (default horizon)");

  LyapunovArgs lyap;
  auto* c_lyap = app.add_subcommand("lyapunov", "moment Lyapunov exponent");
  c_lyap->add_option("--x", lyap.x, "start positions")->delimiter(',');
  c_lyap->add_option("--m", lyap.m, "masses")->delimiter(',');
  c_lyap->add_option("--xi", lyap.xi, "terminal point")->capture_default_str();
  c_lyap->add_option("--t", lyap.t, "horizon")->capture_default_str();
  c_lyap->add_option("--deviation", lyap.deviation, "read start clusters and endpoint from a deviation JSON");

  std::string manifest_path;
  auto* c_replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  c_replay->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();

  std::vector<const char*> argv{"sticky"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  sim.dt_given = dt_opt->count() > 0;

  try {
    if (c_replay->parsed()) {
      const bool out_given = app.get_option("--out")->count() > 0;
      return cmd_replay(manifest_path, out_given ? ctx.out : std::string{});
    }
    sticky::cli::OutputDir out(ctx.out);
    auto* sub = app.get_subcommands().front();
    int code = kOk;
    std::string breach;
    try {
      if (sub == c_opt) cmd_optimal(opt, out);
      if (sub == c_shape) cmd_shape(shp, out);
      if (sub == c_dual) cmd_duality(dual, ctx, out);
      if (sub == c_sim) cmd_simulate(sim, ctx, out);
      if (sub == c_rate) cmd_rate(rate_args, out);
      if (sub == c_mom) cmd_mom(mom_args, out);
      if (sub == c_lyap) cmd_lyapunov(lyap, out);
    } catch (const ToleranceBreach& e) {
      code = kTolerance;
      breach = e.what();
    }
    sticky::cli::RunManifest manifest{sub->get_name(), args, app.config_to_str(true, false), ctx.seeds,
                                      STICKY_VERSION, out.digests()};
    std::ofstream mf(out.path() / sticky::cli::kManifestName);
    mf << sticky::cli::to_json(manifest).dump(2) << "\n";
    if (code == kTolerance) fmt::print(stderr, "tolerance breach: {}\n", breach);
    return code;
  } catch (const sticky::DomainError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kValidation;
  } catch (const sticky::ConvergenceError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInternal;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}
