#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "csma/capacity.hpp"
#include "csma/dynamics.hpp"
#include "csma/equilibrium.hpp"
#include "csma/parallel.hpp"
#include "csma/rng.hpp"
#include "csma/stability.hpp"
#include "region_plot.hpp"

namespace csma::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kKinds{"equilibrium", "capacity-sweep", "simulate",
                                      "stability-sweep", "timescale"};

/// Violations found after parsing; reported with the validation exit code.
class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    const int v = std::stoi(cell, &used);
    if (used != cell.size()) throw std::invalid_argument("bad integer '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

Policy default_policy(const Scenario& s) {
  return s.spec.mode() == Mode::infrastructure ? Policy::standard_infra : Policy::adhoc;
}

std::vector<double> grid_values(std::size_t n, double max_load) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = max_load * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> loads_at(const Scenario& s, double u, double w) {
  auto rho = s.traffic.loads();
  for (ClassIndex k : s.experiment.sweep->axes[0]) rho[k] = u;
  for (ClassIndex k : s.experiment.sweep->axes[1]) rho[k] = w;
  return rho;
}

TrafficSpec traffic_with_loads(const TrafficSpec& base, const std::vector<double>& rho) {
  TrafficSpec t = base;
  for (std::size_t k = 0; k < rho.size(); ++k) t.arrival_rate[k] = rho[k] / t.mean_flow_size[k];
  return t;
}

SimConfig sim_config(const Scenario& s) {
  const ExperimentBlock& x = s.experiment;
  SimConfig c;
  c.policy = *x.policy;
  c.horizon = *x.horizon;
  c.seed = *x.seed;
  if (x.scaling_n) c.scaling_n = *x.scaling_n;
  for (double t = *x.sample_step; t < c.horizon; t += *x.sample_step) c.sample_times.push_back(t);
  c.sample_times.push_back(c.horizon);
  c.initial_state = NetworkState(*x.state);
  return c;
}

std::vector<Trajectory> simulate_runs(const Scenario& s, const TrafficSpec& traffic) {
  const SimConfig cfg = sim_config(s);
  const bool joint = s.experiment.scaling_n.has_value();
  return simulate_replications(
      [&](const SimConfig& c) {
        return joint ? simulate_joint(s.spec, s.params, traffic, c)
                     : simulate_separated(s.spec, s.params, traffic, c);
      },
      cfg, *s.experiment.replications);
}

SlopeOptions slope_options(const Scenario& s, const TrafficSpec& traffic, double capacity_scale) {
  SlopeOptions o;
  o.seed = derive_seed(*s.experiment.seed, 0x51);
  o.min_horizon = 1e4 * max_service_time(s.params, traffic);
  o.queue_bound = heuristic_queue_bound(s.spec.num_classes(), capacity_scale);
  return o;
}

std::string verdict_row(const StabilityVerdict& v) {
  return to_string(v.verdict) + ',' + fmt(v.slope) + ',' + fmt(v.ci_lo) + ',' + fmt(v.ci_hi) + ',' +
         fmt(v.max_time_average) + ',' + std::to_string(v.aborted);
}

Outputs run_equilibrium(const Scenario& s) {
  const EquilibriumResult r =
      equilibrium(s.spec, NetworkState(*s.experiment.state), s.params, *s.experiment.policy);
  return {{"throughput.csv", r.throughput_csv()}, {"distribution.csv", r.distribution_csv()}};
}

Outputs run_capacity_sweep(const Scenario& s) {
  const auto values = grid_values(*s.experiment.grid, s.experiment.sweep->max_load);
  const std::size_t n = values.size();
  std::optional<Partition> partition;
  try {
    partition = detect_l_partite(s.spec);
  } catch (const SpecError&) {
  }
  std::vector<std::string> rows(n * n);
  parallel_for(n * n, [&](std::size_t idx) {
    const double u = values[idx / n], w = values[idx % n];
    const auto rho = loads_at(s, u, w);
    const CapacityVerdict v = membership(rho, s.spec, s.params);
    std::string closed = "na";
    if (partition) {
      const double slack = static_cast<double>(s.spec.num_channels()) - lpartite_load(rho, *partition, s.params);
      closed = slack > 0.0 ? "interior" : "exterior";
    }
    rows[idx] = fmt(u) + ',' + fmt(w) + ',' + to_string(v.status) + ',' + fmt(v.scale) + ',' +
                fmt(v.margin) + ',' + closed + '\n';
  });
  std::string csv = "u,v,status,scale,margin,lpartite\n";
  for (const auto& r : rows) csv += r;
  return {{"region.csv", csv}};
}

Outputs run_simulate(const Scenario& s) {
  const auto runs = simulate_runs(s, s.traffic);
  Outputs out;
  const std::size_t K = s.spec.num_classes();
  std::string summary = "replication,aborted,end_time,arrivals,departures";
  for (std::size_t k = 0; k < K; ++k) summary += ",mean_x_" + std::to_string(k + 1);
  summary += '\n';
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    out["trajectory_" + std::to_string(r + 1) + ".csv"] = run.to_csv();
    long arrivals = 0, departures = 0;
    for (std::size_t k = 0; k < K; ++k) {
      arrivals += run.events.arrivals[k];
      departures += run.events.departures[k];
    }
    summary += std::to_string(r + 1) + ',' + (run.aborted ? "1" : "0") + ',' + fmt(run.end_time) + ',' +
               std::to_string(arrivals) + ',' + std::to_string(departures);
    for (double m : run.time_average) summary += ',' + fmt(m);
    summary += '\n';
  }
  out["summary.csv"] = summary;
  if (runs.size() >= 5) {
    const double scale = membership(s.traffic.loads(), s.spec, s.params).scale;
    const auto v = fluid_slope(runs, slope_options(s, s.traffic, scale));
    std::string csv = "verdict,slope,ci_lo,ci_hi,max_time_average,aborted";
    for (std::size_t k = 0; k < K; ++k) csv += ",slope_" + std::to_string(k + 1);
    csv += '\n' + verdict_row(v);
    for (double p : v.per_class_slopes) csv += ',' + fmt(p);
    out["verdict.csv"] = csv + '\n';
  }
  return out;
}

Outputs run_stability_sweep(const Scenario& s) {
  const auto values = grid_values(*s.experiment.grid, s.experiment.sweep->max_load);
  std::string csv = "u,v,verdict,slope,ci_lo,ci_hi,max_time_average,aborted,lp_status\n";
  for (double u : values) {
    for (double w : values) {
      const auto rho = loads_at(s, u, w);
      const TrafficSpec traffic = traffic_with_loads(s.traffic, rho);
      const CapacityVerdict lp = membership(rho, s.spec, s.params);
      const auto runs = simulate_runs(s, traffic);
      const auto v = fluid_slope(runs, slope_options(s, traffic, lp.scale));
      csv += fmt(u) + ',' + fmt(w) + ',' + verdict_row(v) + ',' + to_string(lp.status) + '\n';
    }
  }
  return {{"sweep.csv", csv}};
}

Outputs run_timescale(const Scenario& s) {
  const ExperimentBlock& x = s.experiment;
  TimescaleConfig c;
  c.policy = *x.policy;
  c.initial_state = NetworkState(*x.state);
  c.n_values = *x.n_values;
  c.t_probe = *x.t_probe;
  c.replications = *x.replications;
  c.seed = *x.seed;
  return {{"distance.csv", distance_csv(timescale_convergence(s.spec, s.params, s.traffic, c))}};
}

json diagnostic(const char* category, int code, const std::string& message) {
  return {{"error", category}, {"code", code}, {"message", message}};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream o(p, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + p.string());
  o << data;
}

fs::path default_output(const std::string& scenario, const std::string& kind) {
  const char* root = std::getenv("CSMA_OUTPUT_ROOT");
  return fs::path(root && *root ? root : "results") / (scenario + "-" + kind);
}

Scenario checked(Scenario s) {
  const auto violations = validate_scenario(s);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v.message;
    throw ValidationFailure(msg);
  }
  return s;
}

/// Runs one experiment, returns the output directory.
fs::path execute(const Scenario& effective, const std::string& kind, const fs::path& dir,
                 std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Outputs outputs = compute_outputs(effective, kind);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run(dir, effective, kind, outputs, wall);
  out << "wrote " << outputs.size() << " file(s) and manifest.json to " << dir.string() << '\n';
  return dir;
}

}  // namespace

Scenario apply_overrides(Scenario s, const Overrides& o) {
  ExperimentBlock& x = s.experiment;
  if (o.seed) x.seed = o.seed;
  if (o.policy) x.policy = o.policy;
  if (o.horizon) x.horizon = o.horizon;
  if (o.t_probe) x.t_probe = o.t_probe;
  if (o.grid) x.grid = o.grid;
  if (o.replications) x.replications = o.replications;
  if (o.scaling_n) x.scaling_n = o.scaling_n;
  if (o.state) x.state = o.state;
  if (o.alpha) s.params = s.params.with_alpha(*o.alpha);
  return s;
}

Scenario effective_scenario(Scenario s, const std::string& kind) {
  if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
    throw std::invalid_argument("unknown experiment kind '" + kind + "'");
  }
  ExperimentBlock& x = s.experiment;
  const std::size_t K = s.spec.num_classes();
  x.kind = kind;
  if (!x.policy) x.policy = default_policy(s);
  if (!x.seed) x.seed = 1;
  const bool sweep = kind == "capacity-sweep" || kind == "stability-sweep";
  const bool sim = kind == "simulate" || kind == "stability-sweep";
  if (kind == "equilibrium" && !x.state) {
    throw std::invalid_argument("equilibrium needs a flow state (--state or experiment.state)");
  }
  if (kind != "equilibrium" && !x.state) x.state = std::vector<int>(K, 0);
  if (sweep) {
    if (!x.grid) x.grid = kind == "capacity-sweep" ? 50 : 5;
    if (!x.sweep) {
      if (K < 2) throw std::invalid_argument("load sweeps need at least two classes or explicit axes");
      x.sweep = SweepAxes{{{0}, {1}}, 1.0};
    }
  }
  if (sim) {
    if (!x.horizon) x.horizon = 1e4 * max_service_time(s.params, s.traffic);
    if (!x.replications) x.replications = 5;
    if (!x.sample_step) x.sample_step = *x.horizon / 200.0;
  }
  if (kind == "timescale") {
    if (!x.t_probe) x.t_probe = 1.0;
    if (!x.n_values) x.n_values = std::vector<int>{1, 4, 16, 64};
    if (!x.replications) x.replications = 2000;
  }
  return s;
}

Outputs compute_outputs(const Scenario& s, const std::string& kind) {
  if (kind == "equilibrium") return run_equilibrium(s);
  if (kind == "capacity-sweep") return run_capacity_sweep(s);
  if (kind == "simulate") return run_simulate(s);
  if (kind == "stability-sweep") return run_stability_sweep(s);
  if (kind == "timescale") return run_timescale(s);
  throw std::invalid_argument("unknown experiment kind '" + kind + "'");
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

void write_run(const fs::path& dir, const Scenario& effective, const std::string& kind,
               const Outputs& outputs, double wall_seconds) {
  fs::create_directories(dir);
  json files = json::object();
  for (const auto& [name, data] : outputs) {
    write_file(dir / name, data);
    files[name] = hex64(fnv1a64(data));
  }
  const std::string canonical = serialize_scenario(effective);
  json manifest{{"tool", "csma"},
                {"version", kVersion},
                {"compiler", __VERSION__},
                {"kind", kind},
                {"seed", *effective.experiment.seed},
                {"config_hash", hex64(fnv1a64(kind + '\n' + canonical))},
                {"scenario", json::parse(canonical)},
                {"outputs", files},
                {"wall_time_seconds", wall_seconds}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-channel CSMA analysis and simulation toolkit"};
  app.require_subcommand(1);

  std::string kind, scenario_arg, output, policy_arg, state_arg;
  Overrides ov;
  std::uint64_t seed = 0;
  double alpha = 0, horizon = 0, t_probe = 0;
  std::size_t grid = 0, replications = 0;
  int scaling_n = 0;

  auto* run = app.add_subcommand("run", "Run an experiment and write its results and manifest");
  run->add_option("kind", kind, "equilibrium | capacity-sweep | simulate | stability-sweep | timescale")
      ->required();
  run->add_option("--scenario", scenario_arg, "Bundled scenario name or JSON file")->required();
  run->add_option("--output", output, "Output directory");
  auto* o_seed = run->add_option("--seed", seed, "Master seed");
  auto* o_policy = run->add_option("--policy", policy_arg, "adhoc | standard_infra | flow_aware");
  auto* o_alpha = run->add_option("--alpha", alpha, "Set alpha = nu/phi for every class");
  auto* o_grid = run->add_option("--grid", grid, "Grid points per sweep axis");
  auto* o_horizon = run->add_option("--horizon", horizon, "Simulated time per run");
  auto* o_reps = run->add_option("--replications", replications, "Independent replications");
  auto* o_n = run->add_option("--scaling-n", scaling_n, "Packet-level acceleration N (joint model)");
  auto* o_state = run->add_option("--state", state_arg, "Flow state, comma separated (e.g. 1,1,1,1,0)");
  auto* o_probe = run->add_option("--t-probe", t_probe, "Probe time of the time-scale study");

  std::string manifest_arg, rerun_output;
  auto* rerun = app.add_subcommand("rerun", "Re-run an experiment from its manifest and compare outputs");
  rerun->add_option("manifest", manifest_arg, "manifest.json of a previous run")->required();
  rerun->add_option("--output", rerun_output, "Output directory (default: <run>/rerun)");

  std::string sweep_arg, plot_output;
  auto* plot = app.add_subcommand("export-region-plot", "Boundary polylines from a sweep CSV");
  plot->add_option("sweep_csv", sweep_arg, "region.csv or sweep.csv")->required();
  plot->add_option("--output", plot_output, "Output directory (default: next to the CSV)");

  std::size_t boundary_grid = 101;
  auto* boundary = app.add_subcommand("boundary", "Bow-tie boundary table and homogeneous fixed point");
  boundary->add_option("--grid", boundary_grid, "Number of rho_1 values in [0, 1]");

  auto* list = app.add_subcommand("scenarios", "List bundled scenarios");
  std::string show_name;
  auto* show = app.add_subcommand("show", "Print a scenario in canonical form");
  show->add_option("scenario", show_name, "Bundled scenario name or JSON file")->required();
  auto* validate = app.add_subcommand("validate", "Validate a scenario");
  validate->add_option("scenario", show_name, "Bundled scenario name or JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      if (*o_seed) ov.seed = seed;
      if (*o_policy) {
        try {
          ov.policy = parse_policy(policy_arg);
        } catch (const std::invalid_argument& e) {
          err << diagnostic("usage", kUsage, e.what()).dump() << '\n';
          return kUsage;
        }
      }
      if (*o_alpha) ov.alpha = alpha;
      if (*o_grid) ov.grid = grid;
      if (*o_horizon) ov.horizon = horizon;
      if (*o_reps) ov.replications = replications;
      if (*o_n) ov.scaling_n = scaling_n;
      if (*o_probe) ov.t_probe = t_probe;
      if (*o_state) {
        try {
          ov.state = parse_int_list(state_arg);
        } catch (const std::exception&) {
          err << diagnostic("usage", kUsage, "--state expects comma-separated integers").dump() << '\n';
          return kUsage;
        }
      }
      if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
        err << diagnostic("usage", kUsage, "unknown experiment kind '" + kind + "'").dump() << '\n';
        return kUsage;
      }
      Scenario base = resolve_scenario(scenario_arg);
      const Scenario effective = [&] {
        try {
          return checked(effective_scenario(apply_overrides(std::move(base), ov), kind));
        } catch (const SpecError&) {
          throw;
        } catch (const std::invalid_argument& e) {
          throw ValidationFailure(e.what());
        }
      }();
      const fs::path dir = output.empty() ? default_output(effective.name, kind) : fs::path(output);
      execute(effective, kind, dir, out);
      return kOk;
    }
    if (*rerun) {
      const fs::path mpath(manifest_arg);
      json manifest;
      try {
        manifest = json::parse(read_file(mpath));
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what());
      }
      if (!manifest.contains("kind") || !manifest.contains("scenario") || !manifest.contains("outputs")) {
        throw ParseError("manifest: missing kind, scenario or outputs");
      }
      const std::string k = manifest["kind"].get<std::string>();
      const Scenario effective = checked(parse_scenario(manifest["scenario"].dump()));
      const fs::path dir = rerun_output.empty() ? mpath.parent_path() / "rerun" : fs::path(rerun_output);
      execute(effective, k, dir, out);
      std::size_t differing = 0;
      for (const auto& [name, hash] : manifest["outputs"].items()) {
        const std::string now = hex64(fnv1a64(read_file(dir / name)));
        if (now != hash.get<std::string>()) {
          err << diagnostic("mismatch", kMismatch, name + " differs from the recorded run").dump() << '\n';
          ++differing;
        }
      }
      if (differing) return kMismatch;
      out << "all " << manifest["outputs"].size() << " output(s) identical to the recorded run\n";
      return kOk;
    }
    if (*plot) {
      const fs::path in(sweep_arg);
      const auto lines = region_plot(read_file(in));
      const fs::path dir = plot_output.empty() ? in.parent_path() / "plot" : fs::path(plot_output);
      fs::create_directories(dir);
      write_file(dir / "region_plot.csv", region_plot_csv(lines));
      for (const auto& l : lines) write_file(dir / (l.source + ".dat"), gnuplot_data(l));
      out << "wrote region_plot.csv and " << lines.size() << " polyline file(s) to " << dir.string() << '\n';
      return kOk;
    }
    if (*boundary) {
      if (boundary_grid < 2) throw ValidationFailure("--grid must be at least 2");
      std::vector<double> g(boundary_grid);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i) / static_cast<double>(g.size() - 1);
      out << boundary_csv(bowtie_boundary(g));
      err << "homogeneous fixed point: " << fmt(bowtie_fixed_point()) << '\n';
      return kOk;
    }
    if (*list) {
      for (const auto& name : bundled_scenario_names()) {
        out << name << "\t" << bundled_scenario(name)->description << '\n';
      }
      return kOk;
    }
    if (*show) {
      out << serialize_scenario(resolve_scenario(show_name));
      return kOk;
    }
    if (*validate) {
      const auto violations = validate_scenario(resolve_scenario(show_name));
      for (const auto& v : violations) out << v.message << '\n';
      if (!violations.empty()) return kValidation;
      out << "valid\n";
      return kOk;
    }
  } catch (const ParseError& e) {
    err << diagnostic("parse", kParse, e.what()).dump() << '\n';
    return kParse;
  } catch (const SchemaError& e) {
    err << diagnostic("parse", kParse, e.what()).dump() << '\n';
    return kParse;
  } catch (const ValidationFailure& e) {
    err << diagnostic("validation", kValidation, e.what()).dump() << '\n';
    return kValidation;
  } catch (const SpecError& e) {
    err << diagnostic("validation", kValidation, e.what()).dump() << '\n';
    return kValidation;
  } catch (const CapacityGuardError& e) {
    err << diagnostic("capacity-guard", kCapacityGuard, e.what()).dump() << '\n';
    return kCapacityGuard;
  } catch (const SolverError& e) {
    err << diagnostic("solver", kSolver, e.what()).dump() << '\n';
    return kSolver;
  } catch (const std::invalid_argument& e) {
    err << diagnostic("validation", kValidation, e.what()).dump() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << diagnostic("runtime", kSolver, e.what()).dump() << '\n';
    return kSolver;
  }
  return kUsage;
}

}  // namespace csma::cli
