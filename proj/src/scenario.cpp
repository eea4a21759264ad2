#include "csma/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace csma {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

long long get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<long long>();
}

std::size_t get_count(const json& v, const std::string& where) {
  const long long n = get_int(v, where);
  if (n < 0) fail(where, "expected a nonnegative integer");
  return static_cast<std::size_t>(n);
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

/// Scalar broadcast to K entries, or an array of exactly K numbers.
std::vector<double> per_class(const json& v, std::size_t K, const std::string& where) {
  if (v.is_number()) return std::vector<double>(K, v.get<double>());
  if (!v.is_array()) fail(where, "expected a number or an array of numbers");
  if (v.size() != K) fail(where, "expected " + std::to_string(K) + " entries");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], where));
  return out;
}

/// 1-based class list to 0-based indices; range is checked by NetworkSpec.
std::vector<ClassIndex> class_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of class numbers");
  std::vector<ClassIndex> out;
  for (const auto& e : v) {
    const long long c = get_int(e, where);
    if (c < 1) throw SpecError(where + ": class numbers start at 1");
    out.push_back(static_cast<ClassIndex>(c - 1));
  }
  return out;
}

std::vector<int> int_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(static_cast<int>(get_int(e, where)));
  return out;
}

ChannelGraph parse_graph(const json& g, std::size_t K, const std::string& where) {
  check_keys(g, where, {"eligible", "edges"});
  ChannelGraph out;
  if (g.contains("eligible")) {
    out.eligible = class_list(g["eligible"], where + ".eligible");
  } else {
    for (std::size_t k = 0; k < K; ++k) out.eligible.push_back(k);
  }
  if (g.contains("edges")) {
    if (!g["edges"].is_array()) fail(where + ".edges", "expected an array of pairs");
    for (const auto& e : g["edges"]) {
      if (!e.is_array() || e.size() != 2) fail(where + ".edges", "each edge is a pair [k, l]");
      const auto pair = class_list(e, where + ".edges");
      out.edges.emplace_back(pair[0], pair[1]);
    }
  }
  return out;
}

ExperimentBlock parse_experiment(const json& e) {
  const std::string w = "experiment";
  check_keys(e, w, {"kind", "policy", "seed", "horizon", "scaling_n", "replications", "grid",
                    "state", "t_probe", "n_values", "sample_step", "sweep"});
  ExperimentBlock x;
  if (e.contains("kind")) x.kind = get_string(e["kind"], w + ".kind");
  if (e.contains("policy")) {
    try {
      x.policy = parse_policy(get_string(e["policy"], w + ".policy"));
    } catch (const std::invalid_argument& err) {
      fail(w + ".policy", err.what());
    }
  }
  if (e.contains("seed")) {
    if (!e["seed"].is_number_unsigned()) fail(w + ".seed", "expected a nonnegative integer");
    x.seed = e["seed"].get<std::uint64_t>();
  }
  if (e.contains("horizon")) x.horizon = get_number(e["horizon"], w + ".horizon");
  if (e.contains("scaling_n")) x.scaling_n = static_cast<int>(get_int(e["scaling_n"], w + ".scaling_n"));
  if (e.contains("replications")) x.replications = get_count(e["replications"], w + ".replications");
  if (e.contains("grid")) x.grid = get_count(e["grid"], w + ".grid");
  if (e.contains("state")) x.state = int_list(e["state"], w + ".state");
  if (e.contains("t_probe")) x.t_probe = get_number(e["t_probe"], w + ".t_probe");
  if (e.contains("n_values")) x.n_values = int_list(e["n_values"], w + ".n_values");
  if (e.contains("sample_step")) x.sample_step = get_number(e["sample_step"], w + ".sample_step");
  if (e.contains("sweep")) {
    const json& s = e["sweep"];
    check_keys(s, w + ".sweep", {"axes", "max_load"});
    SweepAxes axes;
    if (!s.contains("axes") || !s["axes"].is_array() || s["axes"].size() != 2) {
      fail(w + ".sweep.axes", "expected two class lists");
    }
    for (const auto& a : s["axes"]) axes.axes.push_back(class_list(a, w + ".sweep.axes"));
    if (s.contains("max_load")) axes.max_load = get_number(s["max_load"], w + ".sweep.max_load");
    x.sweep = axes;
  }
  return x;
}

json one_based(const std::vector<ClassIndex>& v) {
  json a = json::array();
  for (ClassIndex k : v) a.push_back(k + 1);
  return a;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(doc, "scenario",
             {"name", "description", "classes", "channels", "mode", "graph", "graphs",
              "access_points", "csma", "traffic", "experiment"});
  for (const char* key : {"name", "classes", "channels"}) {
    if (!doc.contains(key)) fail("scenario", std::string("missing key '") + key + "'");
  }
  const std::string name = get_string(doc["name"], "name");
  const std::string description = doc.contains("description") ? get_string(doc["description"], "description") : "";
  const std::size_t K = get_count(doc["classes"], "classes");
  const std::size_t J = get_count(doc["channels"], "channels");
  if (K == 0 || J == 0) throw SpecError("network needs at least one class and one channel");

  Mode mode = Mode::ad_hoc;
  if (doc.contains("mode")) {
    const std::string m = get_string(doc["mode"], "mode");
    if (m == "ad_hoc" || m == "ad-hoc") {
      mode = Mode::ad_hoc;
    } else if (m == "infrastructure") {
      mode = Mode::infrastructure;
    } else {
      fail("mode", "expected 'ad_hoc' or 'infrastructure'");
    }
  }

  std::vector<ChannelGraph> graphs;
  if (doc.contains("graph") == doc.contains("graphs")) {
    fail("scenario", "give exactly one of 'graph' (all channels) or 'graphs' (one per channel)");
  }
  if (doc.contains("graph")) {
    graphs.assign(J, parse_graph(doc["graph"], K, "graph"));
  } else {
    if (!doc["graphs"].is_array()) fail("graphs", "expected an array");
    for (std::size_t j = 0; j < doc["graphs"].size(); ++j) {
      graphs.push_back(parse_graph(doc["graphs"][j], K, "graphs[" + std::to_string(j + 1) + "]"));
    }
  }

  std::vector<AccessPoint> aps;
  if (doc.contains("access_points")) {
    if (!doc["access_points"].is_array()) fail("access_points", "expected an array");
    for (std::size_t i = 0; i < doc["access_points"].size(); ++i) {
      const json& a = doc["access_points"][i];
      const std::string w = "access_points[" + std::to_string(i + 1) + "]";
      check_keys(a, w, {"uplink", "downlink"});
      AccessPoint ap;
      if (a.contains("uplink")) ap.uplink = class_list(a["uplink"], w + ".uplink");
      if (a.contains("downlink")) ap.downlink = class_list(a["downlink"], w + ".downlink");
      aps.push_back(std::move(ap));
    }
  }
  NetworkSpec spec(K, J, std::move(graphs), mode, std::move(aps));

  std::vector<double> phys(K, 1.0), attempt;
  std::optional<std::vector<std::vector<double>>> probe;
  if (doc.contains("csma")) {
    const json& c = doc["csma"];
    check_keys(c, "csma", {"phys_rate", "attempt_rate", "alpha", "probe_prob"});
    if (c.contains("phys_rate")) phys = per_class(c["phys_rate"], K, "csma.phys_rate");
    if (c.contains("attempt_rate") && c.contains("alpha")) {
      fail("csma", "give at most one of 'attempt_rate' and 'alpha'");
    }
    if (c.contains("attempt_rate")) attempt = per_class(c["attempt_rate"], K, "csma.attempt_rate");
    if (c.contains("alpha")) {
      const auto alpha = per_class(c["alpha"], K, "csma.alpha");
      for (std::size_t k = 0; k < K; ++k) attempt.push_back(alpha[k] * phys[k]);
    }
    if (c.contains("probe_prob")) {
      const json& p = c["probe_prob"];
      if (!p.is_array() || p.size() != K) fail("csma.probe_prob", "expected K rows");
      std::vector<std::vector<double>> rows;
      for (std::size_t k = 0; k < K; ++k) {
        const std::string w = "csma.probe_prob[" + std::to_string(k + 1) + "]";
        if (!p[k].is_array() || p[k].size() != J) fail(w, "expected J entries");
        std::vector<double> row;
        for (const auto& v : p[k]) row.push_back(get_number(v, w));
        rows.push_back(std::move(row));
      }
      probe = std::move(rows);
    }
  }
  if (attempt.empty()) attempt = phys;  // alpha = 1
  CsmaParams params = CsmaParams::uniform(spec, phys, attempt);
  if (probe) params.probe_prob = *probe;

  TrafficSpec traffic;
  traffic.mean_flow_size.assign(K, 1.0);
  traffic.arrival_rate.assign(K, 0.0);
  if (doc.contains("traffic")) {
    const json& t = doc["traffic"];
    check_keys(t, "traffic", {"arrival_rate", "load", "mean_flow_size"});
    if (t.contains("mean_flow_size")) traffic.mean_flow_size = per_class(t["mean_flow_size"], K, "traffic.mean_flow_size");
    if (t.contains("arrival_rate") && t.contains("load")) {
      fail("traffic", "give at most one of 'arrival_rate' and 'load'");
    }
    if (t.contains("arrival_rate")) traffic.arrival_rate = per_class(t["arrival_rate"], K, "traffic.arrival_rate");
    if (t.contains("load")) {
      const auto rho = per_class(t["load"], K, "traffic.load");
      for (std::size_t k = 0; k < K; ++k) traffic.arrival_rate[k] = rho[k] / traffic.mean_flow_size[k];
    }
  }

  ExperimentBlock experiment;
  if (doc.contains("experiment")) experiment = parse_experiment(doc["experiment"]);
  return Scenario{name, description, std::move(spec), std::move(params), std::move(traffic),
                  std::move(experiment)};
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  const std::size_t K = s.spec.num_classes();
  json doc;
  doc["name"] = s.name;
  doc["description"] = s.description;
  doc["classes"] = K;
  doc["channels"] = s.spec.num_channels();
  doc["mode"] = s.spec.mode() == Mode::ad_hoc ? "ad_hoc" : "infrastructure";
  doc["graphs"] = json::array();
  for (const auto& g : s.spec.channel_graphs()) {
    json edges = json::array();
    for (const auto& [a, b] : g.edges) edges.push_back({a + 1, b + 1});
    doc["graphs"].push_back({{"eligible", one_based(g.eligible)}, {"edges", edges}});
  }
  if (s.spec.mode() == Mode::infrastructure || !s.spec.access_points().empty()) {
    doc["access_points"] = json::array();
    for (const auto& ap : s.spec.access_points()) {
      doc["access_points"].push_back({{"uplink", one_based(ap.uplink)}, {"downlink", one_based(ap.downlink)}});
    }
  }
  doc["csma"] = {{"phys_rate", s.params.phys_rate},
                 {"attempt_rate", s.params.attempt_rate},
                 {"probe_prob", s.params.probe_prob}};
  doc["traffic"] = {{"arrival_rate", s.traffic.arrival_rate},
                    {"mean_flow_size", s.traffic.mean_flow_size}};
  json e = json::object();
  const ExperimentBlock& x = s.experiment;
  if (x.kind) e["kind"] = *x.kind;
  if (x.policy) e["policy"] = to_string(*x.policy);
  if (x.seed) e["seed"] = *x.seed;
  if (x.horizon) e["horizon"] = *x.horizon;
  if (x.scaling_n) e["scaling_n"] = *x.scaling_n;
  if (x.replications) e["replications"] = *x.replications;
  if (x.grid) e["grid"] = *x.grid;
  if (x.state) e["state"] = *x.state;
  if (x.t_probe) e["t_probe"] = *x.t_probe;
  if (x.n_values) e["n_values"] = *x.n_values;
  if (x.sample_step) e["sample_step"] = *x.sample_step;
  if (x.sweep) {
    json axes = json::array();
    for (const auto& a : x.sweep->axes) axes.push_back(one_based(a));
    e["sweep"] = {{"axes", axes}, {"max_load", x.sweep->max_load}};
  }
  doc["experiment"] = e;
  return doc.dump(2) + "\n";
}

std::vector<Violation> validate_scenario(const Scenario& s) {
  auto out = validate_spec(s.spec);
  for (auto& v : validate_params(s.spec, s.params)) out.push_back(std::move(v));
  for (auto& v : validate_traffic(s.spec, s.traffic)) out.push_back(std::move(v));
  const std::size_t K = s.spec.num_classes();
  const ExperimentBlock& x = s.experiment;
  static const std::set<std::string> kinds{"equilibrium", "capacity-sweep", "simulate",
                                           "stability-sweep", "timescale"};
  if (x.kind && !kinds.count(*x.kind)) out.push_back({"experiment.kind: unknown kind '" + *x.kind + "'"});
  if (x.horizon && !(*x.horizon > 0.0)) out.push_back({"experiment.horizon must be positive"});
  if (x.scaling_n && *x.scaling_n < 1) out.push_back({"experiment.scaling_n must be at least 1"});
  if (x.replications && *x.replications == 0) out.push_back({"experiment.replications must be positive"});
  if (x.grid && *x.grid < 2) out.push_back({"experiment.grid must be at least 2"});
  if (x.t_probe && *x.t_probe < 0.0) out.push_back({"experiment.t_probe must be nonnegative"});
  if (x.sample_step && !(*x.sample_step > 0.0)) out.push_back({"experiment.sample_step must be positive"});
  if (x.state) {
    if (x.state->size() != K) out.push_back({"experiment.state must have one entry per class"});
    for (int v : *x.state) {
      if (v < 0) out.push_back({"experiment.state entries must be nonnegative"});
    }
  }
  if (x.n_values) {
    for (int n : *x.n_values) {
      if (n < 1) out.push_back({"experiment.n_values entries must be at least 1"});
    }
  }
  if (x.sweep) {
    if (!(x.sweep->max_load > 0.0)) out.push_back({"experiment.sweep.max_load must be positive"});
    std::set<ClassIndex> seen;
    for (const auto& axis : x.sweep->axes) {
      if (axis.empty()) out.push_back({"experiment.sweep.axes: empty axis"});
      for (ClassIndex k : axis) {
        if (k >= K) out.push_back({"experiment.sweep.axes: class " + std::to_string(k + 1) + " out of range"});
        if (!seen.insert(k).second) out.push_back({"experiment.sweep.axes: class " + std::to_string(k + 1) + " on both axes"});
      }
    }
  }
  return out;
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (auto s = bundled_scenario(name_or_path)) return *s;
  return load_scenario_file(name_or_path);
}

}  // namespace csma
