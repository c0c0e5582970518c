// graphgeo: batch pipeline for measurement-based IP geolocation.
// Stages: synth -> preprocess -> train -> geolocate | baseline -> evaluate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphgeo/baselines.hpp"
#include "graphgeo/errors.hpp"
#include "graphgeo/geo.hpp"
#include "graphgeo/graph.hpp"
#include "graphgeo/measurement.hpp"
#include "graphgeo/model.hpp"
#include "graphgeo/rng.hpp"
#include "graphgeo/training.hpp"
#include "graphgeo/util.hpp"

namespace fs = std::filesystem;
using namespace graphgeo;
using ordered_json = nlohmann::ordered_json;

namespace {

// exit codes: 0 ok, 1 data error, 2 usage error, 3 numerical failure
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ValidationError("cannot read " + p.string());
  return f;
}

void make_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
}

// Effective configuration (flags merged over config file) echoed next to
// every command's outputs.
void echo_config(CLI::App* cmd, const fs::path& dir) {
  auto f = open_out(dir / "run_config.txt");
  f << "# effective configuration: " << cmd->get_name() << "\n";
  f << cmd->config_to_str(true, false);
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Flat key=value config file; values only fill options the command line
// left unset, so flags always win. Required options are enforced after the
// merge so they may come from either source.
void apply_config_file(CLI::App* cmd, const std::string& config_path,
                       const std::vector<std::string>& required) {
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("cannot read config file " + config_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string entry = trimmed(line);
      if (entry.empty() || entry[0] == '#') continue;
      std::size_t eq = entry.find('=');
      if (eq == std::string::npos)
        throw ConfigError(config_path + ":" + std::to_string(line_no) + ": expected key=value");
      std::string key = trimmed(entry.substr(0, eq));
      std::string value = trimmed(entry.substr(eq + 1));
      CLI::Option* opt = cmd->get_option_no_throw("--" + key);
      if (!opt || key == "config")
        throw ConfigError(config_path + ":" + std::to_string(line_no) + ": unknown key \"" +
                          key + "\"");
      if (opt->count() > 0) continue; // command line takes precedence
      opt->add_result(value);
      opt->run_callback();
    }
  }
  for (const std::string& name : required) {
    CLI::Option* opt = cmd->get_option_no_throw(name);
    if (opt && opt->count() == 0)
      throw ConfigError(name + " is required (run with --help for usage)");
  }
}

std::vector<std::string> read_ip_lines(const fs::path& p) {
  auto f = open_in(p);
  std::vector<std::string> ips;
  std::string line;
  std::size_t no = 0;
  while (std::getline(f, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!is_ipv4(line))
      throw ValidationError(p.string() + ":" + std::to_string(no) + ": not an IPv4 address");
    ips.push_back(line);
  }
  return ips;
}

void write_predictions(const fs::path& p, std::span<const std::string> ips,
                       std::span<const Coord> coords) {
  auto f = open_out(p);
  f << "ip,lat,lon\n";
  for (std::size_t i = 0; i < ips.size(); ++i)
    f << ips[i] << ',' << format_double(coords[i].lat) << ','
      << format_double(coords[i].lon) << '\n';
}

struct SynthArgs {
  SynthConfig cfg;
  std::string out_dir;
  std::string config_file;
};

int run_synth(const SynthArgs& a, CLI::App* cmd) {
  make_out_dir(a.out_dir);
  SynthOutput out = synth_network(a.cfg);
  {
    auto f = open_out(fs::path(a.out_dir) / "traceroutes.jsonl");
    serialize_traceroutes(out.traceroutes, f);
  }
  {
    auto f = open_out(fs::path(a.out_dir) / "landmarks.csv");
    serialize_landmarks(out.landmarks, f);
  }
  {
    auto f = open_out(fs::path(a.out_dir) / "truth.csv");
    serialize_truth(out.truth, f);
  }
  echo_config(cmd, a.out_dir);
  std::cout << "probe_ip=" << out.truth.probe_ip
            << " landmarks=" << out.landmarks.size()
            << " traceroutes=" << out.traceroutes.size() << "\n";
  return 0;
}

struct PreprocessArgs {
  std::string traceroutes, landmarks, targets_file, probe_ip = "10.0.0.1";
  std::uint64_t bin_seed = 0;
  std::string out_dir;
  std::string config_file;
};

int run_preprocess(const PreprocessArgs& a, CLI::App* cmd) {
  make_out_dir(a.out_dir);
  auto tr_in = open_in(a.traceroutes);
  std::vector<TracerouteRecord> records = parse_traceroutes(tr_in);
  if (records.empty()) throw ValidationError(a.traceroutes + ": no traceroute records");
  auto lm_in = open_in(a.landmarks);
  std::vector<LandmarkRecord> landmarks = parse_landmarks(lm_in);

  std::set<std::string> targets;
  if (!a.targets_file.empty())
    for (const std::string& ip : read_ip_lines(a.targets_file)) targets.insert(ip);

  std::vector<RoutingPath> completed = complete_paths(extract_paths(records));
  AttributedGraph graph =
      build_graph(completed, landmarks, targets, records, a.probe_ip, a.bin_seed);

  {
    auto f = open_out(fs::path(a.out_dir) / "nodes.csv");
    write_nodes_csv(graph, f);
  }
  {
    auto f = open_out(fs::path(a.out_dir) / "edges.csv");
    write_edges_csv(graph, f);
  }
  GraphBundle bundle{std::move(graph), std::move(completed), a.probe_ip};
  {
    auto f = open_out(fs::path(a.out_dir) / "graph.json");
    save_bundle(bundle, f);
  }
  echo_config(cmd, a.out_dir);
  std::cout << "N_V=" << bundle.graph.n_nodes() << " N_E=" << bundle.graph.n_edges() << "\n";
  if (bundle.graph.orientation_conflicts > 0)
    std::cerr << "warning: " << bundle.graph.orientation_conflicts
              << " edges re-derived with conflicting orientation\n";
  return 0;
}

struct TrainArgs {
  std::string graph, landmarks, out_dir;
  TrainConfig cfg;
  double train_frac = 0.7, val_frac = 0.2;
  double probe_lat = std::numeric_limits<double>::quiet_NaN();
  double probe_lon = std::numeric_limits<double>::quiet_NaN();
  int repeats = 1;
  std::string config_file;
};

int run_train(const TrainArgs& a, CLI::App* cmd) {
  make_out_dir(a.out_dir);
  auto g_in = open_in(a.graph);
  GraphBundle bundle = load_bundle(g_in);
  auto lm_in = open_in(a.landmarks);
  std::vector<LandmarkRecord> landmarks = parse_landmarks(lm_in);
  if (a.repeats < 1) throw ConfigError("--repeats must be at least 1");

  bool have_probe = !std::isnan(a.probe_lat) && !std::isnan(a.probe_lon);

  std::optional<TrainReport> first_report;
  std::optional<TrainConfig> first_cfg;
  std::optional<Split> first_split;
  SplitSpec first_spec;
  std::vector<double> repeat_best;

  for (int rep = 0; rep < a.repeats; ++rep) {
    SplitSpec spec;
    spec.train_frac = a.train_frac;
    spec.val_frac = a.val_frac;
    spec.test_frac = 1.0 - a.train_frac - a.val_frac;
    spec.seed = rep == 0 ? a.cfg.seed : Rng::derive(a.cfg.seed, static_cast<std::uint64_t>(rep));
    Split split = split_landmarks(landmarks, spec);

    Labels train_labels = labels_for(bundle.graph, landmarks, split.train);
    Labels val_labels = labels_for(bundle.graph, landmarks, split.val);
    if (have_probe)
      train_labels.push_back({bundle.graph.probe_node, {a.probe_lat, a.probe_lon}});

    TrainConfig cfg = a.cfg;
    if (rep > 0) {
      cfg.seed = spec.seed;
      cfg.model.seed = spec.seed;
    }
    TrainReport report = train_model(bundle.graph, train_labels, val_labels, cfg);
    repeat_best.push_back(report.best_val_km);
    if (rep == 0) {
      first_report = std::move(report);
      first_cfg = cfg;
      first_split = std::move(split);
      first_spec = spec;
    }
  }

  {
    auto f = open_out(fs::path(a.out_dir) / "splits.json");
    save_split(*first_split, first_spec, f);
  }
  {
    Checkpoint ckpt;
    ckpt.config = first_cfg->model;
    ckpt.params = first_report->best_params;
    ckpt.scaler = first_report->scaler;
    ckpt.n_nodes = bundle.graph.n_nodes();
    ckpt.n_edges = bundle.graph.n_edges();
    auto f = open_out(fs::path(a.out_dir) / "checkpoint.json");
    save_checkpoint(ckpt, f);
  }
  {
    std::ostringstream buf;
    write_report_json(*first_report, *first_cfg, buf);
    ordered_json j = ordered_json::parse(buf.str());
    if (a.repeats > 1) {
      j["repeat_best_val_km"] = repeat_best;
      double mean = 0.0;
      for (double v : repeat_best) mean += v;
      j["repeat_mean_val_km"] = mean / static_cast<double>(repeat_best.size());
    }
    auto f = open_out(fs::path(a.out_dir) / "report.json");
    f << j.dump() << '\n';
  }
  echo_config(cmd, a.out_dir);
  std::cout << "best_epoch=" << first_report->best_epoch
            << " best_val_km=" << format_double(first_report->best_val_km)
            << " stop=" << first_report->stop_reason << "\n";
  return 0;
}

struct GeolocateArgs {
  std::string graph, checkpoint, out_dir;
  bool all_nodes = false;
  std::string ips_file;
  std::string splits_file;
  std::string subset = "test";
  std::string config_file;
};

int run_geolocate(const GeolocateArgs& a, CLI::App* cmd) {
  make_out_dir(a.out_dir);
  auto g_in = open_in(a.graph);
  GraphBundle bundle = load_bundle(g_in);
  auto c_in = open_in(a.checkpoint);
  Checkpoint ckpt = load_checkpoint(c_in);
  if (ckpt.n_nodes != bundle.graph.n_nodes())
    throw ValidationError("checkpoint was trained on a different graph");

  std::vector<std::string> ips;
  if (a.all_nodes) {
    for (const GraphNode& n : bundle.graph.nodes) ips.push_back(n.ip);
  } else if (!a.ips_file.empty()) {
    ips = read_ip_lines(a.ips_file);
  } else if (!a.splits_file.empty()) {
    auto s_in = open_in(a.splits_file);
    Split split = load_split(s_in);
    if (a.subset == "train") ips = split.train;
    else if (a.subset == "val") ips = split.val;
    else if (a.subset == "test") ips = split.test;
    else throw ConfigError("--subset must be train, val or test");
  } else {
    for (const GraphNode& n : bundle.graph.nodes)
      if (n.role == NodeRole::Target) ips.push_back(n.ip);
    if (ips.empty())
      throw ValidationError("graph has no target nodes; pass --all-nodes, --ips-file or --splits");
  }

  Tensor out = forward(bundle.graph, ckpt.params, ckpt.config, RunMode::Eval);
  std::vector<Coord> coords;
  coords.reserve(ips.size());
  std::size_t outside = 0;
  for (const std::string& ip : ips) {
    std::int32_t node = bundle.graph.node_of(ip);
    if (node < 0) throw ValidationError("geolocate: " + ip + " is not in the graph");
    Coord c{out.at(static_cast<std::size_t>(node), 0),
            out.at(static_cast<std::size_t>(node), 1)};
    if (ckpt.scaler) {
      if (c.lat < 0.0 || c.lat > 1.0 || c.lon < 0.0 || c.lon > 1.0) ++outside;
      c = ckpt.scaler->inverse(c);
    }
    coords.push_back(c);
  }
  write_predictions(fs::path(a.out_dir) / "predictions.csv", ips, coords);
  echo_config(cmd, a.out_dir);
  std::cout << "predictions=" << ips.size() << "\n";
  if (outside > 0)
    std::cerr << "warning: " << outside << " predictions outside the scaler box\n";
  return 0;
}

struct BaselineArgs {
  std::string graph, landmarks, splits, out_dir, method;
  std::string ips_file;
  std::string config_file;
  double ca = std::numeric_limits<double>::quiet_NaN();
  double cb = std::numeric_limits<double>::quiet_NaN();
  MlpGeoConfig mlp;
};

int run_baseline(const BaselineArgs& a, CLI::App* cmd) {
  make_out_dir(a.out_dir);
  auto g_in = open_in(a.graph);
  GraphBundle bundle = load_bundle(g_in);
  auto lm_in = open_in(a.landmarks);
  std::vector<LandmarkRecord> landmarks = parse_landmarks(lm_in);
  auto s_in = open_in(a.splits);
  Split split = load_split(s_in);

  PathIndex index = PathIndex::from_graph(bundle.graph, bundle.paths);

  std::unordered_map<std::string, LandmarkRecord> by_ip;
  for (const LandmarkRecord& lm : landmarks) by_ip[lm.ip] = lm;
  auto pick = [&](const std::vector<std::string>& ips) {
    std::vector<LandmarkRecord> out;
    for (const std::string& ip : ips) {
      auto it = by_ip.find(ip);
      if (it == by_ip.end()) throw ValidationError("baseline: unknown landmark " + ip);
      out.push_back(it->second);
    }
    return out;
  };
  std::vector<LandmarkRecord> train_lm = pick(split.train);
  std::vector<LandmarkRecord> val_lm = pick(split.val);
  // rule-based baselines reference every landmark with a known location
  std::vector<LandmarkRecord> reference = train_lm;
  reference.insert(reference.end(), val_lm.begin(), val_lm.end());

  std::vector<std::string> targets =
      a.ips_file.empty() ? split.test : read_ip_lines(a.ips_file);
  if (targets.empty()) throw ValidationError("baseline: no target ips");

  std::vector<Coord> coords;
  if (a.method == "slg") {
    for (const std::string& t : targets)
      coords.push_back(slg_geolocate(t, reference, index));
  } else if (a.method == "corr-slg") {
    if (std::isnan(a.ca) || std::isnan(a.cb))
      throw ConfigError("corr-slg requires --ca and --cb");
    coords = corr_slg_geolocate(targets, reference, index, a.ca, a.cb);
  } else if (a.method == "mlp-geo") {
    MlpGeoReport report = mlp_geo_train(index, train_lm, val_lm, a.mlp);
    coords = mlp_geo_predict(report.model, index, targets);
    std::cout << "mlp_best_epoch=" << report.best_epoch
              << " mlp_best_val_km=" << format_double(report.best_val_km) << "\n";
  } else {
    throw ConfigError("unknown baseline method: " + a.method);
  }

  write_predictions(fs::path(a.out_dir) / "predictions.csv", targets, coords);
  echo_config(cmd, a.out_dir);
  std::cout << "predictions=" << targets.size() << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string predictions, truth, out_dir;
  std::string config_file;
};

int run_evaluate(const EvaluateArgs& a, CLI::App* cmd) {
  make_out_dir(a.out_dir);
  auto p_in = open_in(a.predictions);
  std::vector<LandmarkRecord> preds = parse_landmarks(p_in);
  auto t_in = open_in(a.truth);
  GroundTruth truth = parse_truth(t_in);

  std::vector<std::string> missing;
  std::vector<double> errors;
  for (const LandmarkRecord& p : preds) {
    auto it = truth.locations.find(p.ip);
    if (it == truth.locations.end()) {
      missing.push_back(p.ip);
      continue;
    }
    errors.push_back(haversine_km({p.lat, p.lon}, it->second));
  }
  if (!missing.empty()) {
    std::string list;
    for (const std::string& ip : missing) list += (list.empty() ? "" : ", ") + ip;
    throw ValidationError("predictions without ground truth: " + list);
  }

  ErrorStats stats = error_stats(errors);
  {
    ordered_json j;
    j["average_km"] = stats.average_km;
    j["median_km"] = stats.median_km;
    j["max_km"] = stats.max_km;
    j["n"] = stats.n;
    auto f = open_out(fs::path(a.out_dir) / "metrics.json");
    f << j.dump() << '\n';
  }
  {
    auto f = open_out(fs::path(a.out_dir) / "cdf.csv");
    f << "error_km,cumulative_fraction\n";
    for (const CdfPoint& pt : cdf(errors))
      f << format_double(pt.error_km) << ',' << format_double(pt.fraction) << '\n';
  }
  echo_config(cmd, a.out_dir);
  std::cout << "average_km=" << format_double(stats.average_km)
            << " median_km=" << format_double(stats.median_km)
            << " max_km=" << format_double(stats.max_km) << " n=" << stats.n << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"measurement-based IP geolocation pipeline"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic measurement set");
  synth_cmd->add_option("--config", synth.config_file, "flat key=value config file");
  synth_cmd->add_option("--seed", synth.cfg.seed, "generator seed");
  synth_cmd->add_option("--landmarks", synth.cfg.n_landmarks, "number of landmarks");
  synth_cmd->add_option("--routers", synth.cfg.n_routers, "number of routers");
  synth_cmd->add_option("--lat-min", synth.cfg.region.lat_min);
  synth_cmd->add_option("--lat-max", synth.cfg.region.lat_max);
  synth_cmd->add_option("--lon-min", synth.cfg.region.lon_min);
  synth_cmd->add_option("--lon-max", synth.cfg.region.lon_max);
  synth_cmd->add_option("--repetitions", synth.cfg.repetitions, "probes per destination");
  synth_cmd->add_option("--prop-speed", synth.cfg.prop_speed_km_per_ms, "km per ms");
  synth_cmd->add_option("--noise", synth.cfg.per_hop_noise_ms, "per-hop noise std dev (ms)");
  synth_cmd->add_option("--violation", synth.cfg.rule_violation_fraction,
                        "fraction of anti-correlated landmarks");
  synth_cmd->add_option("--anonymity", synth.cfg.anonymity_prob,
                        "per-hop anonymization probability");
  synth_cmd->add_option("--extra-edges", synth.cfg.extra_edges);
  synth_cmd->add_option("-o,--out", synth.out_dir, "output directory");

  PreprocessArgs pre;
  CLI::App* pre_cmd = app.add_subcommand("preprocess", "build the attributed graph");
  pre_cmd->add_option("--config", pre.config_file, "flat key=value config file");
  pre_cmd->add_option("--traceroutes", pre.traceroutes, "traceroute JSONL file");
  pre_cmd->add_option("--landmarks", pre.landmarks, "landmark CSV file");
  pre_cmd->add_option("--targets", pre.targets_file, "file with one target ip per line");
  pre_cmd->add_option("--probe-ip", pre.probe_ip, "probing host ip");
  pre_cmd->add_option("--bin-seed", pre.bin_seed, "k-means seed for delay bins");
  pre_cmd->add_option("-o,--out", pre.out_dir, "output directory");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train the message-passing model");
  train_cmd->add_option("--config", train.config_file, "flat key=value config file");
  train_cmd->add_option("--graph", train.graph, "graph bundle from preprocess");
  train_cmd->add_option("--landmarks", train.landmarks, "landmark CSV file");
  train_cmd->add_option("--seed", train.cfg.seed, "split/init seed");
  train_cmd->add_option("--lr", train.cfg.lr, "learning rate");
  train_cmd->add_option("--l2", train.cfg.l2, "L2 coefficient");
  train_cmd->add_option("--max-epochs", train.cfg.max_epochs);
  train_cmd->add_option("--patience", train.cfg.patience, "early-stop patience (epochs)");
  train_cmd->add_option("--embed-dim", train.cfg.model.embed_dim, "node embedding width");
  train_cmd->add_option("--edge-dim", train.cfg.model.edge_dim, "edge embedding width");
  train_cmd->add_option("--layers", train.cfg.model.num_layers, "message-passing depth");
  std::string aggregator = "mean", decoder = "bn_sigmoid";
  train_cmd->add_option("--aggregator", aggregator, "mean|sum|max");
  train_cmd->add_option("--edge-hidden", train.cfg.model.edge_hidden,
                        "edge-network hidden width (0 = 2*edge_dim)");
  train_cmd->add_option("--decoder", decoder, "vanilla|vanilla_bn|sigmoid|bn_sigmoid");
  train_cmd->add_option("--train-frac", train.train_frac);
  train_cmd->add_option("--val-frac", train.val_frac);
  train_cmd->add_option("--probe-lat", train.probe_lat, "probing host latitude");
  train_cmd->add_option("--probe-lon", train.probe_lon, "probing host longitude");
  train_cmd->add_flag("--raw-targets", [&train](std::int64_t) { train.cfg.rule_based_scaling = false; },
                      "regress raw degrees instead of scaled coordinates");
  train_cmd->add_flag("--regularize-all", [&train](std::int64_t) { train.cfg.regularize_all = true; },
                      "L2 over biases and batch-norm parameters too");
  train_cmd->add_option("--repeats", train.repeats, "independent split/train repeats");
  train_cmd->add_option("-o,--out", train.out_dir, "output directory");

  GeolocateArgs geo;
  CLI::App* geo_cmd = app.add_subcommand("geolocate", "predict locations from a checkpoint");
  geo_cmd->add_option("--config", geo.config_file, "flat key=value config file");
  geo_cmd->add_option("--graph", geo.graph);
  geo_cmd->add_option("--checkpoint", geo.checkpoint);
  geo_cmd->add_flag("--all-nodes", geo.all_nodes, "predict every node, routers included");
  geo_cmd->add_option("--ips-file", geo.ips_file, "file with one ip per line");
  geo_cmd->add_option("--splits", geo.splits_file, "splits.json from train");
  geo_cmd->add_option("--subset", geo.subset, "train|val|test (with --splits)");
  geo_cmd->add_option("-o,--out", geo.out_dir, "output directory");

  BaselineArgs base;
  CLI::App* base_cmd = app.add_subcommand("baseline", "run a reference geolocation method");
  base_cmd->add_option("--config", base.config_file, "flat key=value config file");
  base_cmd->add_option("--graph", base.graph);
  base_cmd->add_option("--landmarks", base.landmarks);
  base_cmd->add_option("--splits", base.splits);
  base_cmd->add_option("--method", base.method, "slg|corr-slg|mlp-geo");
  base_cmd->add_option("--ips-file", base.ips_file, "targets (default: test split)");
  base_cmd->add_option("--ca", base.ca, "corr-slg positive threshold");
  base_cmd->add_option("--cb", base.cb, "corr-slg negative threshold");
  base_cmd->add_option("--hidden", base.mlp.hidden, "mlp-geo hidden width");
  base_cmd->add_option("--lr", base.mlp.lr, "mlp-geo learning rate");
  base_cmd->add_option("--l2", base.mlp.l2, "mlp-geo L2 coefficient");
  base_cmd->add_option("--epochs", base.mlp.max_epochs, "mlp-geo training epochs");
  base_cmd->add_option("--mlp-patience", base.mlp.patience);
  base_cmd->add_option("--beta", base.mlp.beta, "router presence value");
  base_cmd->add_option("--seed", base.mlp.seed);
  base_cmd->add_option("-o,--out", base.out_dir, "output directory");

  EvaluateArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score predictions against ground truth");
  eval_cmd->add_option("--config", eval.config_file, "flat key=value config file");
  eval_cmd->add_option("--predictions", eval.predictions);
  eval_cmd->add_option("--truth", eval.truth);
  eval_cmd->add_option("-o,--out", eval.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth_cmd) {
      apply_config_file(synth_cmd, synth.config_file, {"--out"});
      return run_synth(synth, synth_cmd);
    }
    if (*pre_cmd) {
      apply_config_file(pre_cmd, pre.config_file, {"--traceroutes", "--landmarks", "--out"});
      return run_preprocess(pre, pre_cmd);
    }
    if (*train_cmd) {
      apply_config_file(train_cmd, train.config_file, {"--graph", "--landmarks", "--out"});
      train.cfg.model.aggregator = aggregator_from_string(aggregator);
      train.cfg.model.decoder = decoder_from_string(decoder);
      train.cfg.model.seed = train.cfg.seed;
      return run_train(train, train_cmd);
    }
    if (*geo_cmd) {
      apply_config_file(geo_cmd, geo.config_file, {"--graph", "--checkpoint", "--out"});
      return run_geolocate(geo, geo_cmd);
    }
    if (*base_cmd) {
      apply_config_file(base_cmd, base.config_file,
                        {"--graph", "--landmarks", "--splits", "--method", "--out"});
      return run_baseline(base, base_cmd);
    }
    if (*eval_cmd) {
      apply_config_file(eval_cmd, eval.config_file, {"--predictions", "--truth", "--out"});
      return run_evaluate(eval, eval_cmd);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
