#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "graphgeo/baselines.hpp"
#include "graphgeo/errors.hpp"
#include "graphgeo/geo.hpp"
#include "graphgeo/graph.hpp"
#include "graphgeo/measurement.hpp"
#include "graphgeo/model.hpp"
#include "graphgeo/training.hpp"

namespace py = pybind11;
using namespace graphgeo;

namespace {

std::vector<std::vector<double>> tensor_rows(const Tensor& t) {
  std::vector<std::vector<double>> rows;
  if (t.rank() != 2) throw DimensionError("expected a matrix");
  rows.reserve(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::vector<double> row(t.cols());
    for (std::size_t j = 0; j < t.cols(); ++j) row[j] = t.at(i, j);
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "graph-based IP geolocation: measurement ingestion, graph "
            "construction, model training, baselines and evaluation";

  py::class_<Coord>(m, "Coord")
      .def(py::init<>())
      .def(py::init([](double lat, double lon) { return Coord{lat, lon}; }),
           py::arg("lat"), py::arg("lon"))
      .def_readwrite("lat", &Coord::lat)
      .def_readwrite("lon", &Coord::lon)
      .def("__repr__", [](const Coord& c) {
        return "Coord(lat=" + std::to_string(c.lat) + ", lon=" + std::to_string(c.lon) + ")";
      });

  py::class_<Hop>(m, "Hop")
      .def(py::init<>())
      .def_readwrite("ttl", &Hop::ttl)
      .def_readwrite("ip", &Hop::ip)
      .def_readwrite("rtt_ms", &Hop::rtt_ms)
      .def_property_readonly("anonymous", &Hop::anonymous);

  py::class_<TracerouteRecord>(m, "TracerouteRecord")
      .def(py::init<>())
      .def_readwrite("dst_ip", &TracerouteRecord::dst_ip)
      .def_readwrite("probe_seq", &TracerouteRecord::probe_seq)
      .def_readwrite("hops", &TracerouteRecord::hops);

  py::class_<LandmarkRecord>(m, "LandmarkRecord")
      .def(py::init<>())
      .def(py::init([](std::string ip, double lat, double lon) {
             return LandmarkRecord{std::move(ip), lat, lon};
           }),
           py::arg("ip"), py::arg("lat"), py::arg("lon"))
      .def_readwrite("ip", &LandmarkRecord::ip)
      .def_readwrite("lat", &LandmarkRecord::lat)
      .def_readwrite("lon", &LandmarkRecord::lon);

  py::class_<RegionBox>(m, "RegionBox")
      .def(py::init<>())
      .def(py::init([](double lat_min, double lat_max, double lon_min, double lon_max) {
             return RegionBox{lat_min, lat_max, lon_min, lon_max};
           }),
           py::arg("lat_min"), py::arg("lat_max"), py::arg("lon_min"), py::arg("lon_max"))
      .def_readwrite("lat_min", &RegionBox::lat_min)
      .def_readwrite("lat_max", &RegionBox::lat_max)
      .def_readwrite("lon_min", &RegionBox::lon_min)
      .def_readwrite("lon_max", &RegionBox::lon_max);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("n_landmarks", &SynthConfig::n_landmarks)
      .def_readwrite("n_routers", &SynthConfig::n_routers)
      .def_readwrite("region", &SynthConfig::region)
      .def_readwrite("repetitions", &SynthConfig::repetitions)
      .def_readwrite("prop_speed_km_per_ms", &SynthConfig::prop_speed_km_per_ms)
      .def_readwrite("per_hop_noise_ms", &SynthConfig::per_hop_noise_ms)
      .def_readwrite("rule_violation_fraction", &SynthConfig::rule_violation_fraction)
      .def_readwrite("anonymity_prob", &SynthConfig::anonymity_prob)
      .def_readwrite("extra_edges", &SynthConfig::extra_edges)
      .def_readwrite("seed", &SynthConfig::seed);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("probe_ip", &GroundTruth::probe_ip)
      .def_property_readonly("locations", [](const GroundTruth& t) {
        py::dict d;
        for (const auto& [ip, pos] : t.locations) d[py::str(ip)] = pos;
        return d;
      });

  py::class_<SynthOutput>(m, "SynthOutput")
      .def_readonly("traceroutes", &SynthOutput::traceroutes)
      .def_readonly("landmarks", &SynthOutput::landmarks)
      .def_readonly("truth", &SynthOutput::truth);

  m.def("synth_network", &synth_network, py::arg("config"));

  m.def("parse_traceroutes", [](const std::string& text) {
    std::istringstream in(text);
    return parse_traceroutes(in);
  });
  m.def("serialize_traceroutes", [](const std::vector<TracerouteRecord>& records) {
    std::ostringstream out;
    serialize_traceroutes(records, out);
    return out.str();
  });
  m.def("parse_landmarks", [](const std::string& text) {
    std::istringstream in(text);
    return parse_landmarks(in);
  });
  m.def("serialize_landmarks", [](const std::vector<LandmarkRecord>& landmarks) {
    std::ostringstream out;
    serialize_landmarks(landmarks, out);
    return out.str();
  });

  py::class_<RoutingPath>(m, "RoutingPath")
      .def(py::init<>())
      .def_readwrite("dst_ip", &RoutingPath::dst_ip)
      .def_readwrite("entries", &RoutingPath::entries);

  m.def("extract_paths", [](const std::vector<TracerouteRecord>& records) {
    return extract_paths(records);
  });
  m.def("complete_paths", &complete_paths);

  py::enum_<NodeRole>(m, "NodeRole")
      .value("ProbingHost", NodeRole::ProbingHost)
      .value("Landmark", NodeRole::Landmark)
      .value("Target", NodeRole::Target)
      .value("Router", NodeRole::Router);

  py::class_<GraphNode>(m, "GraphNode")
      .def_readonly("id", &GraphNode::id)
      .def_readonly("ip", &GraphNode::ip)
      .def_readonly("role", &GraphNode::role)
      .def_readonly("delay_ms", &GraphNode::delay_ms);

  py::class_<GraphEdge>(m, "GraphEdge")
      .def_readonly("head", &GraphEdge::head)
      .def_readonly("tail", &GraphEdge::tail)
      .def_readonly("delay_ms", &GraphEdge::delay_ms);

  py::class_<BinModel>(m, "BinModel")
      .def_readonly("centers", &BinModel::centers)
      .def("assign", &BinModel::assign);

  m.def("kmeans_bin", &kmeans_bin, py::arg("values"), py::arg("k") = 10, py::arg("seed") = 0);

  py::class_<AttributedGraph>(m, "AttributedGraph")
      .def_property_readonly("n_nodes", &AttributedGraph::n_nodes)
      .def_property_readonly("n_edges", &AttributedGraph::n_edges)
      .def_readonly("nodes", &AttributedGraph::nodes)
      .def_readonly("edges", &AttributedGraph::edges)
      .def_readonly("orientation_conflicts", &AttributedGraph::orientation_conflicts)
      .def_readonly("probe_node", &AttributedGraph::probe_node)
      .def("node_of", &AttributedGraph::node_of)
      .def_property_readonly("node_features",
                             [](const AttributedGraph& g) { return tensor_rows(g.node_features); })
      .def_property_readonly("edge_features",
                             [](const AttributedGraph& g) { return tensor_rows(g.edge_features); });

  m.def("build_graph",
        [](const std::vector<RoutingPath>& completed,
           const std::vector<LandmarkRecord>& landmarks,
           const std::vector<std::string>& targets,
           const std::vector<TracerouteRecord>& records, const std::string& probe_ip,
           std::uint64_t bin_seed) {
          return build_graph(completed, landmarks,
                             std::set<std::string>(targets.begin(), targets.end()), records,
                             probe_ip, bin_seed);
        },
        py::arg("completed"), py::arg("landmarks"), py::arg("targets"), py::arg("records"),
        py::arg("probe_ip"), py::arg("bin_seed") = 0);

  m.def("haversine_km", &haversine_km, py::arg("a"), py::arg("b"));

  py::class_<ErrorStats>(m, "ErrorStats")
      .def_readonly("average_km", &ErrorStats::average_km)
      .def_readonly("median_km", &ErrorStats::median_km)
      .def_readonly("max_km", &ErrorStats::max_km)
      .def_readonly("n", &ErrorStats::n);

  m.def("error_stats",
        [](const std::vector<Coord>& pred, const std::vector<Coord>& truth) {
          return error_stats(std::span<const Coord>(pred), std::span<const Coord>(truth));
        });
  m.def("error_stats_km",
        [](std::vector<double> errors) { return error_stats(std::move(errors)); });
  m.def("cdf", [](std::vector<double> errors) {
    std::vector<std::pair<double, double>> out;
    for (const CdfPoint& p : cdf(std::move(errors))) out.push_back({p.error_km, p.fraction});
    return out;
  });

  py::class_<GeoScaler>(m, "GeoScaler")
      .def("transform", &GeoScaler::transform)
      .def("inverse", &GeoScaler::inverse)
      .def("inside", &GeoScaler::inside)
      .def_property_readonly("lat_min", &GeoScaler::lat_min)
      .def_property_readonly("lat_max", &GeoScaler::lat_max)
      .def_property_readonly("lon_min", &GeoScaler::lon_min)
      .def_property_readonly("lon_max", &GeoScaler::lon_max);

  m.def("fit_scaler",
        [](const std::vector<Coord>& coords, double margin) {
          return GeoScaler::fit(coords, margin);
        },
        py::arg("coords"), py::arg("margin") = 0.1);

  py::enum_<Aggregator>(m, "Aggregator")
      .value("Mean", Aggregator::Mean)
      .value("Sum", Aggregator::Sum)
      .value("Max", Aggregator::Max);

  py::enum_<DecoderKind>(m, "DecoderKind")
      .value("Vanilla", DecoderKind::Vanilla)
      .value("VanillaBn", DecoderKind::VanillaBn)
      .value("Sigmoid", DecoderKind::Sigmoid)
      .value("BnSigmoid", DecoderKind::BnSigmoid);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("embed_dim", &ModelConfig::embed_dim)
      .def_readwrite("edge_dim", &ModelConfig::edge_dim)
      .def_readwrite("num_layers", &ModelConfig::num_layers)
      .def_readwrite("aggregator", &ModelConfig::aggregator)
      .def_readwrite("edge_hidden", &ModelConfig::edge_hidden)
      .def_readwrite("decoder", &ModelConfig::decoder)
      .def_readwrite("seed", &ModelConfig::seed);

  m.def("param_count", &param_count, py::arg("config"), py::arg("n_nodes"));

  py::class_<SplitSpec>(m, "SplitSpec")
      .def(py::init<>())
      .def_readwrite("train_frac", &SplitSpec::train_frac)
      .def_readwrite("val_frac", &SplitSpec::val_frac)
      .def_readwrite("test_frac", &SplitSpec::test_frac)
      .def_readwrite("seed", &SplitSpec::seed);

  py::class_<Split>(m, "Split")
      .def_readonly("train", &Split::train)
      .def_readonly("val", &Split::val)
      .def_readonly("test", &Split::test);

  m.def("split_landmarks", [](const std::vector<LandmarkRecord>& landmarks,
                              const SplitSpec& spec) { return split_landmarks(landmarks, spec); });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("model", &TrainConfig::model)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("l2", &TrainConfig::l2)
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("rule_based_scaling", &TrainConfig::rule_based_scaling)
      .def_readwrite("regularize_all", &TrainConfig::regularize_all);

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("train_loss", &EpochStats::train_loss)
      .def_readonly("val_km", &EpochStats::val_km);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("history", &TrainReport::history)
      .def_readonly("best_epoch", &TrainReport::best_epoch)
      .def_readonly("best_val_km", &TrainReport::best_val_km)
      .def_readonly("stop_reason", &TrainReport::stop_reason)
      .def_property_readonly("scaler", [](const TrainReport& r) {
        return r.scaler ? py::cast(*r.scaler) : py::object(py::none());
      });

  m.def("labels_for",
        [](const AttributedGraph& graph, const std::vector<LandmarkRecord>& landmarks,
           const std::vector<std::string>& ips) { return labels_for(graph, landmarks, ips); });

  m.def("train_model",
        [](const AttributedGraph& graph, const Labels& train_labels, const Labels& val_labels,
           const TrainConfig& cfg) { return train_model(graph, train_labels, val_labels, cfg); },
        py::arg("graph"), py::arg("train_labels"), py::arg("val_labels"), py::arg("config"));

  m.def("predict",
        [](const AttributedGraph& graph, const TrainReport& report, const ModelConfig& cfg,
           const std::vector<std::string>& ips) {
          ModelParams params = report.best_params; // forward flips BN mode flags
          Tensor out = forward(graph, params, cfg, RunMode::Eval);
          std::vector<Coord> coords;
          for (const std::string& ip : ips) {
            std::int32_t node = graph.node_of(ip);
            if (node < 0) throw ValidationError("predict: " + ip + " is not in the graph");
            Coord c{out.at(static_cast<std::size_t>(node), 0),
                    out.at(static_cast<std::size_t>(node), 1)};
            if (report.scaler) c = report.scaler->inverse(c);
            coords.push_back(c);
          }
          return coords;
        },
        py::arg("graph"), py::arg("report"), py::arg("config"), py::arg("ips"));

  py::class_<PathIndex>(m, "PathIndex")
      .def_static("from_graph", &PathIndex::from_graph)
      .def("dest_delay_ms", &PathIndex::dest_delay_ms)
      .def("relative_delay_ms", &PathIndex::relative_delay_ms)
      .def("closest_common_router", [](const PathIndex& idx, const std::string& target,
                                       const std::string& landmark) {
        auto c = idx.closest_common_router(target, landmark);
        return py::make_tuple(c.ip, c.target_path_delay_ms);
      });

  m.def("slg_geolocate",
        [](const std::string& target, const std::vector<LandmarkRecord>& landmarks,
           const PathIndex& index) { return slg_geolocate(target, landmarks, index); });

  m.def("corr_slg_geolocate",
        [](const std::vector<std::string>& targets, const std::vector<LandmarkRecord>& landmarks,
           const PathIndex& index, double ca, double cb) {
          return corr_slg_geolocate(targets, landmarks, index, ca, cb);
        },
        py::arg("targets"), py::arg("landmarks"), py::arg("index"), py::arg("ca"), py::arg("cb"));

  py::class_<MlpGeoConfig>(m, "MlpGeoConfig")
      .def(py::init<>())
      .def_readwrite("hidden", &MlpGeoConfig::hidden)
      .def_readwrite("lr", &MlpGeoConfig::lr)
      .def_readwrite("l2", &MlpGeoConfig::l2)
      .def_readwrite("max_epochs", &MlpGeoConfig::max_epochs)
      .def_readwrite("patience", &MlpGeoConfig::patience)
      .def_readwrite("beta", &MlpGeoConfig::beta)
      .def_readwrite("seed", &MlpGeoConfig::seed);

  py::class_<MlpGeoModel>(m, "MlpGeoModel");

  py::class_<MlpGeoReport>(m, "MlpGeoReport")
      .def_readonly("model", &MlpGeoReport::model)
      .def_readonly("best_epoch", &MlpGeoReport::best_epoch)
      .def_readonly("best_val_km", &MlpGeoReport::best_val_km)
      .def_readonly("stop_reason", &MlpGeoReport::stop_reason);

  m.def("mlp_geo_train",
        [](const PathIndex& index, const std::vector<LandmarkRecord>& train,
           const std::vector<LandmarkRecord>& val, const MlpGeoConfig& cfg) {
          return mlp_geo_train(index, train, val, cfg);
        });
  m.def("mlp_geo_predict",
        [](const MlpGeoModel& model, const PathIndex& index,
           const std::vector<std::string>& targets) {
          return mlp_geo_predict(model, index, targets);
        });

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
}
