#include "graphgeo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include <json.hpp>

#include "graphgeo/errors.hpp"
#include "graphgeo/rng.hpp"
#include "graphgeo/util.hpp"

namespace graphgeo {

using ordered_json = nlohmann::ordered_json;

std::string to_string(NodeRole role) {
  switch (role) {
    case NodeRole::ProbingHost: return "probing_host";
    case NodeRole::Landmark: return "landmark";
    case NodeRole::Target: return "target";
    case NodeRole::Router: return "router";
  }
  throw ConfigError("invalid node role");
}

NodeRole node_role_from_string(const std::string& s) {
  if (s == "probing_host") return NodeRole::ProbingHost;
  if (s == "landmark") return NodeRole::Landmark;
  if (s == "target") return NodeRole::Target;
  if (s == "router") return NodeRole::Router;
  throw ConfigError("unknown node role: " + s);
}

std::int32_t AttributedGraph::node_of(const std::string& ip) const {
  auto it = ip_to_node_.find(ip);
  return it == ip_to_node_.end() ? -1 : it->second;
}

void AttributedGraph::rebuild_index() {
  ip_to_node_.clear();
  for (const GraphNode& n : nodes) ip_to_node_[n.ip] = n.id;
}

std::vector<RoutingPath> extract_paths(std::span<const TracerouteRecord> records) {
  std::vector<RoutingPath> paths;
  std::set<std::pair<std::string, std::vector<std::optional<std::string>>>> seen;
  for (const TracerouteRecord& rec : records) {
    RoutingPath p;
    p.dst_ip = rec.dst_ip;
    p.entries.reserve(rec.hops.size());
    for (const Hop& h : rec.hops) p.entries.push_back(h.ip);
    if (p.entries.empty()) continue;
    if (seen.emplace(p.dst_ip, p.entries).second) paths.push_back(std::move(p));
  }
  return paths;
}

namespace {

bool paths_compatible(const RoutingPath& a, const RoutingPath& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (a.entries[i] && b.entries[i] && *a.entries[i] != *b.entries[i]) return false;
  }
  return true;
}

} // namespace

std::vector<RoutingPath> complete_paths(const std::vector<RoutingPath>& raw) {
  std::vector<RoutingPath> completed;
  for (const RoutingPath& p : raw) {
    bool matched = false;
    for (RoutingPath& c : completed) {
      if (!paths_compatible(c, p)) continue;
      // merge: fill the completed path's anonymous slots from this path
      for (std::size_t i = 0; i < c.entries.size(); ++i)
        if (!c.entries[i] && p.entries[i]) c.entries[i] = p.entries[i];
      matched = true;
      break; // first match wins
    }
    if (!matched) completed.push_back(p);
  }
  return completed;
}

std::size_t BinModel::assign(double value) const {
  if (centers.empty()) throw ValidationError("BinModel: untrained");
  std::size_t best = 0;
  double best_d = std::abs(value - centers[0]);
  for (std::size_t i = 1; i < centers.size(); ++i) {
    double d = std::abs(value - centers[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

BinModel kmeans_bin(std::vector<double> values, int k, std::uint64_t seed) {
  if (values.empty()) throw ValidationError("kmeans_bin: empty input");
  if (k <= 0) throw ConfigError("kmeans_bin: k must be positive");
  Rng rng(seed);
  std::size_t n = values.size();
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(k));

  // k-means++ style seeding: next center drawn proportional to the squared
  // distance to the closest chosen one.
  centers.push_back(values[rng.below(n)]);
  std::vector<double> d2(n);
  while (centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(values[rng.below(n)]); // fewer distinct values than k
      continue;
    }
    double r = rng.uniform() * total;
    std::size_t pick = n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (r < acc) {
        pick = i;
        break;
      }
    }
    centers.push_back(values[pick]);
  }

  // Lloyd iterations; empty clusters keep their center.
  std::vector<double> sums(centers.size());
  std::vector<std::size_t> counts(centers.size());
  for (int iter = 0; iter < 300; ++iter) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0u);
    for (double v : values) {
      std::size_t best = 0;
      double best_d = std::abs(v - centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        double d = std::abs(v - centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      sums[best] += v;
      counts[best] += 1;
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;
      double next = sums[c] / static_cast<double>(counts[c]);
      movement = std::max(movement, std::abs(next - centers[c]));
      centers[c] = next;
    }
    if (movement < 1e-9) break;
  }

  std::sort(centers.begin(), centers.end());
  BinModel model;
  model.centers = std::move(centers);
  return model;
}

AttributedGraph build_graph(const std::vector<RoutingPath>& completed,
                            std::span<const LandmarkRecord> landmarks,
                            const std::set<std::string>& targets,
                            std::span<const TracerouteRecord> records,
                            const std::string& probe_ip,
                            std::uint64_t bin_seed) {
  if (!is_ipv4(probe_ip)) throw ValidationError("build_graph: invalid probing host ip");

  // Minimum observed rtt per ip across every record.
  std::unordered_map<std::string, double> min_rtt;
  for (const TracerouteRecord& rec : records) {
    for (const Hop& h : rec.hops) {
      if (!h.ip) continue;
      if (h.ip == probe_ip)
        throw ValidationError("build_graph: probing host ip observed as a hop");
      auto [it, fresh] = min_rtt.emplace(*h.ip, *h.rtt_ms);
      if (!fresh && *h.rtt_ms < it->second) it->second = *h.rtt_ms;
    }
  }

  std::set<std::string> destinations;
  for (const RoutingPath& p : completed) destinations.insert(p.dst_ip);
  for (const LandmarkRecord& lm : landmarks) {
    if (!destinations.count(lm.ip))
      throw ValidationError("build_graph: landmark " + lm.ip +
                            " never observed as a traceroute destination");
  }
  for (const std::string& t : targets) {
    if (!destinations.count(t))
      throw ValidationError("build_graph: target " + t +
                            " never observed as a traceroute destination");
  }

  AttributedGraph g;
  std::unordered_map<std::string, std::int32_t> id_of;
  auto intern = [&](const std::string& ip) -> std::int32_t {
    auto it = id_of.find(ip);
    if (it != id_of.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(g.nodes.size());
    GraphNode node;
    node.id = id;
    node.ip = ip;
    if (ip == probe_ip) {
      node.delay_ms = 0.0;
    } else {
      auto rt = min_rtt.find(ip);
      if (rt == min_rtt.end())
        throw ValidationError("build_graph: no delay ever observed for " + ip);
      node.delay_ms = rt->second;
    }
    g.nodes.push_back(std::move(node));
    id_of.emplace(ip, id);
    return id;
  };

  g.probe_node = intern(probe_ip);

  // Edges come from adjacent non-anonymous pairs along each path; the
  // probing host is a node but routes start at hop 1, so it has no edges.
  std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> edge_of;
  for (const RoutingPath& p : completed) {
    std::int32_t prev = -1;
    for (const auto& entry : p.entries) {
      if (!entry) continue; // residual anonymous routers are skipped
      std::int32_t cur = intern(*entry);
      if (prev >= 0 && cur != prev) {
        auto key = std::minmax(prev, cur);
        auto it = edge_of.find({key.first, key.second});
        if (it == edge_of.end()) {
          GraphEdge e;
          e.head = prev;
          e.tail = cur;
          e.delay_ms = g.nodes[static_cast<std::size_t>(cur)].delay_ms -
                       g.nodes[static_cast<std::size_t>(prev)].delay_ms;
          edge_of.emplace(std::make_pair(key.first, key.second), g.edges.size());
          g.edges.push_back(e);
        } else if (g.edges[it->second].head != prev) {
          g.orientation_conflicts += 1; // first-seen orientation and delay win
        }
      }
      prev = cur;
    }
  }

  // roles: probing host first, then landmarks, then targets, rest routers
  for (const LandmarkRecord& lm : landmarks) {
    auto it = id_of.find(lm.ip);
    if (it == id_of.end())
      throw ValidationError("build_graph: landmark " + lm.ip + " missing from the graph");
    if (it->second != g.probe_node)
      g.nodes[static_cast<std::size_t>(it->second)].role = NodeRole::Landmark;
  }
  for (const std::string& t : targets) {
    auto it = id_of.find(t);
    if (it == id_of.end())
      throw ValidationError("build_graph: target " + t + " missing from the graph");
    GraphNode& node = g.nodes[static_cast<std::size_t>(it->second)];
    if (node.role == NodeRole::Router) node.role = NodeRole::Target;
  }
  g.nodes[static_cast<std::size_t>(g.probe_node)].role = NodeRole::ProbingHost;

  g.adjacency.assign(g.nodes.size(), {});
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const GraphEdge& edge = g.edges[e];
    g.adjacency[static_cast<std::size_t>(edge.head)].push_back(
        {edge.tail, static_cast<std::int32_t>(e)});
    g.adjacency[static_cast<std::size_t>(edge.tail)].push_back(
        {edge.head, static_cast<std::int32_t>(e)});
  }
  for (auto& nbrs : g.adjacency)
    std::sort(nbrs.begin(), nbrs.end(),
              [](const NeighborRef& a, const NeighborRef& b) { return a.node < b.node; });

  std::vector<double> node_delays;
  node_delays.reserve(g.nodes.size());
  for (const GraphNode& n : g.nodes) node_delays.push_back(n.delay_ms);
  g.node_bins = kmeans_bin(node_delays, 10, bin_seed);

  if (!g.edges.empty()) {
    std::vector<double> edge_delays;
    edge_delays.reserve(g.edges.size());
    for (const GraphEdge& e : g.edges) edge_delays.push_back(e.delay_ms);
    g.edge_bins = kmeans_bin(edge_delays, 10, Rng::derive(bin_seed, 1));
  }

  g.node_features = node_feature_matrix(g, g.node_bins);
  g.edge_features = edge_feature_matrix(g, g.edge_bins);
  g.rebuild_index();
  return g;
}

Tensor node_feature_matrix(const AttributedGraph& graph, const BinModel& bins) {
  Tensor f = Tensor::zeros({graph.n_nodes(), 15});
  for (const GraphNode& n : graph.nodes) {
    std::size_t i = static_cast<std::size_t>(n.id);
    auto octets = parse_ipv4(n.ip);
    if (!octets) throw ValidationError("node_feature_matrix: bad ip " + n.ip);
    f.at(i, 0) = n.delay_ms;
    for (std::size_t o = 0; o < 4; ++o) f.at(i, 1 + o) = (*octets)[o];
    f.at(i, 5 + bins.assign(n.delay_ms)) = 1.0;
  }
  return f;
}

Tensor edge_feature_matrix(const AttributedGraph& graph, const BinModel& bins) {
  if (graph.edges.empty()) return Tensor::zeros({1, 11}); // placeholder, unused
  Tensor f = Tensor::zeros({graph.n_edges(), 11});
  for (std::size_t e = 0; e < graph.n_edges(); ++e) {
    double d = graph.edges[e].delay_ms;
    f.at(e, 0) = d;
    f.at(e, 1 + bins.assign(d)) = 1.0;
  }
  return f;
}

void write_nodes_csv(const AttributedGraph& graph, std::ostream& out) {
  out << "node_id,ip,role,delay_ms\n";
  for (const GraphNode& n : graph.nodes)
    out << n.id << ',' << n.ip << ',' << to_string(n.role) << ','
        << format_double(n.delay_ms) << '\n';
}

void write_edges_csv(const AttributedGraph& graph, std::ostream& out) {
  out << "head_id,tail_id,delay_ms\n";
  for (const GraphEdge& e : graph.edges)
    out << e.head << ',' << e.tail << ',' << format_double(e.delay_ms) << '\n';
}

namespace {

ordered_json tensor_to_json(const Tensor& t) {
  ordered_json j;
  j["shape"] = t.shape();
  j["data"] = std::vector<double>(t.data().begin(), t.data().end());
  return j;
}

Tensor tensor_from_json(const ordered_json& j) {
  return Tensor::from(j.at("shape").get<std::vector<std::size_t>>(),
                      j.at("data").get<std::vector<double>>());
}

} // namespace

void save_bundle(const GraphBundle& bundle, std::ostream& out) {
  const AttributedGraph& g = bundle.graph;
  ordered_json j;
  j["version"] = 1;
  j["probe_ip"] = bundle.probe_ip;
  j["orientation_conflicts"] = g.orientation_conflicts;
  ordered_json nodes = ordered_json::array();
  for (const GraphNode& n : g.nodes)
    nodes.push_back({{"id", n.id}, {"ip", n.ip}, {"role", to_string(n.role)},
                     {"delay_ms", n.delay_ms}});
  j["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const GraphEdge& e : g.edges)
    edges.push_back({e.head, e.tail, e.delay_ms});
  j["edges"] = std::move(edges);
  j["node_bins"] = g.node_bins.centers;
  j["edge_bins"] = g.edge_bins.centers;
  j["node_features"] = tensor_to_json(g.node_features);
  j["edge_features"] = tensor_to_json(g.edge_features);
  ordered_json paths = ordered_json::array();
  for (const RoutingPath& p : bundle.paths) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : p.entries) {
      if (e) entries.push_back(*e); else entries.push_back(nullptr);
    }
    paths.push_back({{"dst", p.dst_ip}, {"entries", std::move(entries)}});
  }
  j["paths"] = std::move(paths);
  out << j.dump() << '\n';
}

GraphBundle load_bundle(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph bundle: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1)
      throw ParseError("graph bundle: unsupported version");
    GraphBundle bundle;
    bundle.probe_ip = j.at("probe_ip").get<std::string>();
    AttributedGraph& g = bundle.graph;
    g.orientation_conflicts = j.at("orientation_conflicts").get<int>();
    for (const auto& nj : j.at("nodes")) {
      GraphNode n;
      n.id = nj.at("id").get<std::int32_t>();
      n.ip = nj.at("ip").get<std::string>();
      n.role = node_role_from_string(nj.at("role").get<std::string>());
      n.delay_ms = nj.at("delay_ms").get<double>();
      g.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j.at("edges")) {
      GraphEdge e;
      e.head = ej.at(0).get<std::int32_t>();
      e.tail = ej.at(1).get<std::int32_t>();
      e.delay_ms = ej.at(2).get<double>();
      g.edges.push_back(e);
    }
    g.node_bins.centers = j.at("node_bins").get<std::vector<double>>();
    g.edge_bins.centers = j.at("edge_bins").get<std::vector<double>>();
    g.node_features = tensor_from_json(j.at("node_features"));
    g.edge_features = tensor_from_json(j.at("edge_features"));
    for (const auto& pj : j.at("paths")) {
      RoutingPath p;
      p.dst_ip = pj.at("dst").get<std::string>();
      for (const auto& e : pj.at("entries")) {
        if (e.is_null()) p.entries.push_back(std::nullopt);
        else p.entries.push_back(e.get<std::string>());
      }
      bundle.paths.push_back(std::move(p));
    }
    g.adjacency.assign(g.nodes.size(), {});
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      g.adjacency[static_cast<std::size_t>(g.edges[e].head)].push_back(
          {g.edges[e].tail, static_cast<std::int32_t>(e)});
      g.adjacency[static_cast<std::size_t>(g.edges[e].tail)].push_back(
          {g.edges[e].head, static_cast<std::int32_t>(e)});
    }
    for (auto& nbrs : g.adjacency)
      std::sort(nbrs.begin(), nbrs.end(),
                [](const NeighborRef& a, const NeighborRef& b) { return a.node < b.node; });
    g.rebuild_index();
    for (const GraphNode& n : g.nodes)
      if (n.role == NodeRole::ProbingHost) g.probe_node = n.id;
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph bundle: ") + e.what());
  }
}

} // namespace graphgeo
