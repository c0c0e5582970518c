#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphgeo/adjacency.hpp"
#include "graphgeo/measurement.hpp"
#include "graphgeo/tensor.hpp"

namespace graphgeo {

// A probed route, first hop to destination; nullopt marks an anonymous router.
struct RoutingPath {
  std::string dst_ip;
  std::vector<std::optional<std::string>> entries;

  bool operator==(const RoutingPath& other) const = default;
};

enum class NodeRole { ProbingHost, Landmark, Target, Router };

std::string to_string(NodeRole role);
NodeRole node_role_from_string(const std::string& s);

struct GraphNode {
  std::int32_t id = 0;
  std::string ip;
  NodeRole role = NodeRole::Router;
  double delay_ms = 0.0; // minimum observed rtt from the probing host
};

struct GraphEdge {
  std::int32_t head = 0; // endpoint nearer the probing host at creation
  std::int32_t tail = 0;
  double delay_ms = 0.0; // tail delay minus head delay, may be negative
};

// 1-d k-means bins: nearest center wins, ties to the lower index.
struct BinModel {
  std::vector<double> centers; // sorted ascending

  std::size_t assign(double value) const;
};

BinModel kmeans_bin(std::vector<double> values, int k, std::uint64_t seed);

struct AttributedGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  AdjacencyList adjacency; // per node, sorted by neighbor id
  Tensor node_features;    // N_V x 15
  Tensor edge_features;    // N_E x 11
  BinModel node_bins;
  BinModel edge_bins;
  std::int32_t probe_node = 0;
  // Unordered pairs first seen with the opposite head/tail orientation.
  int orientation_conflicts = 0;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_edges() const { return edges.size(); }
  std::int32_t node_of(const std::string& ip) const; // -1 when absent
  const std::unordered_map<std::string, std::int32_t>& index() const { return ip_to_node_; }
  void rebuild_index();

private:
  std::unordered_map<std::string, std::int32_t> ip_to_node_;
};

// One path per (dst, probe_seq), duplicates removed, file order kept.
std::vector<RoutingPath> extract_paths(std::span<const TracerouteRecord> records);

// Anonymous-router completion. Raw paths are scanned in order against the
// growing completed set; a path merges into the first completed path with
// the same hop count that agrees on every position where both sides have an
// IP, filling anonymous slots both ways. Unmatched paths are appended.
std::vector<RoutingPath> complete_paths(const std::vector<RoutingPath>& raw);

AttributedGraph build_graph(const std::vector<RoutingPath>& completed,
                            std::span<const LandmarkRecord> landmarks,
                            const std::set<std::string>& targets,
                            std::span<const TracerouteRecord> records,
                            const std::string& probe_ip,
                            std::uint64_t bin_seed = 0);

// Node rows: [delay, octet1..octet4, 10-way delay-bin one-hot].
// Edge rows: [delay, 10-way delay-bin one-hot]; bins trained separately.
Tensor node_feature_matrix(const AttributedGraph& graph, const BinModel& bins);
Tensor edge_feature_matrix(const AttributedGraph& graph, const BinModel& bins);

void write_nodes_csv(const AttributedGraph& graph, std::ostream& out);
void write_edges_csv(const AttributedGraph& graph, std::ostream& out);

// Self-contained bundle consumed by training and the baselines.
struct GraphBundle {
  AttributedGraph graph;
  std::vector<RoutingPath> paths;
  std::string probe_ip;
};

void save_bundle(const GraphBundle& bundle, std::ostream& out);
GraphBundle load_bundle(std::istream& in);

} // namespace graphgeo
