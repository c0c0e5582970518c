#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "graphgeo/geo.hpp"
#include "graphgeo/graph.hpp"
#include "graphgeo/tensor.hpp"

namespace graphgeo {

struct PathHop {
  std::string ip;
  double cum_delay_ms = 0.0; // node delay of this hop from the probing host
};

// Completed route and per-hop cumulative delays for every destination, plus
// a reverse index from router ip to the destinations that traverse it.
class PathIndex {
public:
  static PathIndex build(const std::vector<RoutingPath>& completed,
                         const std::unordered_map<std::string, double>& node_delay_ms);
  static PathIndex from_graph(const AttributedGraph& graph,
                              const std::vector<RoutingPath>& completed);

  const std::vector<PathHop>* path_of(const std::string& dst) const;
  // Delay from the probing host to the destination (its final-hop delay).
  double dest_delay_ms(const std::string& dst) const;
  const std::vector<std::string>& destinations_through(const std::string& router_ip) const;
  // Every ip on any indexed path, numerically sorted.
  std::vector<std::string> all_path_ips() const;

  struct CommonRouter {
    std::string ip;              // empty: fellback to the probing host
    double target_path_delay_ms = 0.0;
  };
  // Last hop shared by both routes: maximal cumulative delay on the target's
  // path, later position on ties. Disjoint routes fall back to the probing
  // host with delay 0.
  CommonRouter closest_common_router(const std::string& target,
                                     const std::string& landmark) const;

  // (d_pt - d_pr) + (d_pl - d_pr)
  double relative_delay_ms(const std::string& target, const std::string& landmark) const;

private:
  std::unordered_map<std::string, std::vector<PathHop>> paths_;
  std::unordered_map<std::string, std::vector<std::string>> reverse_;
  std::vector<std::string> empty_;
};

// Nearest landmark by relative delay; ties to the lexicographically lower ip.
Coord slg_geolocate(const std::string& target, std::span<const LandmarkRecord> landmarks,
                    const PathIndex& index);

struct CorrGroups {
  std::unordered_map<std::string, double> correlation;
  double ca = 0.0;
  double cb = 0.0;
  std::vector<std::string> group_a; // correlation > ca
  std::vector<std::string> group_b; // correlation < cb
  std::vector<std::string> group_c; // the rest

  char group_of(const std::string& landmark_ip) const;
};

// Per landmark, Pearson correlation between its relative delays to the other
// landmarks and its great-circle distances to them.
CorrGroups corr_groups(std::span<const LandmarkRecord> landmarks, const PathIndex& index,
                       double ca, double cb);

// A target follows the rule of its minimum-relative-delay landmark's group:
// A -> SLG inside group A, B -> maximal relative delay inside group B,
// C -> centroid of group C. Empty selected group falls back to plain SLG.
std::vector<Coord> corr_slg_geolocate(std::span<const std::string> targets,
                                      std::span<const LandmarkRecord> landmarks,
                                      const PathIndex& index, double ca, double cb);

struct MlpGeoConfig {
  int hidden = 64;
  double lr = 0.001;
  double l2 = 0.0;
  int max_epochs = 20000;
  int patience = 20000;
  double beta = 30.0; // presence value for routers on the path
  std::uint64_t seed = 0;
};

struct MlpGeoModel {
  std::vector<std::string> slot_ips; // sorted; one presence slot per observed ip
  Tensor w1, b1, w2, b2, w3, b3;
  GeoScaler scaler;
  double beta = 30.0;
};

struct MlpGeoReport {
  MlpGeoModel model;
  std::vector<double> val_history_km;
  int best_epoch = 0;
  double best_val_km = 0.0;
  std::string stop_reason;
};

// Input row: [probe->node delay] then beta at the slot of every ip on the
// node's completed path, 0 elsewhere.
std::vector<double> mlp_geo_input(const PathIndex& index, const std::string& ip,
                                  std::span<const std::string> slot_ips, double beta);

MlpGeoReport mlp_geo_train(const PathIndex& index,
                           std::span<const LandmarkRecord> train_landmarks,
                           std::span<const LandmarkRecord> val_landmarks,
                           const MlpGeoConfig& cfg);

std::vector<Coord> mlp_geo_predict(const MlpGeoModel& model, const PathIndex& index,
                                   std::span<const std::string> targets);

} // namespace graphgeo
