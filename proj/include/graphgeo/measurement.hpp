#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphgeo/geo.hpp"

namespace graphgeo {

// One traceroute hop. Anonymous routers expose neither IP nor delay, so the
// two optionals are always present or absent together.
struct Hop {
  int ttl = 0;
  std::optional<std::string> ip;
  std::optional<double> rtt_ms;

  bool anonymous() const { return !ip.has_value(); }
};

struct TracerouteRecord {
  std::string dst_ip;
  int probe_seq = 0;
  std::vector<Hop> hops;
};

struct LandmarkRecord {
  std::string ip;
  double lat = 0.0;
  double lon = 0.0;
};

struct RegionBox {
  double lat_min = 0.0, lat_max = 0.0;
  double lon_min = 0.0, lon_max = 0.0;

  bool degenerate() const { return !(lat_max > lat_min) || !(lon_max > lon_min); }
  Coord center() const { return {0.5 * (lat_min + lat_max), 0.5 * (lon_min + lon_max)}; }
};

// JSON Lines: one record per line, keys dst_ip / probe_seq / hops.
std::vector<TracerouteRecord> parse_traceroutes(std::istream& in);
void serialize_traceroutes(std::span<const TracerouteRecord> records, std::ostream& out);

// CSV with header "ip,lat,lon". When a region box is given, every row must
// fall inside it.
std::vector<LandmarkRecord> parse_landmarks(
    std::istream& in, const std::optional<RegionBox>& expect_within = std::nullopt);
void serialize_landmarks(std::span<const LandmarkRecord> landmarks, std::ostream& out);

struct SynthConfig {
  int n_landmarks = 50;
  int n_routers = 10;
  RegionBox region{22.25, 22.79, 113.80, 114.40};
  int repetitions = 30;
  double prop_speed_km_per_ms = 50.0;
  double per_hop_noise_ms = 0.05;
  double rule_violation_fraction = 0.0;
  double anonymity_prob = 0.0;
  // Landmarks given a second attachment router, emulating denser meshes.
  int extra_edges = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// ip -> location for every generated node, probing host and routers included.
struct GroundTruth {
  std::map<std::string, Coord> locations;
  std::string probe_ip;
};

struct SynthOutput {
  std::vector<TracerouteRecord> traceroutes;
  std::vector<LandmarkRecord> landmarks;
  GroundTruth truth;
};

// Deterministic in the config: same seed, byte-identical serialized output.
SynthOutput synth_network(const SynthConfig& cfg);

// Ground-truth CSV shares the landmark schema.
void serialize_truth(const GroundTruth& truth, std::ostream& out);
GroundTruth parse_truth(std::istream& in);

} // namespace graphgeo
