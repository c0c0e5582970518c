#include "graphgeo/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "graphgeo/errors.hpp"
#include "graphgeo/rng.hpp"
#include "graphgeo/util.hpp"

namespace graphgeo {

namespace {

using ordered_json = nlohmann::ordered_json;

void validate_record(const TracerouteRecord& rec, std::size_t line_no) {
  std::string where = "line " + std::to_string(line_no) + ": ";
  if (!is_ipv4(rec.dst_ip))
    throw ValidationError(where + "dst_ip is not a dotted-quad IPv4 address");
  if (rec.probe_seq < 0)
    throw ValidationError(where + "probe_seq must be non-negative");
  int expected_ttl = 1;
  for (const Hop& h : rec.hops) {
    if (h.ttl != expected_ttl) {
      if (h.ttl > expected_ttl)
        throw ValidationError(where + "ttl gap: expected " + std::to_string(expected_ttl) +
                              ", got " + std::to_string(h.ttl));
      throw ValidationError(where + "non-monotone ttl: expected " +
                            std::to_string(expected_ttl) + ", got " + std::to_string(h.ttl));
    }
    ++expected_ttl;
    if (h.ip.has_value() != h.rtt_ms.has_value())
      throw ValidationError(where + "ip and rtt_ms must be both present or both absent");
    if (h.ip && !is_ipv4(*h.ip))
      throw ValidationError(where + "hop ip is not a dotted-quad IPv4 address");
    if (h.rtt_ms && (!std::isfinite(*h.rtt_ms) || *h.rtt_ms < 0.0))
      throw ValidationError(where + "rtt_ms must be finite and non-negative");
  }
  if (!rec.hops.empty()) {
    const Hop& last = rec.hops.back();
    if (last.ip && *last.ip != rec.dst_ip)
      throw ValidationError(where + "final hop ip does not match dst_ip");
  }
}

} // namespace

std::vector<TracerouteRecord> parse_traceroutes(std::istream& in) {
  std::vector<TracerouteRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    TracerouteRecord rec;
    try {
      rec.dst_ip = j.at("dst_ip").get<std::string>();
      rec.probe_seq = j.at("probe_seq").get<int>();
      for (const auto& hj : j.at("hops")) {
        Hop h;
        h.ttl = hj.at("ttl").get<int>();
        if (!hj.at("ip").is_null()) h.ip = hj.at("ip").get<std::string>();
        if (!hj.at("rtt_ms").is_null()) h.rtt_ms = hj.at("rtt_ms").get<double>();
        rec.hops.push_back(std::move(h));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    validate_record(rec, line_no);
    records.push_back(std::move(rec));
  }
  return records;
}

void serialize_traceroutes(std::span<const TracerouteRecord> records, std::ostream& out) {
  for (const TracerouteRecord& rec : records) {
    ordered_json j;
    j["dst_ip"] = rec.dst_ip;
    j["probe_seq"] = rec.probe_seq;
    ordered_json hops = ordered_json::array();
    for (const Hop& h : rec.hops) {
      ordered_json hj;
      hj["ttl"] = h.ttl;
      if (h.ip) hj["ip"] = *h.ip; else hj["ip"] = nullptr;
      if (h.rtt_ms) hj["rtt_ms"] = *h.rtt_ms; else hj["rtt_ms"] = nullptr;
      hops.push_back(std::move(hj));
    }
    j["hops"] = std::move(hops);
    out << j.dump() << '\n';
  }
}

std::vector<LandmarkRecord> parse_landmarks(std::istream& in,
                                            const std::optional<RegionBox>& expect_within) {
  std::vector<LandmarkRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t row_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "ip,lat,lon")
        throw ParseError("row 1: expected header \"ip,lat,lon\", got \"" + line + "\"");
      header_seen = true;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ParseError("row " + std::to_string(row_no) + ": expected 3 fields, got " +
                       std::to_string(fields.size()));
    LandmarkRecord rec;
    rec.ip = fields[0];
    if (!is_ipv4(rec.ip))
      throw ValidationError("row " + std::to_string(row_no) + ": invalid ip \"" + rec.ip + "\"");
    auto lat = parse_double(fields[1]);
    auto lon = parse_double(fields[2]);
    if (!lat || !lon)
      throw ParseError("row " + std::to_string(row_no) + ": malformed coordinate");
    rec.lat = *lat;
    rec.lon = *lon;
    if (rec.lat < -90.0 || rec.lat > 90.0)
      throw ValidationError("row " + std::to_string(row_no) + ": lat " + fields[1] +
                            " outside [-90,90]");
    if (rec.lon < -180.0 || rec.lon > 180.0)
      throw ValidationError("row " + std::to_string(row_no) + ": lon " + fields[2] +
                            " outside [-180,180]");
    if (expect_within) {
      const RegionBox& box = *expect_within;
      if (rec.lat < box.lat_min || rec.lat > box.lat_max ||
          rec.lon < box.lon_min || rec.lon > box.lon_max)
        throw ValidationError("row " + std::to_string(row_no) + ": coordinate (" + fields[1] +
                              "," + fields[2] + ") outside declared region box");
    }
    if (!seen.insert(rec.ip).second)
      throw ValidationError("row " + std::to_string(row_no) + ": duplicate ip " + rec.ip);
    out.push_back(std::move(rec));
  }
  if (!header_seen) throw ParseError("empty landmark file: missing header");
  return out;
}

void serialize_landmarks(std::span<const LandmarkRecord> landmarks, std::ostream& out) {
  out << "ip,lat,lon\n";
  for (const LandmarkRecord& l : landmarks)
    out << l.ip << ',' << format_double(l.lat) << ',' << format_double(l.lon) << '\n';
}

void SynthConfig::validate() const {
  if (n_landmarks <= 0 || n_routers <= 0 || repetitions <= 0)
    throw ConfigError("synth: counts must be positive");
  if (region.degenerate()) throw ConfigError("synth: degenerate region box");
  if (!(prop_speed_km_per_ms > 0.0)) throw ConfigError("synth: prop speed must be positive");
  if (per_hop_noise_ms < 0.0) throw ConfigError("synth: negative noise");
  if (rule_violation_fraction < 0.0 || rule_violation_fraction > 1.0)
    throw ConfigError("synth: rule_violation_fraction outside [0,1]");
  if (anonymity_prob < 0.0 || anonymity_prob > 1.0)
    throw ConfigError("synth: anonymity_prob outside [0,1]");
  if (extra_edges < 0) throw ConfigError("synth: negative extra_edges");
}

namespace {

std::string nth_ip(int index) {
  int n = index + 1;
  return "10." + std::to_string((n >> 16) & 255) + "." + std::to_string((n >> 8) & 255) +
         "." + std::to_string(n & 255);
}

} // namespace

SynthOutput synth_network(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  int ip_counter = 0;
  SynthOutput out;
  out.truth.probe_ip = nth_ip(ip_counter++);
  Coord probe_pos = cfg.region.center();
  out.truth.locations[out.truth.probe_ip] = probe_pos;

  // Random tree over the routers, rooted at the probing host.
  struct RouterNode {
    std::string ip;
    Coord pos;
    double cum_dist_km = 0.0;
    std::vector<int> chain; // router indices from the probe down to here
  };
  std::vector<RouterNode> routers(static_cast<std::size_t>(cfg.n_routers));
  for (int i = 0; i < cfg.n_routers; ++i) {
    RouterNode& r = routers[static_cast<std::size_t>(i)];
    r.ip = nth_ip(ip_counter++);
    r.pos.lat = rng.uniform(cfg.region.lat_min, cfg.region.lat_max);
    r.pos.lon = rng.uniform(cfg.region.lon_min, cfg.region.lon_max);
    int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1))); // 0 = probe
    if (parent == 0) {
      r.cum_dist_km = haversine_km(probe_pos, r.pos);
      r.chain = {i};
    } else {
      const RouterNode& p = routers[static_cast<std::size_t>(parent - 1)];
      r.cum_dist_km = p.cum_dist_km + haversine_km(p.pos, r.pos);
      r.chain = p.chain;
      r.chain.push_back(i);
    }
    out.truth.locations[r.ip] = r.pos;
  }

  struct LmNode {
    std::string ip;
    Coord pos;
    int router = 0;
    double cum_dist_km = 0.0;
    int alt_router = -1;
    double alt_cum_dist_km = 0.0;
    bool violates = false;
  };
  std::vector<LmNode> lms(static_cast<std::size_t>(cfg.n_landmarks));
  for (int i = 0; i < cfg.n_landmarks; ++i) {
    LmNode& lm = lms[static_cast<std::size_t>(i)];
    lm.ip = nth_ip(ip_counter++);
    lm.pos.lat = rng.uniform(cfg.region.lat_min, cfg.region.lat_max);
    lm.pos.lon = rng.uniform(cfg.region.lon_min, cfg.region.lon_max);
    // nearest router: keeps the last-mile hop local, like real access links
    int best = 0;
    double best_d = haversine_km(lm.pos, routers[0].pos);
    for (int r = 1; r < cfg.n_routers; ++r) {
      double d = haversine_km(lm.pos, routers[static_cast<std::size_t>(r)].pos);
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    lm.router = best;
    lm.cum_dist_km = routers[static_cast<std::size_t>(best)].cum_dist_km + best_d;
    out.truth.locations[lm.ip] = lm.pos;
    out.landmarks.push_back({lm.ip, lm.pos.lat, lm.pos.lon});
  }

  double max_dist = 0.0;
  for (const LmNode& lm : lms) max_dist = std::max(max_dist, lm.cum_dist_km);

  // Anti-correlated landmarks: delay grows as distance shrinks.
  {
    std::vector<int> order(static_cast<std::size_t>(cfg.n_landmarks));
    for (int i = 0; i < cfg.n_landmarks; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    int k = static_cast<int>(std::llround(cfg.rule_violation_fraction * cfg.n_landmarks));
    for (int i = 0; i < k; ++i) lms[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].violates = true;
  }

  for (int e = 0; e < cfg.extra_edges; ++e) {
    int li = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_landmarks)));
    int ri = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_routers)));
    LmNode& lm = lms[static_cast<std::size_t>(li)];
    if (ri == lm.router) continue;
    lm.alt_router = ri;
    lm.alt_cum_dist_km = routers[static_cast<std::size_t>(ri)].cum_dist_km +
                         haversine_km(routers[static_cast<std::size_t>(ri)].pos, lm.pos);
  }

  for (const LmNode& lm : lms) {
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      bool use_alt = lm.alt_router >= 0 && rep % 2 == 1;
      int router = use_alt ? lm.alt_router : lm.router;
      double lm_cum = use_alt ? lm.alt_cum_dist_km : lm.cum_dist_km;
      const std::vector<int>& chain = routers[static_cast<std::size_t>(router)].chain;

      TracerouteRecord rec;
      rec.dst_ip = lm.ip;
      rec.probe_seq = rep;
      int ttl = 1;
      auto push_hop = [&](const std::string& ip, double cum_km, bool is_final) {
        double base = cum_km / cfg.prop_speed_km_per_ms;
        if (is_final && lm.violates) base = (max_dist - lm_cum) / cfg.prop_speed_km_per_ms;
        double rtt = std::max(0.0, base + rng.normal() * cfg.per_hop_noise_ms);
        bool anonymize = !is_final && rng.uniform() < cfg.anonymity_prob;
        Hop h;
        h.ttl = ttl++;
        if (!anonymize) {
          h.ip = ip;
          h.rtt_ms = rtt;
        }
        rec.hops.push_back(std::move(h));
      };
      for (int ridx : chain) {
        const RouterNode& r = routers[static_cast<std::size_t>(ridx)];
        push_hop(r.ip, r.cum_dist_km, false);
      }
      push_hop(lm.ip, lm_cum, true);
      out.traceroutes.push_back(std::move(rec));
    }
  }
  return out;
}

void serialize_truth(const GroundTruth& truth, std::ostream& out) {
  out << "ip,lat,lon\n";
  for (const auto& [ip, pos] : truth.locations)
    out << ip << ',' << format_double(pos.lat) << ',' << format_double(pos.lon) << '\n';
}

GroundTruth parse_truth(std::istream& in) {
  GroundTruth truth;
  for (const LandmarkRecord& rec : parse_landmarks(in))
    truth.locations[rec.ip] = {rec.lat, rec.lon};
  return truth;
}

} // namespace graphgeo
