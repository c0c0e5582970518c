#include "graphgeo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphgeo/autograd.hpp"
#include "graphgeo/errors.hpp"
#include "graphgeo/optim.hpp"
#include "graphgeo/rng.hpp"
#include "graphgeo/util.hpp"

namespace graphgeo {

PathIndex PathIndex::build(const std::vector<RoutingPath>& completed,
                           const std::unordered_map<std::string, double>& node_delay_ms) {
  PathIndex index;
  for (const RoutingPath& p : completed) {
    if (index.paths_.count(p.dst_ip)) continue; // first route per destination wins
    std::vector<PathHop> hops;
    for (const auto& entry : p.entries) {
      if (!entry) continue;
      auto it = node_delay_ms.find(*entry);
      if (it == node_delay_ms.end())
        throw ValidationError("PathIndex: no delay for " + *entry);
      hops.push_back({*entry, it->second});
    }
    if (hops.empty()) continue;
    for (const PathHop& h : hops) index.reverse_[h.ip].push_back(p.dst_ip);
    index.paths_.emplace(p.dst_ip, std::move(hops));
  }
  return index;
}

PathIndex PathIndex::from_graph(const AttributedGraph& graph,
                                const std::vector<RoutingPath>& completed) {
  std::unordered_map<std::string, double> delays;
  for (const GraphNode& n : graph.nodes) delays[n.ip] = n.delay_ms;
  return build(completed, delays);
}

const std::vector<PathHop>* PathIndex::path_of(const std::string& dst) const {
  auto it = paths_.find(dst);
  return it == paths_.end() ? nullptr : &it->second;
}

double PathIndex::dest_delay_ms(const std::string& dst) const {
  const auto* path = path_of(dst);
  if (!path) throw ValidationError("PathIndex: no path for " + dst);
  return path->back().cum_delay_ms;
}

const std::vector<std::string>& PathIndex::destinations_through(
    const std::string& router_ip) const {
  auto it = reverse_.find(router_ip);
  return it == reverse_.end() ? empty_ : it->second;
}

std::vector<std::string> PathIndex::all_path_ips() const {
  std::vector<std::string> ips;
  {
    std::unordered_set<std::string> seen;
    for (const auto& [dst, hops] : paths_)
      for (const PathHop& h : hops)
        if (seen.insert(h.ip).second) ips.push_back(h.ip);
  }
  std::sort(ips.begin(), ips.end(), [](const std::string& a, const std::string& b) {
    return *parse_ipv4(a) < *parse_ipv4(b);
  });
  return ips;
}

PathIndex::CommonRouter PathIndex::closest_common_router(const std::string& target,
                                                         const std::string& landmark) const {
  const auto* tpath = path_of(target);
  const auto* lpath = path_of(landmark);
  if (!tpath || !lpath)
    throw ValidationError("closest_common_router: missing path for " +
                          (tpath ? landmark : target));
  std::unordered_set<std::string> on_landmark_path;
  for (const PathHop& h : *lpath) on_landmark_path.insert(h.ip);

  CommonRouter best; // probing-host fallback: empty ip, delay 0
  bool found = false;
  for (const PathHop& h : *tpath) {
    if (!on_landmark_path.count(h.ip)) continue;
    if (!found || h.cum_delay_ms >= best.target_path_delay_ms) {
      best.ip = h.ip;
      best.target_path_delay_ms = h.cum_delay_ms;
      found = true;
    }
  }
  return best;
}

double PathIndex::relative_delay_ms(const std::string& target,
                                    const std::string& landmark) const {
  CommonRouter common = closest_common_router(target, landmark);
  double d_pt = dest_delay_ms(target);
  double d_pl = dest_delay_ms(landmark);
  return (d_pt - common.target_path_delay_ms) + (d_pl - common.target_path_delay_ms);
}

namespace {

// argmin of relative delay; lexicographically lower ip wins ties
const LandmarkRecord* min_relative_landmark(const std::string& target,
                                            std::span<const LandmarkRecord> landmarks,
                                            const PathIndex& index) {
  const LandmarkRecord* best = nullptr;
  double best_delay = 0.0;
  for (const LandmarkRecord& lm : landmarks) {
    double rd = index.relative_delay_ms(target, lm.ip);
    if (!best || rd < best_delay || (rd == best_delay && lm.ip < best->ip)) {
      best = &lm;
      best_delay = rd;
    }
  }
  return best;
}

} // namespace

Coord slg_geolocate(const std::string& target, std::span<const LandmarkRecord> landmarks,
                    const PathIndex& index) {
  if (landmarks.empty()) throw ValidationError("slg: no landmarks");
  const LandmarkRecord* best = min_relative_landmark(target, landmarks, index);
  return {best->lat, best->lon};
}

char CorrGroups::group_of(const std::string& landmark_ip) const {
  auto it = correlation.find(landmark_ip);
  if (it == correlation.end()) throw ValidationError("corr groups: unknown landmark " + landmark_ip);
  if (it->second > ca) return 'a';
  if (it->second < cb) return 'b';
  return 'c';
}

CorrGroups corr_groups(std::span<const LandmarkRecord> landmarks, const PathIndex& index,
                       double ca, double cb) {
  if (cb >= ca) throw ConfigError("corr groups: cb must be below ca");
  CorrGroups groups;
  groups.ca = ca;
  groups.cb = cb;
  for (const LandmarkRecord& lm : landmarks) {
    std::vector<double> delays, dists;
    for (const LandmarkRecord& other : landmarks) {
      if (other.ip == lm.ip) continue;
      delays.push_back(index.relative_delay_ms(lm.ip, other.ip));
      dists.push_back(haversine_km({lm.lat, lm.lon}, {other.lat, other.lon}));
    }
    double corr = 0.0;
    std::size_t n = delays.size();
    if (n >= 2) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        mx += delays[i];
        my += dists[i];
      }
      mx /= static_cast<double>(n);
      my /= static_cast<double>(n);
      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double dx = delays[i] - mx, dy = dists[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
      }
      if (sxx > 0.0 && syy > 0.0) corr = sxy / std::sqrt(sxx * syy);
    }
    groups.correlation[lm.ip] = corr;
    if (corr > ca) groups.group_a.push_back(lm.ip);
    else if (corr < cb) groups.group_b.push_back(lm.ip);
    else groups.group_c.push_back(lm.ip);
  }
  return groups;
}

std::vector<Coord> corr_slg_geolocate(std::span<const std::string> targets,
                                      std::span<const LandmarkRecord> landmarks,
                                      const PathIndex& index, double ca, double cb) {
  if (landmarks.empty()) throw ValidationError("corr-slg: no landmarks");
  CorrGroups groups = corr_groups(landmarks, index, ca, cb);
  std::unordered_map<std::string, const LandmarkRecord*> by_ip;
  for (const LandmarkRecord& lm : landmarks) by_ip[lm.ip] = &lm;

  auto members = [&](const std::vector<std::string>& ips) {
    std::vector<LandmarkRecord> out;
    for (const std::string& ip : ips) out.push_back(*by_ip.at(ip));
    return out;
  };
  std::vector<LandmarkRecord> in_a = members(groups.group_a);
  std::vector<LandmarkRecord> in_b = members(groups.group_b);
  std::vector<LandmarkRecord> in_c = members(groups.group_c);

  Coord centroid_c{};
  if (!in_c.empty()) {
    for (const LandmarkRecord& lm : in_c) {
      centroid_c.lat += lm.lat;
      centroid_c.lon += lm.lon;
    }
    centroid_c.lat /= static_cast<double>(in_c.size());
    centroid_c.lon /= static_cast<double>(in_c.size());
  }

  std::vector<Coord> out;
  out.reserve(targets.size());
  for (const std::string& target : targets) {
    const LandmarkRecord* nearest = min_relative_landmark(target, landmarks, index);
    char group = groups.group_of(nearest->ip);
    if (group == 'a' && !in_a.empty()) {
      out.push_back(slg_geolocate(target, in_a, index));
    } else if (group == 'b' && !in_b.empty()) {
      const LandmarkRecord* best = nullptr;
      double best_delay = 0.0;
      for (const LandmarkRecord& lm : in_b) {
        double rd = index.relative_delay_ms(target, lm.ip);
        if (!best || rd > best_delay || (rd == best_delay && lm.ip < best->ip)) {
          best = &lm;
          best_delay = rd;
        }
      }
      out.push_back({best->lat, best->lon});
    } else if (group == 'c' && !in_c.empty()) {
      out.push_back(centroid_c);
    } else {
      out.push_back(slg_geolocate(target, landmarks, index)); // empty group fallback
    }
  }
  return out;
}

std::vector<double> mlp_geo_input(const PathIndex& index, const std::string& ip,
                                  std::span<const std::string> slot_ips, double beta) {
  const auto* path = index.path_of(ip);
  if (!path) throw ValidationError("mlp-geo: no path for " + ip);
  std::unordered_set<std::string> on_path;
  for (const PathHop& h : *path) on_path.insert(h.ip);
  std::vector<double> row(1 + slot_ips.size(), 0.0);
  row[0] = path->back().cum_delay_ms;
  for (std::size_t s = 0; s < slot_ips.size(); ++s)
    if (on_path.count(slot_ips[s])) row[1 + s] = beta;
  return row;
}

namespace {

Tensor mlp_inputs(const PathIndex& index, std::span<const std::string> ips,
                  std::span<const std::string> slot_ips, double beta) {
  std::size_t dim = 1 + slot_ips.size();
  Tensor x = Tensor::zeros({ips.size(), dim});
  for (std::size_t i = 0; i < ips.size(); ++i) {
    std::vector<double> row = mlp_geo_input(index, ips[i], slot_ips, beta);
    for (std::size_t j = 0; j < dim; ++j) x.at(i, j) = row[j];
  }
  return x;
}

Tensor uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Tensor t = Tensor::zeros({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

struct MlpPass {
  Tape tape;
  NodeId output = -1;
  std::array<NodeId, 6> params{};
};

MlpPass mlp_forward_pass(const MlpGeoModel& m, const Tensor& inputs) {
  MlpPass pass;
  Tape& t = pass.tape;
  NodeId x = t.constant(inputs);
  pass.params = {t.leaf(m.w1), t.leaf(m.b1), t.leaf(m.w2),
                 t.leaf(m.b2), t.leaf(m.w3), t.leaf(m.b3)};
  NodeId h1 = t.relu(t.affine(x, pass.params[0], pass.params[1]));
  NodeId h2 = t.relu(t.affine(h1, pass.params[2], pass.params[3]));
  pass.output = t.affine(h2, pass.params[4], pass.params[5]);
  return pass;
}

} // namespace

MlpGeoReport mlp_geo_train(const PathIndex& index,
                           std::span<const LandmarkRecord> train_landmarks,
                           std::span<const LandmarkRecord> val_landmarks,
                           const MlpGeoConfig& cfg) {
  if (train_landmarks.empty() || val_landmarks.empty())
    throw ValidationError("mlp-geo: empty split");
  if (cfg.hidden <= 0) throw ConfigError("mlp-geo: hidden width must be positive");
  if (cfg.patience <= 0 || cfg.patience > cfg.max_epochs)
    throw ConfigError("mlp-geo: patience must be in [1, max_epochs]");

  MlpGeoReport report;
  MlpGeoModel& m = report.model;
  m.beta = cfg.beta;
  m.slot_ips = index.all_path_ips();

  std::vector<Coord> train_coords;
  std::vector<std::string> train_ips, val_ips;
  for (const LandmarkRecord& lm : train_landmarks) {
    train_coords.push_back({lm.lat, lm.lon});
    train_ips.push_back(lm.ip);
  }
  for (const LandmarkRecord& lm : val_landmarks) val_ips.push_back(lm.ip);
  m.scaler = GeoScaler::fit(train_coords);

  Tensor x_train = mlp_inputs(index, train_ips, m.slot_ips, cfg.beta);
  Tensor x_val = mlp_inputs(index, val_ips, m.slot_ips, cfg.beta);
  Tensor y_train = Tensor::zeros({train_ips.size(), 2});
  for (std::size_t i = 0; i < train_coords.size(); ++i) {
    Coord c = m.scaler.transform(train_coords[i]);
    y_train.at(i, 0) = c.lat;
    y_train.at(i, 1) = c.lon;
  }

  std::size_t dim = 1 + m.slot_ips.size();
  std::size_t hidden = static_cast<std::size_t>(cfg.hidden);
  Rng rng(cfg.seed);
  m.w1 = uniform_matrix(rng, dim, hidden);
  m.b1 = Tensor::zeros({hidden});
  m.w2 = uniform_matrix(rng, hidden, hidden);
  m.b2 = Tensor::zeros({hidden});
  m.w3 = uniform_matrix(rng, hidden, 2);
  m.b3 = Tensor::zeros({2});

  std::array<Tensor*, 6> tensors{&m.w1, &m.b1, &m.w2, &m.b2, &m.w3, &m.b3};
  std::array<bool, 6> decayed{true, false, true, false, true, false};
  std::vector<AdamState> adam(6);
  AdamConfig adam_cfg;

  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  MlpGeoModel best_model = m;
  std::string stop_reason = "max_epochs";

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    MlpPass pass = mlp_forward_pass(m, x_train);
    NodeId loss_node = pass.tape.mse_sum(pass.output, y_train);
    double loss = pass.tape.scalar_value(loss_node);
    if (!std::isfinite(loss))
      throw NumericError("mlp-geo: loss diverged at epoch " + std::to_string(epoch));
    Gradients grads = pass.tape.backward(loss_node);
    for (std::size_t k = 0; k < 6; ++k)
      adam_step(*tensors[k], grads.wrt(pass.params[k]), adam[k], adam_cfg, cfg.lr,
                decayed[k] ? cfg.l2 : 0.0);

    MlpPass val_pass = mlp_forward_pass(m, x_val);
    const Tensor& vp = val_pass.tape.value(val_pass.output);
    double total = 0.0;
    for (std::size_t i = 0; i < val_ips.size(); ++i) {
      Coord p = m.scaler.inverse({vp.at(i, 0), vp.at(i, 1)});
      total += haversine_km(p, {val_landmarks[i].lat, val_landmarks[i].lon});
    }
    double val_km = total / static_cast<double>(val_ips.size());
    report.val_history_km.push_back(val_km);

    if (val_km < best_val) {
      best_val = val_km;
      best_epoch = epoch;
      best_model = m;
    } else if (epoch - best_epoch >= cfg.patience) {
      stop_reason = "early_stop";
      break;
    }
  }

  report.model = std::move(best_model);
  report.best_epoch = best_epoch;
  report.best_val_km = best_val;
  report.stop_reason = stop_reason;
  return report;
}

std::vector<Coord> mlp_geo_predict(const MlpGeoModel& model, const PathIndex& index,
                                   std::span<const std::string> targets) {
  Tensor x = mlp_inputs(index, targets, model.slot_ips, model.beta);
  MlpPass pass = mlp_forward_pass(model, x);
  const Tensor& out = pass.tape.value(pass.output);
  std::vector<Coord> coords;
  coords.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    coords.push_back(model.scaler.inverse({out.at(i, 0), out.at(i, 1)}));
  return coords;
}

} // namespace graphgeo
