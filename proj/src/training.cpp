#include "graphgeo/training.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "graphgeo/errors.hpp"
#include "graphgeo/optim.hpp"
#include "graphgeo/rng.hpp"

namespace graphgeo {

using ordered_json = nlohmann::ordered_json;

void SplitSpec::validate() const {
  if (train_frac < 0 || val_frac < 0 || test_frac < 0)
    throw ConfigError("split: negative fraction");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw ConfigError("split: fractions must sum to 1");
}

Split split_landmarks(std::span<const LandmarkRecord> landmarks, const SplitSpec& spec) {
  spec.validate();
  if (landmarks.size() < 10)
    throw ValidationError("split: need at least 10 landmarks, got " +
                          std::to_string(landmarks.size()));
  std::vector<std::size_t> order(landmarks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  std::size_t n = landmarks.size();
  std::size_t n_train = static_cast<std::size_t>(std::floor(spec.train_frac * static_cast<double>(n)));
  std::size_t n_val = static_cast<std::size_t>(std::floor(spec.val_frac * static_cast<double>(n)));
  Split split;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& ip = landmarks[order[i]].ip;
    if (i < n_train) split.train.push_back(ip);
    else if (i < n_train + n_val) split.val.push_back(ip);
    else split.test.push_back(ip);
  }
  return split;
}

void save_split(const Split& split, const SplitSpec& spec, std::ostream& out) {
  ordered_json j;
  j["version"] = 1;
  j["seed"] = spec.seed;
  j["fractions"] = {spec.train_frac, spec.val_frac, spec.test_frac};
  j["train"] = split.train;
  j["val"] = split.val;
  j["test"] = split.test;
  out << j.dump() << '\n';
}

Split load_split(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("split file: ") + e.what());
  }
  try {
    Split split;
    split.train = j.at("train").get<std::vector<std::string>>();
    split.val = j.at("val").get<std::vector<std::string>>();
    split.test = j.at("test").get<std::vector<std::string>>();
    return split;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("split file: ") + e.what());
  }
}

void TrainConfig::validate() const {
  model.validate();
  if (lr < 0) throw ConfigError("train: negative learning rate");
  if (l2 < 0) throw ConfigError("train: negative l2 coefficient");
  if (max_epochs <= 0) throw ConfigError("train: max_epochs must be positive");
  if (patience <= 0 || patience > max_epochs)
    throw ConfigError("train: patience must be in [1, max_epochs]");
}

Labels labels_for(const AttributedGraph& graph,
                  std::span<const LandmarkRecord> landmarks,
                  std::span<const std::string> ips) {
  std::unordered_map<std::string, Coord> coord_of;
  for (const LandmarkRecord& lm : landmarks) coord_of[lm.ip] = {lm.lat, lm.lon};
  Labels labels;
  for (const std::string& ip : ips) {
    auto it = coord_of.find(ip);
    if (it == coord_of.end())
      throw ValidationError("labels_for: " + ip + " is not a known landmark");
    std::int32_t node = graph.node_of(ip);
    if (node < 0) throw ValidationError("labels_for: " + ip + " is not in the graph");
    labels.push_back({node, it->second});
  }
  return labels;
}

namespace {

struct LabelTensors {
  std::vector<std::int32_t> rows;
  Tensor targets; // n x 2, in the training output domain
};

LabelTensors scale_labels(const Labels& labels, const std::optional<GeoScaler>& scaler) {
  Labels sorted = labels;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  LabelTensors out;
  out.targets = Tensor::zeros({sorted.size(), 2});
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.rows.push_back(sorted[i].first);
    Coord c = sorted[i].second;
    if (scaler) c = scaler->transform(c);
    out.targets.at(i, 0) = c.lat;
    out.targets.at(i, 1) = c.lon;
  }
  return out;
}

double validation_error_km(const AttributedGraph& graph, ModelParams& params,
                           const ModelConfig& model_cfg,
                           const std::optional<GeoScaler>& scaler, const Labels& val) {
  Tensor pred = forward(graph, params, model_cfg, RunMode::Eval);
  double total = 0.0;
  for (const auto& [node, coord] : val) {
    Coord p{pred.at(static_cast<std::size_t>(node), 0),
            pred.at(static_cast<std::size_t>(node), 1)};
    if (scaler) p = scaler->inverse(p);
    total += haversine_km(p, coord);
  }
  return total / static_cast<double>(val.size());
}

} // namespace

TrainReport train_model(const AttributedGraph& graph, const Labels& train_labels,
                        const Labels& val_labels, const TrainConfig& cfg) {
  cfg.validate();
  if (train_labels.empty()) throw ValidationError("train: no training labels");
  if (val_labels.empty()) throw ValidationError("train: no validation labels");
  {
    std::set<std::int32_t> seen;
    for (const auto& [node, coord] : train_labels) {
      if (node < 0 || static_cast<std::size_t>(node) >= graph.n_nodes())
        throw ValidationError("train: label node out of range");
      if (!seen.insert(node).second)
        throw ValidationError("train: duplicate labeled node " + std::to_string(node));
    }
  }

  std::optional<GeoScaler> scaler;
  if (cfg.rule_based_scaling) {
    std::vector<Coord> coords;
    coords.reserve(train_labels.size());
    for (const auto& [node, coord] : train_labels) coords.push_back(coord);
    scaler = GeoScaler::fit(coords);
  }
  LabelTensors lt = scale_labels(train_labels, scaler);

  ModelParams params = init_params(cfg.model, graph.n_nodes());
  auto slots = param_slots(params);
  std::vector<AdamState> adam(slots.size());
  AdamConfig adam_cfg;

  TrainReport report;
  report.scaler = scaler;
  double best_val = std::numeric_limits<double>::infinity();
  ModelParams best_params = params;
  int best_epoch = 0;
  std::string stop_reason = "max_epochs";

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    ForwardPass pass = model_forward(graph, params, cfg.model, RunMode::Train);
    NodeId picked = pass.tape.select_rows(pass.output, lt.rows);
    NodeId loss_node = pass.tape.mse_sum(picked, lt.targets);
    double data_loss = pass.tape.scalar_value(loss_node);

    double penalty = 0.0;
    for (const ParamSlot& s : slots) {
      if (!(s.regularized || cfg.regularize_all)) continue;
      for (std::size_t i = 0; i < s.tensor->size(); ++i)
        penalty += (*s.tensor)[i] * (*s.tensor)[i];
    }
    double loss = data_loss + cfg.l2 * penalty;
    if (!std::isfinite(loss))
      throw NumericError("train: loss diverged at epoch " + std::to_string(epoch));

    Gradients grads = pass.tape.backward(loss_node);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      double decay = (slots[k].regularized || cfg.regularize_all) ? cfg.l2 : 0.0;
      Tensor g = grads.wrt(pass.param_ids[k]);
      adam_step(*slots[k].tensor, g, adam[k], adam_cfg, cfg.lr, decay);
    }

    double val_km = validation_error_km(graph, params, cfg.model, scaler, val_labels);
    report.history.push_back({loss, val_km});

    if (val_km < best_val) {
      best_val = val_km;
      best_params = params;
      best_epoch = epoch;
    } else if (epoch - best_epoch >= cfg.patience) {
      stop_reason = "early_stop";
      break;
    }
  }

  report.best_params = std::move(best_params);
  report.best_epoch = best_epoch;
  report.best_val_km = best_val;
  report.stop_reason = stop_reason;
  return report;
}

namespace {

ordered_json train_config_json(const TrainConfig& cfg) {
  return {{"embed_dim", cfg.model.embed_dim},
          {"edge_dim", cfg.model.edge_dim},
          {"num_layers", cfg.model.num_layers},
          {"aggregator", to_string(cfg.model.aggregator)},
          {"edge_hidden", cfg.model.edge_hidden},
          {"decoder", to_string(cfg.model.decoder)},
          {"model_seed", cfg.model.seed},
          {"lr", cfg.lr},
          {"l2", cfg.l2},
          {"max_epochs", cfg.max_epochs},
          {"patience", cfg.patience},
          {"seed", cfg.seed},
          {"rule_based_scaling", cfg.rule_based_scaling},
          {"regularize_all", cfg.regularize_all}};
}

} // namespace

void write_report_json(const TrainReport& report, const TrainConfig& cfg, std::ostream& out) {
  ordered_json j;
  j["version"] = 1;
  j["config"] = train_config_json(cfg);
  j["best_epoch"] = report.best_epoch;
  j["best_val_km"] = report.best_val_km;
  j["stop_reason"] = report.stop_reason;
  ordered_json hist = ordered_json::array();
  for (const EpochStats& e : report.history) hist.push_back({e.train_loss, e.val_km});
  j["history"] = std::move(hist);
  out << j.dump() << '\n';
}

GridSearchResult grid_search(const AttributedGraph& graph, const Labels& train_labels,
                             const Labels& val_labels, const TrainConfig& base,
                             const GridSpec& grid) {
  auto ints = [](const std::vector<int>& v, int fallback) {
    return v.empty() ? std::vector<int>{fallback} : v;
  };
  auto doubles = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  std::vector<Aggregator> aggs =
      grid.aggregators.empty() ? std::vector<Aggregator>{base.model.aggregator}
                               : grid.aggregators;
  std::vector<int> gs = ints(grid.embed_dims, base.model.embed_dim);
  std::vector<int> ks = ints(grid.edge_dims, base.model.edge_dim);
  std::vector<int> ls = ints(grid.depths, base.model.num_layers);
  std::vector<int> ehs = ints(grid.edge_hiddens, base.model.edge_hidden);
  std::vector<double> lrs = doubles(grid.lrs, base.lr);
  std::vector<double> l2s = doubles(grid.l2s, base.l2);

  GridSearchResult result;
  bool have_best = false;
  std::size_t cell_index = 0;
  for (int g : gs)
    for (int k : ks)
      for (int l : ls)
        for (int eh : ehs)
          for (Aggregator agg : aggs)
            for (double lr : lrs)
              for (double l2 : l2s) {
                TrainConfig cfg = base;
                cfg.model.embed_dim = g;
                cfg.model.edge_dim = k;
                cfg.model.num_layers = l;
                cfg.model.edge_hidden = eh;
                cfg.model.aggregator = agg;
                cfg.lr = lr;
                cfg.l2 = l2;
                cfg.seed = Rng::derive(base.seed, cell_index);
                cfg.model.seed = cfg.seed;
                TrainReport report = train_model(graph, train_labels, val_labels, cfg);
                result.cells.push_back({cfg, report.best_val_km, report.best_epoch});
                bool better = !have_best ||
                              report.best_val_km < result.best_report.best_val_km ||
                              (report.best_val_km == result.best_report.best_val_km &&
                               report.best_epoch < result.best_report.best_epoch);
                if (better) {
                  result.best_config = cfg;
                  result.best_report = std::move(report);
                  have_best = true;
                }
                ++cell_index;
              }
  if (!have_best) throw ConfigError("grid_search: empty grid");
  return result;
}

} // namespace graphgeo
