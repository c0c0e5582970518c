#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphgeo/model.hpp"

namespace graphgeo {

struct SplitSpec {
  double train_frac = 0.7;
  double val_frac = 0.2;
  double test_frac = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

// Seeded shuffle, then floor(train), floor(val), remainder to test.
Split split_landmarks(std::span<const LandmarkRecord> landmarks, const SplitSpec& spec);

void save_split(const Split& split, const SplitSpec& spec, std::ostream& out);
Split load_split(std::istream& in);

struct TrainConfig {
  ModelConfig model;
  double lr = 0.001;
  double l2 = 0.001; // strength of the squared-parameter penalty
  int max_epochs = 4000;
  int patience = 1000;
  std::uint64_t seed = 0;
  // true: targets min-max scaled into (0,1) with the 0.1 degree margin;
  // false: regress raw degrees (the unbounded reference setup).
  bool rule_based_scaling = true;
  // false: penalty covers weights and embedding tables only.
  bool regularize_all = false;

  void validate() const;
};

// (node id, location in degrees)
using Labels = std::vector<std::pair<std::int32_t, Coord>>;

Labels labels_for(const AttributedGraph& graph,
                  std::span<const LandmarkRecord> landmarks,
                  std::span<const std::string> ips);

struct EpochStats {
  double train_loss = 0.0; // data MSE plus the L2 penalty
  double val_km = 0.0;     // eval-mode average haversine error
};

struct TrainReport {
  ModelParams best_params;
  std::optional<GeoScaler> scaler;
  std::vector<EpochStats> history; // entry i = epoch i+1
  int best_epoch = 0;              // 1-based
  double best_val_km = 0.0;
  std::string stop_reason;         // "early_stop" or "max_epochs"
};

// Full-batch training with early stopping on the validation average error.
// Returns the parameters (including batch-norm running stats) of the best
// validation epoch. Throws NumericError naming the epoch on divergence.
TrainReport train_model(const AttributedGraph& graph, const Labels& train_labels,
                        const Labels& val_labels, const TrainConfig& cfg);

void write_report_json(const TrainReport& report, const TrainConfig& cfg, std::ostream& out);

// Empty dimension means "keep the base config's value".
struct GridSpec {
  std::vector<int> embed_dims;
  std::vector<int> edge_dims;
  std::vector<int> depths;
  std::vector<int> edge_hiddens;
  std::vector<Aggregator> aggregators;
  std::vector<double> lrs;
  std::vector<double> l2s;
};

struct GridCellResult {
  TrainConfig config;
  double best_val_km = 0.0;
  int best_epoch = 0;
};

struct GridSearchResult {
  TrainConfig best_config;
  TrainReport best_report;
  std::vector<GridCellResult> cells;
};

// Trains every cell; minimal validation error wins, ties broken by fewer
// epochs to the best and then by enumeration order. Cell seeds are derived
// from the base seed so cells stay independent.
GridSearchResult grid_search(const AttributedGraph& graph, const Labels& train_labels,
                             const Labels& val_labels, const TrainConfig& base,
                             const GridSpec& grid);

} // namespace graphgeo
