#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphgeo/autograd.hpp"
#include "graphgeo/geo.hpp"
#include "graphgeo/graph.hpp"

namespace graphgeo {

enum class DecoderKind { Vanilla, VanillaBn, Sigmoid, BnSigmoid };

DecoderKind decoder_from_string(const std::string& s);
std::string to_string(DecoderKind d);

inline bool decoder_has_bn(DecoderKind d) {
  return d == DecoderKind::VanillaBn || d == DecoderKind::BnSigmoid;
}
inline bool decoder_has_sigmoid(DecoderKind d) {
  return d == DecoderKind::Sigmoid || d == DecoderKind::BnSigmoid;
}

struct ModelConfig {
  int embed_dim = 64;  // node embedding width, split between ID and attribute halves
  int edge_dim = 8;    // edge embedding width
  int num_layers = 2;  // message-passing depth
  Aggregator aggregator = Aggregator::Mean;
  int edge_hidden = 0; // edge-network hidden width; 0 means 2 * edge_dim
  DecoderKind decoder = DecoderKind::BnSigmoid;
  std::uint64_t seed = 0;

  int effective_edge_hidden() const { return edge_hidden > 0 ? edge_hidden : 2 * edge_dim; }
  void validate() const;
};

// Edge network of one message-passing layer: edge embedding -> hidden
// (ReLU) -> flattened G x G message weight matrix.
struct MpLayerParams {
  Tensor w1, b1; // edge_dim x hidden, hidden
  Tensor w2, b2; // hidden x G*G, G*G
};

struct ModelParams {
  Tensor node_id_embed;    // N x G/2
  Tensor attr_weight;      // 15 x G/2
  Tensor attr_bias;        // G/2
  Tensor edge_proj_weight; // 11 x edge_dim
  Tensor edge_proj_bias;   // edge_dim
  std::vector<MpLayerParams> layers;
  Tensor hid_weight, hid_bias; // G x G, G
  Tensor out_weight, out_bias; // G x 2, 2
  std::optional<BatchNormState> bn;

  std::size_t count() const; // trainable scalars
};

// Canonical parameter enumeration; `regularized` marks the default L2 set
// (weights and embedding tables, not biases or batch-norm scale/shift).
struct ParamSlot {
  std::string name;
  Tensor* tensor;
  bool regularized;
};
std::vector<ParamSlot> param_slots(ModelParams& p);

ModelParams init_params(const ModelConfig& cfg, std::size_t n_nodes);
std::size_t param_count(const ModelConfig& cfg, std::size_t n_nodes);

enum class RunMode { Train, Eval };

// One recorded forward pass over the whole graph. `param_ids` is aligned
// with param_slots() so gradients can be routed back to their tensors.
struct ForwardPass {
  Tape tape;
  NodeId h0 = -1;
  NodeId edge_emb = -1;
  NodeId h_final = -1;
  NodeId output = -1; // N x 2 in the scaled output domain
  std::vector<NodeId> param_ids;
};

ForwardPass model_forward(const AttributedGraph& graph, ModelParams& params,
                          const ModelConfig& cfg, RunMode mode);

// Eager, value-returning forms of the individual stages.
std::pair<Tensor, Tensor> encode(const AttributedGraph& graph, const ModelParams& params);
Tensor edge_weight_matrix(const Tensor& edge_embedding, const MpLayerParams& layer,
                          int embed_dim);
Tensor message(const Tensor& h_neighbor, const Tensor& weight_matrix);
Tensor aggregate(const std::vector<Tensor>& messages, Aggregator agg, std::size_t dim);
Tensor update_embedding(const Tensor& h_prev, const Tensor& aggregated);
Tensor mp_forward(const AttributedGraph& graph, const Tensor& h0, const Tensor& edge_emb,
                  const ModelParams& params, const ModelConfig& cfg);
Tensor decode(const Tensor& h_final, ModelParams& params, const ModelConfig& cfg,
              RunMode mode);
Tensor forward(const AttributedGraph& graph, ModelParams& params, const ModelConfig& cfg,
               RunMode mode);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::optional<GeoScaler> scaler; // absent when trained on raw coordinates
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
};

// Round-trip stable: load(save(c)) reproduces every tensor bit for bit.
void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
Checkpoint load_checkpoint(std::istream& in);

} // namespace graphgeo
