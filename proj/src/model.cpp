#include "graphgeo/model.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "graphgeo/errors.hpp"
#include "graphgeo/rng.hpp"

namespace graphgeo {

using ordered_json = nlohmann::ordered_json;

DecoderKind decoder_from_string(const std::string& s) {
  if (s == "vanilla") return DecoderKind::Vanilla;
  if (s == "vanilla_bn") return DecoderKind::VanillaBn;
  if (s == "sigmoid") return DecoderKind::Sigmoid;
  if (s == "bn_sigmoid") return DecoderKind::BnSigmoid;
  throw ConfigError("unknown decoder: " + s);
}

std::string to_string(DecoderKind d) {
  switch (d) {
    case DecoderKind::Vanilla: return "vanilla";
    case DecoderKind::VanillaBn: return "vanilla_bn";
    case DecoderKind::Sigmoid: return "sigmoid";
    case DecoderKind::BnSigmoid: return "bn_sigmoid";
  }
  throw ConfigError("invalid decoder value");
}

void ModelConfig::validate() const {
  if (embed_dim <= 0 || embed_dim % 2 != 0)
    throw ConfigError("embed_dim must be positive and even");
  if (edge_dim <= 0) throw ConfigError("edge_dim must be positive");
  if (num_layers <= 0) throw ConfigError("num_layers must be positive");
  if (edge_hidden < 0) throw ConfigError("edge_hidden must be non-negative");
}

std::vector<ParamSlot> param_slots(ModelParams& p) {
  std::vector<ParamSlot> slots;
  slots.push_back({"node_id_embed", &p.node_id_embed, true});
  slots.push_back({"attr_weight", &p.attr_weight, true});
  slots.push_back({"attr_bias", &p.attr_bias, false});
  slots.push_back({"edge_proj_weight", &p.edge_proj_weight, true});
  slots.push_back({"edge_proj_bias", &p.edge_proj_bias, false});
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    std::string prefix = "layer" + std::to_string(l) + ".";
    slots.push_back({prefix + "w1", &p.layers[l].w1, true});
    slots.push_back({prefix + "b1", &p.layers[l].b1, false});
    slots.push_back({prefix + "w2", &p.layers[l].w2, true});
    slots.push_back({prefix + "b2", &p.layers[l].b2, false});
  }
  slots.push_back({"hid_weight", &p.hid_weight, true});
  slots.push_back({"hid_bias", &p.hid_bias, false});
  slots.push_back({"out_weight", &p.out_weight, true});
  slots.push_back({"out_bias", &p.out_bias, false});
  if (p.bn) {
    slots.push_back({"bn_gamma", &p.bn->gamma, false});
    slots.push_back({"bn_beta", &p.bn->beta, false});
  }
  return slots;
}

std::size_t ModelParams::count() const {
  std::size_t total = 0;
  auto slots = param_slots(const_cast<ModelParams&>(*this));
  for (const ParamSlot& s : slots) total += s.tensor->size();
  return total;
}

namespace {

Tensor uniform_init(Rng& rng, std::size_t rows, std::size_t cols, std::size_t fan_in) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

} // namespace

ModelParams init_params(const ModelConfig& cfg, std::size_t n_nodes) {
  cfg.validate();
  if (n_nodes == 0) throw ConfigError("init_params: empty graph");
  Rng rng(cfg.seed);
  std::size_t g = static_cast<std::size_t>(cfg.embed_dim);
  std::size_t half = g / 2;
  std::size_t k = static_cast<std::size_t>(cfg.edge_dim);
  std::size_t eh = static_cast<std::size_t>(cfg.effective_edge_hidden());

  ModelParams p;
  p.node_id_embed = Tensor::zeros({n_nodes, half});
  for (std::size_t i = 0; i < p.node_id_embed.size(); ++i)
    p.node_id_embed[i] = rng.normal();

  p.attr_weight = uniform_init(rng, 15, half, 15);
  p.attr_bias = Tensor::zeros({half});
  p.edge_proj_weight = uniform_init(rng, 11, k, 11);
  p.edge_proj_bias = Tensor::zeros({k});
  for (int l = 0; l < cfg.num_layers; ++l) {
    MpLayerParams layer;
    layer.w1 = uniform_init(rng, k, eh, k);
    layer.b1 = Tensor::zeros({eh});
    layer.w2 = uniform_init(rng, eh, g * g, eh);
    layer.b2 = Tensor::zeros({g * g});
    p.layers.push_back(std::move(layer));
  }
  p.hid_weight = uniform_init(rng, g, g, g);
  p.hid_bias = Tensor::zeros({g});
  p.out_weight = uniform_init(rng, g, 2, g);
  p.out_bias = Tensor::zeros({2});
  if (decoder_has_bn(cfg.decoder)) p.bn.emplace(g);
  return p;
}

std::size_t param_count(const ModelConfig& cfg, std::size_t n_nodes) {
  std::size_t g = static_cast<std::size_t>(cfg.embed_dim);
  std::size_t half = g / 2;
  std::size_t k = static_cast<std::size_t>(cfg.edge_dim);
  std::size_t eh = static_cast<std::size_t>(cfg.effective_edge_hidden());
  std::size_t layers = static_cast<std::size_t>(cfg.num_layers);
  std::size_t total = n_nodes * half          // node ID table
                      + 15 * half + half      // attribute projection
                      + 11 * k + k            // edge projection
                      + layers * (k * eh + eh + eh * g * g + g * g)
                      + g * g + g             // decoder hidden
                      + g * 2 + 2;            // decoder output
  if (decoder_has_bn(cfg.decoder)) total += 2 * g;
  return total;
}

ForwardPass model_forward(const AttributedGraph& graph, ModelParams& params,
                          const ModelConfig& cfg, RunMode mode) {
  cfg.validate();
  if (graph.n_nodes() == 0) throw ValidationError("model_forward: empty graph");
  if (params.node_id_embed.rows() != graph.n_nodes())
    throw DimensionError("model_forward: params sized for a different node count");
  if (decoder_has_bn(cfg.decoder) && !params.bn)
    throw ConfigError("model_forward: decoder needs batch-norm state");

  ForwardPass pass;
  Tape& t = pass.tape;
  auto slots = param_slots(params);
  pass.param_ids.reserve(slots.size());
  for (const ParamSlot& s : slots) pass.param_ids.push_back(t.leaf(*s.tensor));

  // param_slots order: id table, attr w/b, edge w/b, layers, hid, out, [bn]
  std::size_t idx = 0;
  NodeId id_embed = pass.param_ids[idx++];
  NodeId attr_w = pass.param_ids[idx++];
  NodeId attr_b = pass.param_ids[idx++];
  NodeId edge_w = pass.param_ids[idx++];
  NodeId edge_b = pass.param_ids[idx++];
  std::vector<std::array<NodeId, 4>> layer_ids;
  for (int l = 0; l < cfg.num_layers; ++l) {
    std::array<NodeId, 4> ids{};
    for (int j = 0; j < 4; ++j) ids[static_cast<std::size_t>(j)] = pass.param_ids[idx++];
    layer_ids.push_back(ids);
  }
  NodeId hid_w = pass.param_ids[idx++];
  NodeId hid_b = pass.param_ids[idx++];
  NodeId out_w = pass.param_ids[idx++];
  NodeId out_b = pass.param_ids[idx++];
  NodeId bn_gamma = -1, bn_beta = -1;
  if (params.bn) {
    bn_gamma = pass.param_ids[idx++];
    bn_beta = pass.param_ids[idx++];
  }

  NodeId node_feat = t.constant(graph.node_features);
  NodeId edge_feat = t.constant(graph.edge_features);

  // encoder: ID embedding concatenated with a linear map of the attributes
  NodeId attr_half = t.affine(node_feat, attr_w, attr_b);
  pass.h0 = t.concat_cols(id_embed, attr_half);
  pass.edge_emb = t.affine(edge_feat, edge_w, edge_b);

  NodeId h = pass.h0;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const auto& ids = layer_ids[static_cast<std::size_t>(l)];
    NodeId hidden = t.relu(t.affine(pass.edge_emb, ids[0], ids[1]));
    NodeId edge_mats = t.affine(hidden, ids[2], ids[3]); // per edge, flat G*G
    NodeId agg = t.mp_aggregate(h, edge_mats, graph.adjacency, cfg.aggregator);
    h = t.relu(t.add(h, agg));
  }
  pass.h_final = h;

  // decoder: hidden ReLU layer, optional BN, output layer, optional sigmoid
  NodeId hid = t.relu(t.affine(h, hid_w, hid_b));
  if (params.bn) {
    params.bn->training = mode == RunMode::Train;
    hid = t.batch_norm(hid, bn_gamma, bn_beta, *params.bn);
  }
  NodeId out = t.affine(hid, out_w, out_b);
  if (decoder_has_sigmoid(cfg.decoder)) out = t.sigmoid(out);
  pass.output = out;
  return pass;
}

std::pair<Tensor, Tensor> encode(const AttributedGraph& graph, const ModelParams& params) {
  Tape t;
  NodeId attr_w = t.constant(params.attr_weight);
  NodeId attr_b = t.constant(params.attr_bias);
  NodeId edge_w = t.constant(params.edge_proj_weight);
  NodeId edge_b = t.constant(params.edge_proj_bias);
  NodeId id_embed = t.constant(params.node_id_embed);
  NodeId h0 = t.concat_cols(id_embed, t.affine(t.constant(graph.node_features), attr_w, attr_b));
  NodeId e = t.affine(t.constant(graph.edge_features), edge_w, edge_b);
  return {t.value(h0), t.value(e)};
}

Tensor edge_weight_matrix(const Tensor& edge_embedding, const MpLayerParams& layer,
                          int embed_dim) {
  std::size_t g = static_cast<std::size_t>(embed_dim);
  Tape t;
  NodeId e = t.constant(Tensor::from({1, edge_embedding.size()},
                                     {edge_embedding.data().begin(), edge_embedding.data().end()}));
  NodeId hidden = t.relu(t.affine(e, t.constant(layer.w1), t.constant(layer.b1)));
  NodeId flat = t.affine(hidden, t.constant(layer.w2), t.constant(layer.b2));
  const Tensor& v = t.value(flat);
  if (v.size() != g * g)
    throw DimensionError("edge_weight_matrix: layer does not produce G*G values");
  return Tensor::from({g, g}, {v.data().begin(), v.data().end()});
}

Tensor message(const Tensor& h_neighbor, const Tensor& weight_matrix) {
  if (weight_matrix.rank() != 2 || weight_matrix.cols() != h_neighbor.size())
    throw DimensionError("message: weight matrix does not match embedding size");
  std::size_t g = weight_matrix.rows();
  Tensor m = Tensor::zeros({g});
  for (std::size_t r = 0; r < g; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < weight_matrix.cols(); ++c)
      acc += weight_matrix.at(r, c) * h_neighbor[c];
    m[r] = acc;
  }
  return m;
}

Tensor aggregate(const std::vector<Tensor>& messages, Aggregator agg, std::size_t dim) {
  Tensor out = Tensor::zeros({dim});
  if (messages.empty()) return out;
  for (std::size_t s = 0; s < messages.size(); ++s) {
    const Tensor& m = messages[s];
    if (m.size() != dim) throw DimensionError("aggregate: message size mismatch");
    switch (agg) {
      case Aggregator::Sum:
      case Aggregator::Mean:
        for (std::size_t i = 0; i < dim; ++i) out[i] += m[i];
        break;
      case Aggregator::Max:
        for (std::size_t i = 0; i < dim; ++i)
          if (s == 0 || m[i] > out[i]) out[i] = m[i];
        break;
    }
  }
  if (agg == Aggregator::Mean)
    for (std::size_t i = 0; i < dim; ++i) out[i] /= static_cast<double>(messages.size());
  return out;
}

Tensor update_embedding(const Tensor& h_prev, const Tensor& aggregated) {
  if (!h_prev.same_shape(aggregated))
    throw DimensionError("update_embedding: shape mismatch");
  Tensor out = h_prev;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::max(0.0, out[i] + aggregated[i]);
  return out;
}

Tensor mp_forward(const AttributedGraph& graph, const Tensor& h0, const Tensor& edge_emb,
                  const ModelParams& params, const ModelConfig& cfg) {
  cfg.validate();
  Tape t;
  NodeId h = t.constant(h0);
  NodeId e = t.constant(edge_emb);
  for (int l = 0; l < cfg.num_layers; ++l) {
    const MpLayerParams& layer = params.layers[static_cast<std::size_t>(l)];
    NodeId hidden = t.relu(t.affine(e, t.constant(layer.w1), t.constant(layer.b1)));
    NodeId mats = t.affine(hidden, t.constant(layer.w2), t.constant(layer.b2));
    NodeId agg = t.mp_aggregate(h, mats, graph.adjacency, cfg.aggregator);
    h = t.relu(t.add(h, agg));
  }
  return t.value(h);
}

Tensor decode(const Tensor& h_final, ModelParams& params, const ModelConfig& cfg,
              RunMode mode) {
  cfg.validate();
  if (decoder_has_bn(cfg.decoder) && !params.bn)
    throw ConfigError("decode: decoder needs batch-norm state");
  Tape t;
  NodeId hid = t.relu(t.affine(t.constant(h_final), t.constant(params.hid_weight),
                               t.constant(params.hid_bias)));
  if (decoder_has_bn(cfg.decoder)) {
    params.bn->training = mode == RunMode::Train;
    hid = t.batch_norm(hid, t.constant(params.bn->gamma), t.constant(params.bn->beta),
                       *params.bn);
  }
  NodeId out = t.affine(hid, t.constant(params.out_weight), t.constant(params.out_bias));
  if (decoder_has_sigmoid(cfg.decoder)) out = t.sigmoid(out);
  return t.value(out);
}

Tensor forward(const AttributedGraph& graph, ModelParams& params, const ModelConfig& cfg,
               RunMode mode) {
  ForwardPass pass = model_forward(graph, params, cfg, mode);
  return pass.tape.value(pass.output);
}

namespace {

ordered_json tensor_json(const Tensor& t) {
  ordered_json j;
  j["shape"] = t.shape();
  j["data"] = std::vector<double>(t.data().begin(), t.data().end());
  return j;
}

Tensor tensor_from(const ordered_json& j) {
  return Tensor::from(j.at("shape").get<std::vector<std::size_t>>(),
                      j.at("data").get<std::vector<double>>());
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  ordered_json j;
  j["version"] = 1;
  j["model"] = {{"embed_dim", ckpt.config.embed_dim},
                {"edge_dim", ckpt.config.edge_dim},
                {"num_layers", ckpt.config.num_layers},
                {"aggregator", to_string(ckpt.config.aggregator)},
                {"edge_hidden", ckpt.config.edge_hidden},
                {"decoder", to_string(ckpt.config.decoder)},
                {"seed", ckpt.config.seed}};
  j["n_nodes"] = ckpt.n_nodes;
  j["n_edges"] = ckpt.n_edges;
  if (ckpt.scaler) {
    j["scaler"] = {{"lat_min", ckpt.scaler->lat_min()},
                   {"lat_max", ckpt.scaler->lat_max()},
                   {"lon_min", ckpt.scaler->lon_min()},
                   {"lon_max", ckpt.scaler->lon_max()}};
  } else {
    j["scaler"] = nullptr;
  }
  ordered_json params;
  auto slots = param_slots(const_cast<ModelParams&>(ckpt.params));
  for (const ParamSlot& s : slots) params[s.name] = tensor_json(*s.tensor);
  j["params"] = std::move(params);
  if (ckpt.params.bn) {
    j["bn_state"] = {{"running_mean", tensor_json(ckpt.params.bn->running_mean)},
                     {"running_var", tensor_json(ckpt.params.bn->running_var)},
                     {"momentum", ckpt.params.bn->momentum},
                     {"eps", ckpt.params.bn->eps}};
  }
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) throw ParseError("checkpoint: unsupported version");
    Checkpoint ckpt;
    const auto& m = j.at("model");
    ckpt.config.embed_dim = m.at("embed_dim").get<int>();
    ckpt.config.edge_dim = m.at("edge_dim").get<int>();
    ckpt.config.num_layers = m.at("num_layers").get<int>();
    ckpt.config.aggregator = aggregator_from_string(m.at("aggregator").get<std::string>());
    ckpt.config.edge_hidden = m.at("edge_hidden").get<int>();
    ckpt.config.decoder = decoder_from_string(m.at("decoder").get<std::string>());
    ckpt.config.seed = m.at("seed").get<std::uint64_t>();
    ckpt.n_nodes = j.at("n_nodes").get<std::size_t>();
    ckpt.n_edges = j.at("n_edges").get<std::size_t>();
    if (!j.at("scaler").is_null()) {
      const auto& s = j.at("scaler");
      ckpt.scaler = GeoScaler(s.at("lat_min").get<double>(), s.at("lat_max").get<double>(),
                              s.at("lon_min").get<double>(), s.at("lon_max").get<double>());
    }
    ckpt.params = init_params(ckpt.config, ckpt.n_nodes);
    auto slots = param_slots(ckpt.params);
    for (const ParamSlot& s : slots) *s.tensor = tensor_from(j.at("params").at(s.name));
    if (ckpt.params.bn) {
      const auto& b = j.at("bn_state");
      ckpt.params.bn->running_mean = tensor_from(b.at("running_mean"));
      ckpt.params.bn->running_var = tensor_from(b.at("running_var"));
      ckpt.params.bn->momentum = b.at("momentum").get<double>();
      ckpt.params.bn->eps = b.at("eps").get<double>();
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

} // namespace graphgeo
