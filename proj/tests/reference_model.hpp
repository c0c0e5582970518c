#pragma once

// Test-only oracle: the whole model forward recomputed with plain nested
// loops, no tape. Kept deliberately independent of the library's autograd
// path so the two implementations can check each other.

#include <cmath>
#include <vector>

#include "graphgeo/graph.hpp"
#include "graphgeo/model.hpp"

namespace refmodel {

using graphgeo::AttributedGraph;
using graphgeo::ModelConfig;
using graphgeo::ModelParams;
using graphgeo::RunMode;
using graphgeo::Tensor;

inline std::vector<std::vector<double>> ref_forward(const AttributedGraph& graph,
                                                    const ModelParams& params,
                                                    const ModelConfig& cfg, RunMode mode) {
  const std::size_t n = graph.n_nodes();
  const std::size_t n_edges = graph.edge_features.rows();
  const std::size_t g = static_cast<std::size_t>(cfg.embed_dim);
  const std::size_t half = g / 2;
  const std::size_t k = static_cast<std::size_t>(cfg.edge_dim);
  const std::size_t eh = static_cast<std::size_t>(cfg.effective_edge_hidden());

  std::vector<std::vector<double>> h(n, std::vector<double>(g, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < half; ++j) h[i][j] = params.node_id_embed.at(i, j);
    for (std::size_t j = 0; j < half; ++j) {
      double acc = params.attr_bias[j];
      for (std::size_t f = 0; f < 15; ++f)
        acc += graph.node_features.at(i, f) * params.attr_weight.at(f, j);
      h[i][half + j] = acc;
    }
  }

  std::vector<std::vector<double>> e_emb(n_edges, std::vector<double>(k, 0.0));
  for (std::size_t e = 0; e < n_edges; ++e)
    for (std::size_t j = 0; j < k; ++j) {
      double acc = params.edge_proj_bias[j];
      for (std::size_t f = 0; f < 11; ++f)
        acc += graph.edge_features.at(e, f) * params.edge_proj_weight.at(f, j);
      e_emb[e][j] = acc;
    }

  for (int layer = 0; layer < cfg.num_layers; ++layer) {
    const auto& lp = params.layers[static_cast<std::size_t>(layer)];
    std::vector<std::vector<double>> w_edge(n_edges, std::vector<double>(g * g, 0.0));
    for (std::size_t e = 0; e < n_edges; ++e) {
      std::vector<double> hidden(eh, 0.0);
      for (std::size_t j = 0; j < eh; ++j) {
        double acc = lp.b1[j];
        for (std::size_t f = 0; f < k; ++f) acc += e_emb[e][f] * lp.w1.at(f, j);
        hidden[j] = acc > 0.0 ? acc : 0.0;
      }
      for (std::size_t j = 0; j < g * g; ++j) {
        double acc = lp.b2[j];
        for (std::size_t f = 0; f < eh; ++f) acc += hidden[f] * lp.w2.at(f, j);
        w_edge[e][j] = acc;
      }
    }
    std::vector<std::vector<double>> next(n, std::vector<double>(g, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> agg(g, 0.0);
      const auto& nbrs = graph.adjacency[i];
      for (std::size_t s = 0; s < nbrs.size(); ++s) {
        std::vector<double> msg(g, 0.0);
        const auto& we = w_edge[static_cast<std::size_t>(nbrs[s].edge)];
        const auto& hj = h[static_cast<std::size_t>(nbrs[s].node)];
        for (std::size_t r = 0; r < g; ++r)
          for (std::size_t c = 0; c < g; ++c) msg[r] += we[r * g + c] * hj[c];
        switch (cfg.aggregator) {
          case graphgeo::Aggregator::Sum:
          case graphgeo::Aggregator::Mean:
            for (std::size_t r = 0; r < g; ++r) agg[r] += msg[r];
            break;
          case graphgeo::Aggregator::Max:
            for (std::size_t r = 0; r < g; ++r)
              if (s == 0 || msg[r] > agg[r]) agg[r] = msg[r];
            break;
        }
      }
      if (cfg.aggregator == graphgeo::Aggregator::Mean && !nbrs.empty())
        for (std::size_t r = 0; r < g; ++r) agg[r] /= static_cast<double>(nbrs.size());
      for (std::size_t r = 0; r < g; ++r) {
        double v = h[i][r] + agg[r];
        next[i][r] = v > 0.0 ? v : 0.0;
      }
    }
    h = std::move(next);
  }

  std::vector<std::vector<double>> hid(n, std::vector<double>(g, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < g; ++j) {
      double acc = params.hid_bias[j];
      for (std::size_t f = 0; f < g; ++f) acc += h[i][f] * params.hid_weight.at(f, j);
      hid[i][j] = acc > 0.0 ? acc : 0.0;
    }

  if (graphgeo::decoder_has_bn(cfg.decoder)) {
    const auto& bn = *params.bn;
    for (std::size_t j = 0; j < g; ++j) {
      double mean, var;
      if (mode == RunMode::Train) {
        mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += hid[i][j];
        mean /= static_cast<double>(n);
        var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (hid[i][j] - mean) * (hid[i][j] - mean);
        var /= static_cast<double>(n);
      } else {
        mean = bn.running_mean[j];
        var = bn.running_var[j];
      }
      double inv = 1.0 / std::sqrt(var + bn.eps);
      for (std::size_t i = 0; i < n; ++i)
        hid[i][j] = bn.gamma[j] * (hid[i][j] - mean) * inv + bn.beta[j];
    }
  }

  std::vector<std::vector<double>> out(n, std::vector<double>(2, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double acc = params.out_bias[j];
      for (std::size_t f = 0; f < g; ++f) acc += hid[i][f] * params.out_weight.at(f, j);
      if (graphgeo::decoder_has_sigmoid(cfg.decoder))
        acc = acc >= 0.0 ? 1.0 / (1.0 + std::exp(-acc)) : std::exp(acc) / (1.0 + std::exp(acc));
      out[i][j] = acc;
    }
  return out;
}

} // namespace refmodel
