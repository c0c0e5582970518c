#include "graphgeo/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphgeo/errors.hpp"

namespace graphgeo {

Aggregator aggregator_from_string(const std::string& s) {
  if (s == "mean") return Aggregator::Mean;
  if (s == "sum") return Aggregator::Sum;
  if (s == "max") return Aggregator::Max;
  throw ConfigError("unknown aggregator: " + s);
}

std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::Mean: return "mean";
    case Aggregator::Sum: return "sum";
    case Aggregator::Max: return "max";
  }
  throw ConfigError("invalid aggregator value");
}

BatchNormState::BatchNormState(std::size_t dim)
    : gamma(Tensor::full({dim}, 1.0)),
      beta(Tensor::zeros({dim})),
      running_mean(Tensor::zeros({dim})),
      running_var(Tensor::full({dim}, 1.0)) {}

Tensor Gradients::wrt(NodeId id) const {
  std::size_t idx = static_cast<std::size_t>(id);
  if (idx >= shapes_.size()) throw DimensionError("Gradients::wrt: bad node id");
  if (grads_[idx].size() > 0) return grads_[idx];
  return Tensor::zeros(shapes_[idx]);
}

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw DimensionError("Tape: bad node id");
  return nodes_[static_cast<std::size_t>(id)];
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }

NodeId Tape::leaf(Tensor value) {
  if (!value.all_finite()) throw NumericError("leaf: non-finite values");
  Node n;
  n.op = Op::Leaf;
  n.needs_grad = true;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::constant(Tensor value) {
  Node n;
  n.op = Op::Leaf;
  n.needs_grad = false;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::affine(NodeId x, NodeId w, NodeId bias) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(bias);
  if (xv.rank() != 2 || wv.rank() != 2 || bv.rank() != 1)
    throw DimensionError("affine: expected x[n,a], W[a,b], b[b]");
  std::size_t nr = xv.rows(), a = xv.cols(), b = wv.cols();
  if (wv.rows() != a || bv.size() != b)
    throw DimensionError("affine: shape mismatch");
  Tensor out = Tensor::zeros({nr, b});
  const double* xp = xv.data().data();
  const double* wp = wv.data().data();
  double* op = out.data().data();
  for (std::size_t i = 0; i < nr; ++i) {
    double* orow = op + i * b;
    for (std::size_t j = 0; j < b; ++j) orow[j] = bv[j];
    const double* xrow = xp + i * a;
    for (std::size_t k = 0; k < a; ++k) {
      double xik = xrow[k];
      if (xik == 0.0) continue;
      const double* wrow = wp + k * b;
      for (std::size_t j = 0; j < b; ++j) orow[j] += xik * wrow[j];
    }
  }
  Node n;
  n.op = Op::Affine;
  n.needs_grad = node(x).needs_grad || node(w).needs_grad || node(bias).needs_grad;
  n.value = std::move(out);
  n.in = {x, w, bias};
  return push(std::move(n));
}

NodeId Tape::relu(NodeId x) {
  const Tensor& xv = value(x);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i] < 0.0) out[i] = 0.0;
  Node n;
  n.op = Op::Relu;
  n.needs_grad = node(x).needs_grad;
  n.value = std::move(out);
  n.in = {x, -1, -1};
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId x) {
  const Tensor& xv = value(x);
  // Saturated values are nudged to the nearest representable point inside
  // (0,1): the output contract is the open interval for every finite input.
  static const double kHi = std::nextafter(1.0, 0.0);
  static const double kLo = std::nextafter(0.0, 1.0);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = out[i];
    if (v >= 0.0) {
      out[i] = std::min(1.0 / (1.0 + std::exp(-v)), kHi);
    } else {
      double e = std::exp(v);
      out[i] = std::max(e / (1.0 + e), kLo);
    }
  }
  Node n;
  n.op = Op::Sigmoid;
  n.needs_grad = node(x).needs_grad;
  n.value = std::move(out);
  n.in = {x, -1, -1};
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) throw DimensionError("add: shape mismatch");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  Node n;
  n.op = Op::Add;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.value = std::move(out);
  n.in = {a, b, -1};
  return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2 || bv.rank() != 2 || av.rows() != bv.rows())
    throw DimensionError("concat_cols: expected matrices with equal row count");
  std::size_t nr = av.rows(), p = av.cols(), q = bv.cols();
  Tensor out = Tensor::zeros({nr, p + q});
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < p; ++j) out.at(i, j) = av.at(i, j);
    for (std::size_t j = 0; j < q; ++j) out.at(i, p + j) = bv.at(i, j);
  }
  Node n;
  n.op = Op::ConcatCols;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.value = std::move(out);
  n.in = {a, b, -1};
  return push(std::move(n));
}

NodeId Tape::select_rows(NodeId x, std::vector<std::int32_t> rows) {
  const Tensor& xv = value(x);
  if (xv.rank() != 2) throw DimensionError("select_rows: expected a matrix");
  std::size_t nc = xv.cols();
  Tensor out = Tensor::zeros({rows.size(), nc});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::int32_t src = rows[r];
    if (src < 0 || static_cast<std::size_t>(src) >= xv.rows())
      throw DimensionError("select_rows: row index out of range");
    for (std::size_t j = 0; j < nc; ++j)
      out.at(r, j) = xv.at(static_cast<std::size_t>(src), j);
  }
  Node n;
  n.op = Op::SelectRows;
  n.needs_grad = node(x).needs_grad;
  n.value = std::move(out);
  n.in = {x, -1, -1};
  n.rows = std::move(rows);
  return push(std::move(n));
}

NodeId Tape::batch_norm(NodeId x, NodeId gamma, NodeId beta, BatchNormState& state) {
  const Tensor& xv = value(x);
  const Tensor& gv = value(gamma);
  const Tensor& bv = value(beta);
  if (xv.rank() != 2) throw DimensionError("batch_norm: expected a matrix");
  std::size_t nr = xv.rows(), d = xv.cols();
  if (gv.size() != d || bv.size() != d || state.dim() != d)
    throw DimensionError("batch_norm: width mismatch");

  Tensor xhat = Tensor::zeros({nr, d});
  Tensor invstd = Tensor::zeros({d});
  if (state.training) {
    if (nr < 2) throw ValidationError("batch_norm: train mode needs a batch of at least 2 rows");
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < nr; ++i) mean += xv.at(i, j);
      mean /= static_cast<double>(nr);
      double var = 0.0;
      for (std::size_t i = 0; i < nr; ++i) {
        double c = xv.at(i, j) - mean;
        var += c * c;
      }
      var /= static_cast<double>(nr); // biased
      double is = 1.0 / std::sqrt(var + state.eps);
      invstd[j] = is;
      for (std::size_t i = 0; i < nr; ++i) xhat.at(i, j) = (xv.at(i, j) - mean) * is;
      state.running_mean[j] = (1.0 - state.momentum) * state.running_mean[j] + state.momentum * mean;
      state.running_var[j] = (1.0 - state.momentum) * state.running_var[j] + state.momentum * var;
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      double is = 1.0 / std::sqrt(state.running_var[j] + state.eps);
      invstd[j] = is;
      for (std::size_t i = 0; i < nr; ++i)
        xhat.at(i, j) = (xv.at(i, j) - state.running_mean[j]) * is;
    }
  }
  Tensor out = Tensor::zeros({nr, d});
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out.at(i, j) = gv[j] * xhat.at(i, j) + bv[j];

  Node n;
  n.op = Op::BatchNorm;
  n.needs_grad = node(x).needs_grad || node(gamma).needs_grad || node(beta).needs_grad;
  n.value = std::move(out);
  n.in = {x, gamma, beta};
  n.saved_a = std::move(xhat);
  n.saved_b = std::move(invstd);
  n.trained_mode = state.training;
  return push(std::move(n));
}

NodeId Tape::mp_aggregate(NodeId h, NodeId edge_w, const AdjacencyList& adj, Aggregator agg) {
  const Tensor& hv = value(h);
  const Tensor& uv = value(edge_w);
  if (hv.rank() != 2 || uv.rank() != 2)
    throw DimensionError("mp_aggregate: expected matrices");
  std::size_t nn = hv.rows(), g = hv.cols();
  if (uv.cols() != g * g)
    throw DimensionError("mp_aggregate: edge weights must have G*G columns");
  if (adj.size() != nn)
    throw DimensionError("mp_aggregate: adjacency size does not match node count");

  Tensor out = Tensor::zeros({nn, g});
  std::vector<std::int32_t> argmax;
  if (agg == Aggregator::Max) argmax.assign(nn * g, -1);

  std::vector<double> msg(g);
  for (std::size_t i = 0; i < nn; ++i) {
    const auto& nbrs = adj[i];
    double* orow = out.data().data() + i * g;
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
      const NeighborRef& nb = nbrs[s];
      if (nb.node < 0 || static_cast<std::size_t>(nb.node) >= nn ||
          nb.edge < 0 || static_cast<std::size_t>(nb.edge) >= uv.rows())
        throw DimensionError("mp_aggregate: adjacency entry out of range");
      const double* we = uv.data().data() + static_cast<std::size_t>(nb.edge) * g * g;
      const double* hj = hv.data().data() + static_cast<std::size_t>(nb.node) * g;
      for (std::size_t r = 0; r < g; ++r) {
        double acc = 0.0;
        const double* wrow = we + r * g;
        for (std::size_t c = 0; c < g; ++c) acc += wrow[c] * hj[c];
        msg[r] = acc;
      }
      switch (agg) {
        case Aggregator::Sum:
        case Aggregator::Mean:
          for (std::size_t r = 0; r < g; ++r) orow[r] += msg[r];
          break;
        case Aggregator::Max:
          for (std::size_t r = 0; r < g; ++r) {
            if (s == 0 || msg[r] > orow[r]) {
              orow[r] = msg[r];
              argmax[i * g + r] = static_cast<std::int32_t>(s);
            }
          }
          break;
      }
    }
    if (agg == Aggregator::Mean && !nbrs.empty()) {
      double inv = 1.0 / static_cast<double>(nbrs.size());
      for (std::size_t r = 0; r < g; ++r) orow[r] *= inv;
    }
  }

  Node n;
  n.op = Op::MpAggregate;
  n.needs_grad = node(h).needs_grad || node(edge_w).needs_grad;
  n.value = std::move(out);
  n.in = {h, edge_w, -1};
  n.adj = &adj;
  n.agg = agg;
  n.argmax = std::move(argmax);
  return push(std::move(n));
}

NodeId Tape::mse_sum(NodeId pred, Tensor target) {
  const Tensor& pv = value(pred);
  if (!pv.same_shape(target)) throw DimensionError("mse_sum: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    double d = pv[i] - target[i];
    acc += d * d;
  }
  Node n;
  n.op = Op::MseSum;
  n.needs_grad = node(pred).needs_grad;
  n.value = Tensor::scalar(acc);
  n.in = {pred, -1, -1};
  n.target = std::move(target);
  return push(std::move(n));
}

NodeId Tape::sum_all(NodeId x) {
  const Tensor& xv = value(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i];
  Node n;
  n.op = Op::SumAll;
  n.needs_grad = node(x).needs_grad;
  n.value = Tensor::scalar(acc);
  n.in = {x, -1, -1};
  return push(std::move(n));
}

Tensor& Tape::grad_slot(std::vector<Tensor>& grads, NodeId id) const {
  Tensor& g = grads[static_cast<std::size_t>(id)];
  if (g.size() == 0) g = Tensor::zeros(node(id).value.shape());
  return g;
}

Gradients Tape::backward(NodeId root) const {
  const Node& r = node(root);
  if (r.value.size() != 1)
    throw DimensionError("backward: root must be a scalar");

  std::vector<Tensor> grads(nodes_.size());
  grads[static_cast<std::size_t>(root)] = Tensor::from(r.value.shape(), {1.0});

  // Creation order is a topological order; one reverse sweep visits every
  // node exactly once.
  for (NodeId id = root; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.op == Op::Leaf) continue;
    if (grads[static_cast<std::size_t>(id)].size() == 0) continue;
    backward_node(id, grads);
  }

  Gradients out;
  out.grads_ = std::move(grads);
  out.shapes_.reserve(nodes_.size());
  for (const Node& n : nodes_) out.shapes_.push_back(n.value.shape());
  return out;
}

void Tape::backward_node(NodeId id, std::vector<Tensor>& grads) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  const Tensor& g = grads[static_cast<std::size_t>(id)];
  auto wants = [&](NodeId p) { return p >= 0 && node(p).needs_grad; };

  switch (n.op) {
    case Op::Leaf:
      break;

    case Op::Affine: {
      const Tensor& xv = value(n.in[0]);
      const Tensor& wv = value(n.in[1]);
      std::size_t nr = xv.rows(), a = xv.cols(), b = wv.cols();
      if (wants(n.in[0])) {
        Tensor& dx = grad_slot(grads, n.in[0]);
        for (std::size_t i = 0; i < nr; ++i)
          for (std::size_t k = 0; k < a; ++k) {
            double acc = 0.0;
            const double* grow = g.data().data() + i * b;
            const double* wrow = wv.data().data() + k * b;
            for (std::size_t j = 0; j < b; ++j) acc += grow[j] * wrow[j];
            dx[i * a + k] += acc;
          }
      }
      if (wants(n.in[1])) {
        Tensor& dw = grad_slot(grads, n.in[1]);
        for (std::size_t i = 0; i < nr; ++i) {
          const double* grow = g.data().data() + i * b;
          const double* xrow = xv.data().data() + i * a;
          for (std::size_t k = 0; k < a; ++k) {
            double xik = xrow[k];
            if (xik == 0.0) continue;
            double* drow = dw.data().data() + k * b;
            for (std::size_t j = 0; j < b; ++j) drow[j] += xik * grow[j];
          }
        }
      }
      if (wants(n.in[2])) {
        Tensor& db = grad_slot(grads, n.in[2]);
        for (std::size_t i = 0; i < nr; ++i)
          for (std::size_t j = 0; j < b; ++j) db[j] += g[i * b + j];
      }
      break;
    }

    case Op::Relu: {
      if (!wants(n.in[0])) break;
      const Tensor& xv = value(n.in[0]);
      Tensor& dx = grad_slot(grads, n.in[0]);
      // subgradient at 0 is 0
      for (std::size_t i = 0; i < xv.size(); ++i)
        if (xv[i] > 0.0) dx[i] += g[i];
      break;
    }

    case Op::Sigmoid: {
      if (!wants(n.in[0])) break;
      Tensor& dx = grad_slot(grads, n.in[0]);
      for (std::size_t i = 0; i < n.value.size(); ++i) {
        double y = n.value[i];
        dx[i] += g[i] * y * (1.0 - y);
      }
      break;
    }

    case Op::Add: {
      for (int p = 0; p < 2; ++p) {
        if (!wants(n.in[p])) continue;
        Tensor& d = grad_slot(grads, n.in[p]);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
      }
      break;
    }

    case Op::ConcatCols: {
      const Tensor& av = value(n.in[0]);
      std::size_t nr = av.rows(), p = av.cols(), q = n.value.cols() - p;
      if (wants(n.in[0])) {
        Tensor& da = grad_slot(grads, n.in[0]);
        for (std::size_t i = 0; i < nr; ++i)
          for (std::size_t j = 0; j < p; ++j) da.at(i, j) += g.at(i, j);
      }
      if (wants(n.in[1])) {
        Tensor& db = grad_slot(grads, n.in[1]);
        for (std::size_t i = 0; i < nr; ++i)
          for (std::size_t j = 0; j < q; ++j) db.at(i, j) += g.at(i, p + j);
      }
      break;
    }

    case Op::SelectRows: {
      if (!wants(n.in[0])) break;
      Tensor& dx = grad_slot(grads, n.in[0]);
      std::size_t nc = n.value.cols();
      for (std::size_t r = 0; r < n.rows.size(); ++r) {
        std::size_t src = static_cast<std::size_t>(n.rows[r]);
        for (std::size_t j = 0; j < nc; ++j) dx.at(src, j) += g.at(r, j);
      }
      break;
    }

    case Op::BatchNorm: {
      const Tensor& xhat = n.saved_a;
      const Tensor& invstd = n.saved_b;
      const Tensor& gv = value(n.in[1]);
      std::size_t nr = xhat.rows(), d = xhat.cols();
      if (wants(n.in[1])) {
        Tensor& dg = grad_slot(grads, n.in[1]);
        for (std::size_t i = 0; i < nr; ++i)
          for (std::size_t j = 0; j < d; ++j) dg[j] += g.at(i, j) * xhat.at(i, j);
      }
      if (wants(n.in[2])) {
        Tensor& db = grad_slot(grads, n.in[2]);
        for (std::size_t i = 0; i < nr; ++i)
          for (std::size_t j = 0; j < d; ++j) db[j] += g.at(i, j);
      }
      if (wants(n.in[0])) {
        Tensor& dx = grad_slot(grads, n.in[0]);
        if (!n.trained_mode) {
          for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < d; ++j)
              dx.at(i, j) += g.at(i, j) * gv[j] * invstd[j];
        } else {
          double fn = static_cast<double>(nr);
          for (std::size_t j = 0; j < d; ++j) {
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0, sum_xhat = 0.0;
            for (std::size_t i = 0; i < nr; ++i) {
              double dxh = g.at(i, j) * gv[j];
              sum_dxhat += dxh;
              sum_dxhat_xhat += dxh * xhat.at(i, j);
              sum_xhat += xhat.at(i, j);
            }
            double is = invstd[j];
            double dvar = -0.5 * is * is * sum_dxhat_xhat;
            double dmu = -is * sum_dxhat - 2.0 * dvar / (fn * is) * sum_xhat;
            for (std::size_t i = 0; i < nr; ++i) {
              double dxh = g.at(i, j) * gv[j];
              dx.at(i, j) += dxh * is + 2.0 * dvar * xhat.at(i, j) / (fn * is) + dmu / fn;
            }
          }
        }
      }
      break;
    }

    case Op::MpAggregate: {
      const Tensor& hv = value(n.in[0]);
      const Tensor& uv = value(n.in[1]);
      std::size_t nn = hv.rows(), gg = hv.cols();
      bool want_h = wants(n.in[0]);
      bool want_u = wants(n.in[1]);
      if (!want_h && !want_u) break;
      Tensor* dh = want_h ? &grad_slot(grads, n.in[0]) : nullptr;
      Tensor* du = want_u ? &grad_slot(grads, n.in[1]) : nullptr;
      std::vector<double> gm(gg);
      for (std::size_t i = 0; i < nn; ++i) {
        const auto& nbrs = (*n.adj)[i];
        if (nbrs.empty()) continue;
        const double* grow = g.data().data() + i * gg;
        if (n.agg == Aggregator::Max) {
          // route each output coordinate to its argmax message
          for (std::size_t r = 0; r < gg; ++r) {
            std::int32_t s = n.argmax[i * gg + r];
            if (s < 0 || grow[r] == 0.0) continue;
            const NeighborRef& nb = nbrs[static_cast<std::size_t>(s)];
            const double* hj = hv.data().data() + static_cast<std::size_t>(nb.node) * gg;
            const double* we = uv.data().data() + static_cast<std::size_t>(nb.edge) * gg * gg;
            if (du) {
              double* durow = du->data().data() + static_cast<std::size_t>(nb.edge) * gg * gg;
              for (std::size_t c = 0; c < gg; ++c) durow[r * gg + c] += grow[r] * hj[c];
            }
            if (dh) {
              double* dhrow = dh->data().data() + static_cast<std::size_t>(nb.node) * gg;
              for (std::size_t c = 0; c < gg; ++c) dhrow[c] += we[r * gg + c] * grow[r];
            }
          }
        } else {
          double scale = n.agg == Aggregator::Mean ? 1.0 / static_cast<double>(nbrs.size()) : 1.0;
          for (std::size_t r = 0; r < gg; ++r) gm[r] = grow[r] * scale;
          for (const NeighborRef& nb : nbrs) {
            const double* hj = hv.data().data() + static_cast<std::size_t>(nb.node) * gg;
            const double* we = uv.data().data() + static_cast<std::size_t>(nb.edge) * gg * gg;
            if (du) {
              double* dub = du->data().data() + static_cast<std::size_t>(nb.edge) * gg * gg;
              for (std::size_t r = 0; r < gg; ++r) {
                double gr = gm[r];
                if (gr == 0.0) continue;
                double* durow = dub + r * gg;
                for (std::size_t c = 0; c < gg; ++c) durow[c] += gr * hj[c];
              }
            }
            if (dh) {
              double* dhrow = dh->data().data() + static_cast<std::size_t>(nb.node) * gg;
              for (std::size_t r = 0; r < gg; ++r) {
                double gr = gm[r];
                if (gr == 0.0) continue;
                const double* wrow = we + r * gg;
                for (std::size_t c = 0; c < gg; ++c) dhrow[c] += wrow[c] * gr;
              }
            }
          }
        }
      }
      break;
    }

    case Op::MseSum: {
      if (!wants(n.in[0])) break;
      const Tensor& pv = value(n.in[0]);
      Tensor& dp = grad_slot(grads, n.in[0]);
      double gs = g[0];
      for (std::size_t i = 0; i < pv.size(); ++i)
        dp[i] += 2.0 * (pv[i] - n.target[i]) * gs;
      break;
    }

    case Op::SumAll: {
      if (!wants(n.in[0])) break;
      Tensor& dx = grad_slot(grads, n.in[0]);
      double gs = g[0];
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += gs;
      break;
    }
  }
}

double Tape::min_abs_relu_input() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Node& n : nodes_) {
    if (n.op != Op::Relu) continue;
    const Tensor& xv = value(n.in[0]);
    for (std::size_t i = 0; i < xv.size(); ++i)
      m = std::min(m, std::abs(xv[i]));
  }
  return m;
}

std::vector<std::uint8_t> Tape::relu_sign_mask() const {
  std::vector<std::uint8_t> mask;
  for (const Node& n : nodes_) {
    if (n.op != Op::Relu) continue;
    const Tensor& xv = value(n.in[0]);
    for (std::size_t i = 0; i < xv.size(); ++i)
      mask.push_back(xv[i] > 0.0 ? 1 : 0);
  }
  return mask;
}

} // namespace graphgeo
