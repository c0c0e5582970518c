#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "graphgeo/adjacency.hpp"
#include "graphgeo/tensor.hpp"

namespace graphgeo {

enum class Aggregator { Mean, Sum, Max };

Aggregator aggregator_from_string(const std::string& s);
std::string to_string(Aggregator a);

// Trainable scale/shift plus running statistics for one normalized width.
// Normalization uses the biased batch variance; running stats are updated
// with the same quantity (see notes in batch_norm()).
struct BatchNormState {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;
  bool training = true;

  explicit BatchNormState(std::size_t dim);
  std::size_t dim() const { return gamma.size(); }
};

using NodeId = std::int32_t;

class Tape;

// Result of a backward pass. wrt() of a node the loss never touched is a
// zero tensor of that node's shape.
class Gradients {
public:
  Tensor wrt(NodeId id) const;

private:
  friend class Tape;
  std::vector<Tensor> grads_;
  std::vector<std::vector<std::size_t>> shapes_;
};

// Define-by-run tape: every operation computes its value immediately and
// records enough to replay exact reverse-mode gradients. A tape is built
// per forward pass and owned by a single training step.
class Tape {
public:
  // Trainable input.
  NodeId leaf(Tensor value);
  // Non-trainable input (features, labels); backward never flows into it.
  NodeId constant(Tensor value);

  // y = x W + b, b broadcast over rows. x: n x a, W: a x b, b: b.
  NodeId affine(NodeId x, NodeId w, NodeId bias);
  NodeId relu(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId select_rows(NodeId x, std::vector<std::int32_t> rows);
  // Mode (train/eval) is taken from state.training at record time; train
  // mode requires at least 2 rows and updates the running statistics.
  NodeId batch_norm(NodeId x, NodeId gamma, NodeId beta, BatchNormState& state);
  // For every node i: aggregate of reshape(edge_w[e], GxG) * h[j] over the
  // (j, e) entries of adj[i]. Nodes without neighbors get a zero row.
  NodeId mp_aggregate(NodeId h, NodeId edge_w, const AdjacencyList& adj, Aggregator agg);
  // Scalar sum of squared differences (sum, not mean).
  NodeId mse_sum(NodeId pred, Tensor target);
  NodeId sum_all(NodeId x);

  const Tensor& value(NodeId id) const;
  double scalar_value(NodeId id) const { return value(id).scalar_value(); }
  std::size_t node_count() const { return nodes_.size(); }

  Gradients backward(NodeId root) const;

  // ReLU kink instrumentation for finite-difference checks.
  double min_abs_relu_input() const;
  std::vector<std::uint8_t> relu_sign_mask() const;

private:
  enum class Op : std::uint8_t {
    Leaf,
    Affine,
    Relu,
    Sigmoid,
    Add,
    ConcatCols,
    SelectRows,
    BatchNorm,
    MpAggregate,
    MseSum,
    SumAll,
  };

  struct Node {
    Op op = Op::Leaf;
    bool needs_grad = false;
    Tensor value;
    std::array<NodeId, 3> in{{-1, -1, -1}};
    std::vector<std::int32_t> rows;     // SelectRows
    const AdjacencyList* adj = nullptr; // MpAggregate
    Aggregator agg = Aggregator::Sum;   // MpAggregate
    std::vector<std::int32_t> argmax;   // MpAggregate(Max)
    Tensor target;                      // MseSum
    Tensor saved_a;                     // BatchNorm: normalized input
    Tensor saved_b;                     // BatchNorm: inverse std per dim
    bool trained_mode = false;          // BatchNorm
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;
  void backward_node(NodeId id, std::vector<Tensor>& grads) const;
  Tensor& grad_slot(std::vector<Tensor>& grads, NodeId id) const;

  std::vector<Node> nodes_;
};

} // namespace graphgeo
