#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mvn/types.hpp"

namespace mvn::ad {

class Tape;

// Handle to a node on a Tape; only valid for the tape that produced it.
struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// A named trainable value. Tape::backward accumulates into `grad`.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter() = default;
  Parameter(std::string n, Mat v)
      : name(std::move(n)), value(std::move(v)), grad(Mat::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

enum class EwOp { add, sub, mul, scale, exp, log };

// Reverse-mode tape over row-major double matrices. Shapes are (rows, cols);
// scalars are 1x1. Nodes only reference earlier nodes, so the graph is acyclic
// by construction. A tape is built and consumed by one logical execution.
class Tape {
 public:
  Var leaf(Mat value);
  Var param(Parameter& p);  // leaf whose gradient is written back to p

  // Elementwise; equal shapes only (scalar variants take a double).
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var exp(Var a);
  Var log(Var a);  // requires strictly positive input

  // Spec-surface dispatchers: tensor-tensor, tensor-scalar and unary forms.
  Var elementwise(EwOp op, Var a, Var b);
  Var elementwise(EwOp op, Var a, double b);
  Var elementwise(EwOp op, Var a);

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var softmax_rows(Var a);
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-6);
  Var gelu(Var a);

  Var slice_cols(Var a, Index start, Index n);
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var add_rowvec(Var a, Var b);  // b is 1 x cols, broadcast over rows

  Var rowwise_cosine(Var a, Var b);  // (n x d, n x d) -> n x 1; rows must be nonzero
  Var sum(Var a);                    // -> 1 x 1
  Var colmean(Var a);                // (n x m) -> 1 x m

  // d-vector cosine similarity as a scalar node (inputs are 1 x d).
  Var cosine_sim(Var a, Var b);

  const Mat& value(Var v) const { return node(v).value; }
  const Mat& grad(Var v) const { return node(v).grad; }
  double scalar(Var v) const;

  // Seeds d(loss)/d(loss) = 1, sweeps the tape in reverse creation order and
  // accumulates into bound Parameters. Loss must be 1x1.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&, const Node&)> backprop;  // reads self.grad, adds to parents
    Parameter* bound = nullptr;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Mat value, std::function<void(Tape&, const Node&)> backprop = nullptr);
  void add_grad(Var v, const Mat& g) { node(v).grad += g; }

  std::vector<Node> nodes_;

  friend struct TapeAccess;
};

// Projection weights for one multi-head attention block, each d x d.
struct MhaWeights {
  Var wq, wk, wv, wo;
};

struct MhaOut {
  Var out;   // nq x d
  Var attn;  // nq x nk, averaged over heads; rows sum to 1
};

// Scaled dot-product attention with `heads` heads: per head h,
// softmax(Q_h K_h^T / sqrt(d/heads)) V_h, heads concatenated, then W_o.
// Output is invariant under any permutation of (K, V) row pairs.
MhaOut multi_head_attention(Tape& t, Var q, Var k, Var v, const MhaWeights& w, int heads);

// Position-wise feed-forward: gelu(x W1 + b1) W2 + b2.
struct FfnWeights {
  Var w1, b1, w2, b2;
};

Var ffn_forward(Tape& t, Var x, const FfnWeights& w);

}  // namespace mvn::ad
