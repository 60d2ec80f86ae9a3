#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "cudi/tensor.hpp"

namespace cudi {

/// Handle to a node on a Graph tape.
struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;
  bool valid() const noexcept { return id != npos; }
};

/// Eager reverse-mode tape. Every op evaluates immediately and, when any input
/// needs a gradient, records a closure that pushes the output adjoint back to
/// its inputs. Nodes are appended in evaluation order, so reverse insertion
/// order is a valid topological order for backward().
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var out, const Tensor<T>& out_grad)>;

  /// With `record` false no backward closures are kept (inference mode).
  explicit Graph(bool record = true) : record_(record) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) noexcept = default;
  Graph& operator=(Graph&&) noexcept = default;

  Var constant(Tensor<T> value) { return push("constant", std::move(value), false, {}); }
  Var parameter(Tensor<T> value) { return push("parameter", std::move(value), record_, {}); }

  const Tensor<T>& value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  std::string_view op_name(Var v) const { return node(v).op; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool recording() const noexcept { return record_; }

  /// Adjoint after backward(); zeros when the node was unreachable from the loss.
  const Tensor<T>& grad(Var v) const;

  /// Scalar value of a single-element node, read back in double.
  double scalar(Var v) const;

  /// Populates adjoints of every node reachable from `loss`. Parameters that
  /// the loss does not depend on get zero adjoints.
  void backward(Var loss);

  /// Used by ops: append a node. `fn` is dropped when no input requires grad.
  Var record(std::string_view op, Tensor<T> value, const std::vector<Var>& inputs, BackwardFn fn);

  /// Used by backward closures: adjoint buffer of `v`, allocated on first use.
  Tensor<T>& grad_buffer(Var v);

 private:
  struct Node {
    std::string op;
    Tensor<T> value;
    mutable Tensor<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(std::string_view op, Tensor<T> value, bool requires_grad, BackwardFn fn);
  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  bool record_ = true;
};

extern template class Graph<float>;
extern template class Graph<double>;

namespace ops {

// Elementwise, shapes must match exactly (no broadcasting).
template <typename T> Var add(Graph<T>& g, Var a, Var b);
template <typename T> Var sub(Graph<T>& g, Var a, Var b);
template <typename T> Var mul(Graph<T>& g, Var a, Var b);
template <typename T> Var scale(Graph<T>& g, Var a, double s);
template <typename T> Var add_scalar(Graph<T>& g, Var a, double s);
template <typename T> Var relu(Graph<T>& g, Var a);
template <typename T> Var tanh(Graph<T>& g, Var a);
template <typename T> Var abs(Graph<T>& g, Var a);
template <typename T> Var square(Graph<T>& g, Var a);

/// x + alpha * x * (1 - x), elementwise.
template <typename T> Var quadratic_curve_step(Graph<T>& g, Var x, Var alpha);

// Full reductions to shape {1}; accumulation is done in double.
template <typename T> Var sum(Graph<T>& g, Var a);
template <typename T> Var mean(Graph<T>& g, Var a);

// NCHW structural ops.
template <typename T> Var concat_channels(Graph<T>& g, const std::vector<Var>& parts);
template <typename T> Var slice_channels(Graph<T>& g, Var a, std::size_t begin, std::size_t end);
template <typename T>
Var crop(Graph<T>& g, Var a, std::size_t y0, std::size_t y1, std::size_t x0, std::size_t x1);
/// Non-overlapping k x k mean pooling; partial edge tiles are dropped.
template <typename T> Var avg_pool(Graph<T>& g, Var a, std::size_t k);
/// (N,C,H,W) -> (N,1,H,W) mean over channels.
template <typename T> Var channel_mean(Graph<T>& g, Var a);
/// (N,C,H,W) -> (N,C,1,1).
template <typename T> Var sum_hw(Graph<T>& g, Var a);
template <typename T> Var mean_hw(Graph<T>& g, Var a);

/// Stride-1 convolution with zero padding k/2 (k odd). Weight is
/// (Cout, Cin/groups, k, k); bias may be an invalid Var.
template <typename T> Var conv2d(Graph<T>& g, Var x, Var weight, Var bias, std::size_t groups);

/// Bilinear resize with half-pixel centers (align_corners off).
template <typename T> Var resize_bilinear(Graph<T>& g, Var x, std::size_t out_h, std::size_t out_w);
/// Output dims = round(input dims * scale); throws ConfigError if either is < 1.
template <typename T> Var resize_bilinear(Graph<T>& g, Var x, double scale);

}  // namespace ops

// Graph-free kernels, shared with the ops above.

/// Input (N,Cin,H,W) or (Cin,H,W); kernel (Cout,Cin/groups,k,k). Output keeps
/// the input rank.
DenseArray conv2d_forward(const DenseArray& input, const DenseArray& kernel, std::size_t groups,
                          const DenseArray* bias = nullptr);

/// Same rank convention as conv2d_forward.
DenseArray bilinear_resize(const DenseArray& input, double scale);
DenseArray bilinear_resize(const DenseArray& input, std::size_t out_h, std::size_t out_w);

std::size_t scaled_dim(std::size_t in, double scale);

}  // namespace cudi
