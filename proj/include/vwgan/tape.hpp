#pragma once

#include <functional>
#include <vector>

#include "vwgan/tensor.hpp"

namespace vwgan {

class Tape;

// Handle to a node on a tape. Cheap to copy; only valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

// Reverse-mode tape. Operations append nodes in topological order; backward
// replays the recorded closures in exact reverse order, accumulating into
// per-node gradient buffers. One tape per training context, single-threaded.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = false) {
    return make_node(std::move(value), requires_grad);
  }

  const Tensor& val(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }

  bool requires_grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].requires_grad; }

  const Tensor& grad(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v.id)];
    if (!n.requires_grad) throw ValueError("grad requested for a node without requires_grad");
    return n.grad;
  }

  Tensor& grad_mut(Var v) { return nodes_[static_cast<size_t>(v.id)].grad; }

  // Seeds d(scalar)/d(scalar) = 1 and replays the tape backwards. May be
  // called more than once; contributions accumulate additively.
  void backward(Var scalar) {
    const Node& n = nodes_[static_cast<size_t>(scalar.id)];
    if (n.value.numel() != 1) throw ShapeError("backward requires a scalar output, got shape " +
                                               shape_str(n.value.shape));
    if (!n.requires_grad)
      throw ValueError("backward from a node that does not require grad");
    grad_mut(scalar)[0] += 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
  }

  Var make_node(Tensor value, bool requires_grad) {
    Node n;
    n.requires_grad = requires_grad;
    if (requires_grad) n.grad = Tensor::zeros(value.shape);
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  void record(std::function<void()> backprop) { records_.push_back(std::move(backprop)); }

  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated (zeros) iff requires_grad
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::vector<std::function<void()>> records_;
};

}  // namespace vwgan
