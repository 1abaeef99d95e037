#pragma once

#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "skysweep/core/parameter.hpp"
#include "skysweep/core/tensor.hpp"

namespace skysweep {

template <typename T>
class Tape;

// Handle to a tensor that may be tracked on a tape. node < 0 means the value
// is constant for differentiation purposes.
template <typename T>
struct Var {
  Tensor<T> value;
  int node = -1;
};

// Reverse-mode tape. Ops append one node per executed operation; backward()
// replays them in exact reverse execution order, accumulating gradients
// additively at fan-out points, then flushes gradients of every Parameter
// that was used. A tape is rebuilt per forward pass.
//
// With recording off the tape is inert: ops compute values only and create
// no nodes, so intermediates free as soon as their handles die. That is what
// keeps inference memory flat across the depth-sample count.
template <typename T>
class Tape {
 public:
  using Backprop = std::function<void(Tape&, const Tensor<T>& grad_out)>;

  explicit Tape(bool recording = true) : recording_(recording) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  // Leaf for an input tensor; its gradient is retrievable via grad_of.
  Var<T> input(Tensor<T> v) {
    if (!recording_) return {std::move(v), -1};
    nodes_.push_back(Node{v, Tensor<T>(), nullptr});
    return {std::move(v), static_cast<int>(nodes_.size()) - 1};
  }

  // Leaf for a parameter. Repeated use returns the same node, so gradients
  // from every use site accumulate before being flushed into p.grad.
  Var<T> use(Parameter<T>& p) {
    if (!recording_) return {p.value, -1};
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return {p.value, it->second};
    nodes_.push_back(Node{p.value, Tensor<T>(), nullptr});
    const int id = static_cast<int>(nodes_.size()) - 1;
    param_nodes_.emplace(&p, id);
    params_.emplace_back(&p, id);
    return {p.value, id};
  }

  // Called by ops after computing `value` while recording.
  Var<T> record(Tensor<T> value, Backprop backprop) {
    nodes_.push_back(Node{value, Tensor<T>(), std::move(backprop)});
    return {std::move(value), static_cast<int>(nodes_.size()) - 1};
  }

  // Zero-initialized gradient buffer for a node, created on first touch.
  Tensor<T>& grad_buffer(int node) {
    Node& n = nodes_[static_cast<std::size_t>(node)];
    if (n.grad.empty()) n.grad = Tensor<T>::zeros(n.value.shape());
    return n.grad;
  }

  // Convenience for backprops that produce a whole delta tensor.
  void add_grad(int node, const Tensor<T>& delta) {
    if (node < 0) return;
    Tensor<T>& g = grad_buffer(node);
    T* gp = g.data();
    const T* dp = delta.data();
    for (std::int64_t i = 0; i < g.numel(); ++i) gp[i] += dp[i];
  }

  // Reverse sweep from a taped scalar. Frees each interior node's tensors as
  // soon as its backprop has run; leaf gradients survive until flushed.
  void backward(const Var<T>& loss) {
    if (!recording_ || loss.node < 0 || nodes_.empty()) {
      throw contract_error("Tape::backward: loss is not a recorded value");
    }
    if (loss.value.numel() != 1) {
      throw contract_error("Tape::backward: loss must be scalar, got shape " +
                           loss.value.shape().str());
    }
    grad_buffer(loss.node).fill(T(1));
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.backprop) {
        if (!n.grad.empty()) n.backprop(*this, n.grad);
        n.backprop = nullptr;
        n.grad = Tensor<T>();
        n.value = Tensor<T>();
      }
    }
    for (auto& [p, id] : params_) {
      const Tensor<T>& g = nodes_[static_cast<std::size_t>(id)].grad;
      if (g.empty()) continue;
      T* dst = p->grad.data();
      const T* src = g.data();
      for (std::int64_t i = 0; i < g.numel(); ++i) dst[i] += src[i];
    }
  }

  // Gradient accumulated at a leaf (valid after backward); zeros if the node
  // was unreachable from the loss.
  Tensor<T> grad_of(const Var<T>& v) const {
    if (v.node < 0) throw contract_error("Tape::grad_of: value is not on the tape");
    const Node& n = nodes_[static_cast<std::size_t>(v.node)];
    if (n.grad.empty()) return Tensor<T>::zeros(v.value.shape());
    return n.grad;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    Backprop backprop;
  };

  bool recording_;
  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter<T>*, int>> params_;
  std::unordered_map<const Parameter<T>*, int> param_nodes_;
};

}  // namespace skysweep
