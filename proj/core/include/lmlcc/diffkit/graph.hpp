#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lmlcc/diffkit/tensor.hpp"

namespace lmlcc::diff {

/// One value in the differentiation graph. `grad` has the shape of `value`
/// once backward has touched the node (see ensure_grad).
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  std::vector<std::shared_ptr<Node>> parents;
  /// Vector-Jacobian product: reads this->grad, accumulates into parents.
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;
  std::string label;

  Tensor<T>& ensure_grad() {
    if (grad.size() != value.size() || grad.shape() != value.shape()) grad = Tensor<T>(value.shape());
    return grad;
  }
  void zero_grad() { ensure_grad().fill(T{0}); }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

/// Input or constant: never receives gradient.
template <typename T>
Var<T> constant(Tensor<T> value, std::string label = "const") {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->label = std::move(label);
  return n;
}

/// Trainable leaf.
template <typename T>
Var<T> parameter(Tensor<T> value, std::string label) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->label = std::move(label);
  n->ensure_grad();
  return n;
}

/// Creates the output node of an op. requires_grad is inherited from parents.
template <typename T>
Var<T> make_node(Tensor<T> value, std::vector<Var<T>> parents, std::function<void(Node<T>&)> backward_fn,
                 std::string label) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->label = std::move(label);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

/// Nodes reachable from `root`, parents before children.
template <typename T>
std::vector<Node<T>*> topological_order(const Var<T>& root);

/// Seeds d(root)/d(root) = 1 for a single-element root and propagates to
/// every node that requires grad. Gradients accumulate; zero them between steps.
template <typename T>
void backward(const Var<T>& root);

/// First node (in evaluation order) whose value holds NaN/Inf, or nullptr.
template <typename T>
const Node<T>* first_non_finite(const Var<T>& root);

extern template std::vector<Node<float>*> topological_order(const Var<float>&);
extern template std::vector<Node<double>*> topological_order(const Var<double>&);
extern template void backward(const Var<float>&);
extern template void backward(const Var<double>&);
extern template const Node<float>* first_non_finite(const Var<float>&);
extern template const Node<double>* first_non_finite(const Var<double>&);

}  // namespace lmlcc::diff
