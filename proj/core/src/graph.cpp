#include "lmlcc/diffkit/graph.hpp"

#include <unordered_set>
#include <utility>

namespace lmlcc::diff {

std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

template <typename T>
std::vector<Node<T>*> topological_order(const Var<T>& root) {
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  // Iterative post-order DFS; graphs can be deep enough to matter.
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

template <typename T>
void backward(const Var<T>& root) {
  if (root->value.size() != 1) {
    throw ShapeError("backward requires a single-element root, got " + shape_string(root->value.shape()));
  }
  if (!root->requires_grad) return;
  const auto order = topological_order(root);
  for (Node<T>* n : order) {
    if (n->requires_grad) n->ensure_grad();
  }
  root->grad[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

template <typename T>
const Node<T>* first_non_finite(const Var<T>& root) {
  for (const Node<T>* n : topological_order(root)) {
    if (!n->value.all_finite()) return n;
  }
  return nullptr;
}

template std::vector<Node<float>*> topological_order(const Var<float>&);
template std::vector<Node<double>*> topological_order(const Var<double>&);
template void backward(const Var<float>&);
template void backward(const Var<double>&);
template const Node<float>* first_non_finite(const Var<float>&);
template const Node<double>* first_non_finite(const Var<double>&);

}  // namespace lmlcc::diff
