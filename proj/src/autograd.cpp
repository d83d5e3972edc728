#include "fnd/autograd.hpp"

#include <stdexcept>
#include <unordered_set>

#include "fnd/error.hpp"

namespace fnd::ad {

Node::Node(Matrix value, std::string op_tag)
    : Node(std::move(value), {}, nullptr, std::move(op_tag)) {}

Node::Node(Matrix value, std::vector<Node> parents, BackwardFn backward, std::string op_tag)
    : impl_(std::make_shared<Impl>()) {
  impl_->grad = Matrix::Zero(value.rows(), value.cols());
  impl_->value = std::move(value);
  impl_->parents = std::move(parents);
  impl_->backward = std::move(backward);
  impl_->op_tag = std::move(op_tag);
}

void Node::accumulate(const Matrix& g) const {
  if (g.rows() != rows() || g.cols() != cols())
    throw ShapeError("gradient shape mismatch at " + impl_->op_tag);
  impl_->grad += g;
}

double Node::item() const {
  if (rows() != 1 || cols() != 1) throw ShapeError("item() on a non-scalar node");
  return impl_->value(0, 0);
}

void backward(const Node& loss) {
  if (!loss.valid() || loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("backward() requires a scalar loss");

  // Iterative post-order DFS; deep recurrent graphs would overflow a
  // recursive walk.
  std::vector<Node::Impl*> order;
  std::unordered_set<Node::Impl*> visited;
  std::vector<std::pair<Node::Impl*, std::size_t>> stack;
  stack.emplace_back(loss.impl_.get(), 0);
  visited.insert(loss.impl_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node::Impl* parent = node->parents[next++].impl_.get();
      if (visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order)
    if (!node->parents.empty()) node->grad.setZero();
  loss.impl_->grad(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node::Impl* node = *it;
    if (node->backward) node->backward(node->grad);
  }
}

Node ParameterSet::add(std::string name, Matrix value) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, Node(std::move(value), "param:" + name));
  return entries_.back().second;
}

bool ParameterSet::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

Node& ParameterSet::at(std::string_view name) {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("no parameter " + std::string(name));
  return entries_[it->second].second;
}

const Node& ParameterSet::at(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->at(name);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, node] : entries_) n += static_cast<std::size_t>(node.value().size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, node] : entries_) node.zero_grad();
}

}  // namespace fnd::ad
