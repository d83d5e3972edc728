#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fnd/tensor.hpp"

namespace fnd::ad {

/// Handle to a vertex of the reverse-mode tape.
///
/// A node owns its value and an accumulated gradient of the same shape, plus
/// shared references to its parents and a closure that pushes its gradient
/// into them. Parents never reference children, so the graph is acyclic and
/// released once the last handle to the output goes away.
class Node {
 public:
  using BackwardFn = std::function<void(const Matrix& grad)>;

  Node() = default;

  /// Leaf node (parameter or constant input).
  explicit Node(Matrix value, std::string op_tag = "leaf");

  Node(Matrix value, std::vector<Node> parents, BackwardFn backward, std::string op_tag);

  bool valid() const { return impl_ != nullptr; }
  const Matrix& value() const { return impl_->value; }
  Matrix& mutable_value() { return impl_->value; }
  const Matrix& grad() const { return impl_->grad; }
  Matrix& mutable_grad() const { return impl_->grad; }
  const std::string& op_tag() const { return impl_->op_tag; }
  const std::vector<Node>& parents() const { return impl_->parents; }
  bool is_leaf() const { return impl_->parents.empty(); }

  Eigen::Index rows() const { return impl_->value.rows(); }
  Eigen::Index cols() const { return impl_->value.cols(); }

  /// Adds into this node's gradient; shapes must match.
  void accumulate(const Matrix& g) const;
  void zero_grad() const { impl_->grad.setZero(); }

  /// Scalar value of a 1x1 node.
  double item() const;

  bool same_as(const Node& other) const { return impl_ == other.impl_; }

 private:
  friend void backward(const Node& loss);

  struct Impl {
    Matrix value;
    Matrix grad;
    std::vector<Node> parents;
    BackwardFn backward;
    std::string op_tag;
  };
  std::shared_ptr<Impl> impl_;
};

/// Reverse topological sweep from a 1x1 loss. Interior gradients are reset
/// before the sweep; leaf gradients accumulate across calls.
void backward(const Node& loss);

/// Insertion-ordered map of named trainable leaves.
class ParameterSet {
 public:
  /// Returns a handle to the new leaf. Throws std::invalid_argument if the
  /// name is already taken.
  Node add(std::string name, Matrix value);

  bool contains(std::string_view name) const;
  Node& at(std::string_view name);
  const Node& at(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();

 private:
  std::vector<std::pair<std::string, Node>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace fnd::ad
