#pragma once

#include <span>
#include <vector>

#include "fnd/autograd.hpp"
#include "fnd/random.hpp"
#include "fnd/tokenizer.hpp"

// Differentiable operations on 2-D nodes. Each op computes its forward value
// eagerly and registers the local gradient rule on the tape.
namespace fnd::ad {

Node constant(Matrix value);

/// [m x k] * [k x n]. Throws ShapeError on inner-dimension mismatch.
Node matmul(const Node& a, const Node& b);

Node transpose(const Node& x);

/// Elementwise sum of equal shapes, or a [m x n] + [1 x n] row broadcast.
Node add(const Node& a, const Node& b);
/// Hadamard product of equal shapes.
Node mul(const Node& a, const Node& b);
/// x * c for a fixed matrix c of the same shape (no gradient to c).
Node mul_constant(const Node& x, const Matrix& c);
/// x + c for a fixed matrix c of the same shape.
Node add_constant(const Node& x, const Matrix& c);
Node scale(const Node& x, double factor);

Node sigmoid(const Node& x);
Node tanh(const Node& x);
Node gelu(const Node& x);
Node relu(const Node& x);

enum class ElementwiseKind { Sigmoid, Tanh, GeluApprox, Relu, Add, Mul };

/// Dispatcher over the unary and binary elementwise ops.
Node elementwise(ElementwiseKind kind, std::span<const Node> args);

/// axis 1: each row sums to 1; axis 0: each column sums to 1.
Node softmax(const Node& x, int axis = 1);

/// Per-row (x - mean) / sqrt(var + eps) * gamma + beta with population
/// variance. gamma and beta are [1 x width].
Node layer_norm(const Node& x, const Node& gamma, const Node& beta, double eps);

/// Valid 1-D convolution over the rows of x [len x c_in]. The kernel tensor
/// [k x c_in x c_out] is stored flattened as [(k * c_in) x c_out], tap-major.
/// Output is [(len - k) / stride + 1 x c_out].
Node conv1d(const Node& x, const Node& kernels, int kernel_size, int stride = 1);

/// Column-wise max over rows -> [1 x c]. Ties route gradient to the first row.
Node max_pool1d(const Node& x);

/// Mean over the batch of -log softmax(logits)[target], via log-sum-exp.
Node cross_entropy(const Node& logits, std::span<const int> targets);

Node sum(const Node& x);

/// Rows [start, start + count).
Node rows(const Node& x, Eigen::Index start, Eigen::Index count);
/// Columns [start, start + count).
Node cols(const Node& x, Eigen::Index start, Eigen::Index count);
Node vconcat(std::span<const Node> parts);
Node hconcat(std::span<const Node> parts);

/// Embedding lookup: row i of the result is table.row(ids[i]).
Node gather_rows(const Node& table, std::span<const TokenId> ids);

/// Appends zero rows until x has `total_rows` rows (no-op when already long enough).
Node pad_rows(const Node& x, Eigen::Index total_rows);

/// Inverted dropout. Identity when rate == 0.
Node dropout(const Node& x, double rate, Rng& rng);

}  // namespace fnd::ad
