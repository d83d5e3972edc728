#include "fnd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fnd/error.hpp"

namespace fnd::ad {

namespace {

std::string shape_str(const Node& n) {
  return "[" + std::to_string(n.rows()) + "x" + std::to_string(n.cols()) + "]";
}

void require_same_shape(const Node& a, const Node& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

template <typename F, typename DF>
Node unary(const Node& x, F f, DF df, const char* tag) {
  Matrix out = x.value().unaryExpr(f);
  return Node(std::move(out), {x},
              [x, df](const Matrix& g) {
                x.accumulate(g.cwiseProduct(x.value().unaryExpr(df)));
              },
              tag);
}

}  // namespace

Node constant(Matrix value) { return Node(std::move(value), "const"); }

Node matmul(const Node& a, const Node& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions disagree " + shape_str(a) + " * " + shape_str(b));
  Matrix out = a.value() * b.value();
  return Node(std::move(out), {a, b},
              [a, b](const Matrix& g) {
                a.accumulate(g * b.value().transpose());
                b.accumulate(a.value().transpose() * g);
              },
              "matmul");
}

Node transpose(const Node& x) {
  Matrix out = x.value().transpose();
  return Node(std::move(out), {x},
              [x](const Matrix& g) { x.accumulate(g.transpose()); }, "transpose");
}

Node add(const Node& a, const Node& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) {
    Matrix out = a.value() + b.value();
    return Node(std::move(out), {a, b},
                [a, b](const Matrix& g) {
                  a.accumulate(g);
                  b.accumulate(g);
                },
                "add");
  }
  if (b.rows() == 1 && b.cols() == a.cols()) {
    Matrix out = a.value().rowwise() + b.value().row(0);
    return Node(std::move(out), {a, b},
                [a, b](const Matrix& g) {
                  a.accumulate(g);
                  b.accumulate(g.colwise().sum());
                },
                "add_row");
  }
  throw ShapeError("add: incompatible shapes " + shape_str(a) + " + " + shape_str(b));
}

Node mul(const Node& a, const Node& b) {
  require_same_shape(a, b, "mul");
  Matrix out = a.value().cwiseProduct(b.value());
  return Node(std::move(out), {a, b},
              [a, b](const Matrix& g) {
                a.accumulate(g.cwiseProduct(b.value()));
                b.accumulate(g.cwiseProduct(a.value()));
              },
              "mul");
}

Node mul_constant(const Node& x, const Matrix& c) {
  if (c.rows() != x.rows() || c.cols() != x.cols())
    throw ShapeError("mul_constant: shape mismatch");
  Matrix out = x.value().cwiseProduct(c);
  return Node(std::move(out), {x},
              [x, c](const Matrix& g) { x.accumulate(g.cwiseProduct(c)); },
              "mul_const");
}

Node add_constant(const Node& x, const Matrix& c) {
  if (c.rows() != x.rows() || c.cols() != x.cols())
    throw ShapeError("add_constant: shape mismatch");
  Matrix out = x.value() + c;
  return Node(std::move(out), {x}, [x](const Matrix& g) { x.accumulate(g); },
              "add_const");
}

Node scale(const Node& x, double factor) {
  Matrix out = x.value() * factor;
  return Node(std::move(out), {x},
              [x, factor](const Matrix& g) { x.accumulate(g * factor); }, "scale");
}

Node sigmoid(const Node& x) {
  Matrix out = x.value().unaryExpr([](double v) { return fnd::sigmoid(v); });
  Matrix y = out;
  return Node(std::move(out), {x},
              [x, y](const Matrix& g) {
                x.accumulate(g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
              },
              "sigmoid");
}

Node tanh(const Node& x) {
  Matrix out = x.value().array().tanh().matrix();
  Matrix y = out;
  return Node(std::move(out), {x},
              [x, y](const Matrix& g) {
                x.accumulate(g.cwiseProduct((1.0 - y.array().square()).matrix()));
              },
              "tanh");
}

Node gelu(const Node& x) {
  return unary(
      x, [](double v) { return fnd::gelu(v); },
      [](double v) { return fnd::gelu_derivative(v); }, "gelu");
}

Node relu(const Node& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; }, "relu");
}

Node elementwise(ElementwiseKind kind, std::span<const Node> args) {
  const std::size_t arity =
      (kind == ElementwiseKind::Add || kind == ElementwiseKind::Mul) ? 2 : 1;
  if (args.size() != arity)
    throw ShapeError("elementwise: expected " + std::to_string(arity) + " arguments");
  switch (kind) {
    case ElementwiseKind::Sigmoid: return sigmoid(args[0]);
    case ElementwiseKind::Tanh: return tanh(args[0]);
    case ElementwiseKind::GeluApprox: return gelu(args[0]);
    case ElementwiseKind::Relu: return relu(args[0]);
    case ElementwiseKind::Add: return add(args[0], args[1]);
    case ElementwiseKind::Mul: return mul(args[0], args[1]);
  }
  throw ShapeError("elementwise: unknown kind");
}

Node softmax(const Node& x, int axis) {
  if (axis != 0 && axis != 1) throw ShapeError("softmax: axis must be 0 or 1");
  Matrix out = axis == 1 ? softmax_rows(x.value()) : Matrix(softmax_rows(x.value().transpose()).transpose());
  Matrix y = out;
  return Node(std::move(out), {x},
              [x, y, axis](const Matrix& g) {
                // dx = y * (g - <g, y>) along the normalized axis.
                Matrix gy = g.cwiseProduct(y);
                if (axis == 1) {
                  const Eigen::VectorXd dots = gy.rowwise().sum();
                  x.accumulate(gy - (y.array().colwise() * dots.array()).matrix());
                } else {
                  const RowVector dots = gy.colwise().sum();
                  x.accumulate(gy - (y.array().rowwise() * dots.array()).matrix());
                }
              },
              "softmax");
}

Node layer_norm(const Node& x, const Node& gamma, const Node& beta, double eps) {
  const Eigen::Index n = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != n || beta.rows() != 1 || beta.cols() != n)
    throw ShapeError("layer_norm: gamma/beta must be [1 x " + std::to_string(n) + "]");
  const Eigen::VectorXd mean = x.value().rowwise().mean();
  Matrix centered = x.value().colwise() - mean;
  const Eigen::VectorXd var = centered.array().square().rowwise().mean();
  const Eigen::VectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() +
               beta.value().row(0).array();
  return Node(std::move(out), {x, gamma, beta},
              [x, gamma, beta, xhat, inv_std](const Matrix& g) {
                gamma.accumulate(g.cwiseProduct(xhat).colwise().sum());
                beta.accumulate(g.colwise().sum());
                const Matrix gx = g.array().rowwise() * gamma.value().row(0).array();
                const Eigen::VectorXd mean_gx = gx.rowwise().mean();
                const Eigen::VectorXd mean_gx_xhat = gx.cwiseProduct(xhat).rowwise().mean();
                Matrix dx = gx;
                dx.colwise() -= mean_gx;
                dx -= (xhat.array().colwise() * mean_gx_xhat.array()).matrix();
                dx = dx.array().colwise() * inv_std.array();
                x.accumulate(dx);
              },
              "layer_norm");
}

Node conv1d(const Node& x, const Node& kernels, int kernel_size, int stride) {
  if (kernel_size < 1 || stride < 1) throw ShapeError("conv1d: kernel size and stride must be >= 1");
  const Eigen::Index len = x.rows();
  const Eigen::Index c_in = x.cols();
  const Eigen::Index k = kernel_size;
  if (kernels.rows() != k * c_in)
    throw ShapeError("conv1d: kernel tensor must be [(k*c_in) x c_out], got " + shape_str(kernels));
  if (len < k) throw ShapeError("conv1d: window larger than input");
  const Eigen::Index out_len = (len - k) / stride + 1;

  // im2col: window t occupies row t as the concatenation of its k input rows.
  Matrix patches(out_len, k * c_in);
  for (Eigen::Index t = 0; t < out_len; ++t)
    for (Eigen::Index j = 0; j < k; ++j)
      patches.block(t, j * c_in, 1, c_in) = x.value().row(t * stride + j);
  Matrix out = patches * kernels.value();
  return Node(std::move(out), {x, kernels},
              [x, kernels, patches, k, c_in, stride, out_len](const Matrix& g) {
                kernels.accumulate(patches.transpose() * g);
                const Matrix dpatches = g * kernels.value().transpose();
                Matrix dx = Matrix::Zero(x.rows(), c_in);
                for (Eigen::Index t = 0; t < out_len; ++t)
                  for (Eigen::Index j = 0; j < k; ++j)
                    dx.row(t * stride + j) += dpatches.block(t, j * c_in, 1, c_in);
                x.accumulate(dx);
              },
              "conv1d");
}

Node max_pool1d(const Node& x) {
  if (x.rows() < 1) throw ShapeError("max_pool1d: empty input");
  const Eigen::Index c = x.cols();
  std::vector<Eigen::Index> argmax(static_cast<std::size_t>(c), 0);
  Matrix out(1, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < x.rows(); ++i)
      if (x.value()(i, j) > x.value()(best, j)) best = i;
    argmax[static_cast<std::size_t>(j)] = best;
    out(0, j) = x.value()(best, j);
  }
  return Node(std::move(out), {x},
              [x, argmax](const Matrix& g) {
                Matrix dx = Matrix::Zero(x.rows(), x.cols());
                for (std::size_t j = 0; j < argmax.size(); ++j)
                  dx(argmax[j], static_cast<Eigen::Index>(j)) = g(0, static_cast<Eigen::Index>(j));
                x.accumulate(dx);
              },
              "max_pool1d");
}

Node cross_entropy(const Node& logits, std::span<const int> targets) {
  const Eigen::Index batch = logits.rows();
  if (static_cast<Eigen::Index>(targets.size()) != batch || batch == 0)
    throw ShapeError("cross_entropy: need one target per logits row");
  for (int t : targets)
    if (t < 0 || t >= logits.cols())
      throw ShapeError("cross_entropy: target " + std::to_string(t) + " out of range");
  const Eigen::VectorXd lse = log_sum_exp_rows(logits.value());
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i)
    total += lse(i) - logits.value()(i, targets[static_cast<std::size_t>(i)]);
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(batch);
  std::vector<int> tgt(targets.begin(), targets.end());
  return Node(std::move(out), {logits},
              [logits, tgt, batch](const Matrix& g) {
                Matrix d = softmax_rows(logits.value());
                for (Eigen::Index i = 0; i < batch; ++i) d(i, tgt[static_cast<std::size_t>(i)]) -= 1.0;
                logits.accumulate(d * (g(0, 0) / static_cast<double>(batch)));
              },
              "cross_entropy");
}

Node sum(const Node& x) {
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  return Node(std::move(out), {x},
              [x](const Matrix& g) {
                x.accumulate(Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
              },
              "sum");
}

Node rows(const Node& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.rows()) throw ShapeError("rows: range out of bounds");
  Matrix out = x.value().middleRows(start, count);
  return Node(std::move(out), {x},
              [x, start, count](const Matrix& g) {
                Matrix dx = Matrix::Zero(x.rows(), x.cols());
                dx.middleRows(start, count) = g;
                x.accumulate(dx);
              },
              "rows");
}

Node cols(const Node& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) throw ShapeError("cols: range out of bounds");
  Matrix out = x.value().middleCols(start, count);
  return Node(std::move(out), {x},
              [x, start, count](const Matrix& g) {
                Matrix dx = Matrix::Zero(x.rows(), x.cols());
                dx.middleCols(start, count) = g;
                x.accumulate(dx);
              },
              "cols");
}

Node vconcat(std::span<const Node> parts) {
  if (parts.empty()) throw ShapeError("vconcat: no inputs");
  const Eigen::Index c = parts[0].cols();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.cols() != c) throw ShapeError("vconcat: column counts differ");
    total += p.rows();
  }
  Matrix out(total, c);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Node> ps(parts.begin(), parts.end());
  return Node(std::move(out), ps,
              [ps](const Matrix& g) {
                Eigen::Index r = 0;
                for (auto& p : ps) {
                  p.accumulate(g.middleRows(r, p.rows()));
                  r += p.rows();
                }
              },
              "vconcat");
}

Node hconcat(std::span<const Node> parts) {
  if (parts.empty()) throw ShapeError("hconcat: no inputs");
  const Eigen::Index rws = parts[0].rows();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.rows() != rws) throw ShapeError("hconcat: row counts differ");
    total += p.cols();
  }
  Matrix out(rws, total);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Node> ps(parts.begin(), parts.end());
  return Node(std::move(out), ps,
              [ps](const Matrix& g) {
                Eigen::Index c = 0;
                for (auto& p : ps) {
                  p.accumulate(g.middleCols(c, p.cols()));
                  c += p.cols();
                }
              },
              "hconcat");
}

Node gather_rows(const Node& table, std::span<const TokenId> ids) {
  std::vector<TokenId> idx(ids.begin(), ids.end());
  Matrix out(static_cast<Eigen::Index>(idx.size()), table.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= table.rows())
      throw ShapeError("gather_rows: id " + std::to_string(idx[i]) + " out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(idx[i]);
  }
  return Node(std::move(out), {table},
              [table, idx](const Matrix& g) {
                Matrix& tg = table.mutable_grad();
                for (std::size_t i = 0; i < idx.size(); ++i)
                  tg.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
              },
              "gather_rows");
}

Node pad_rows(const Node& x, Eigen::Index total_rows) {
  if (x.rows() >= total_rows) return x;
  Matrix out = Matrix::Zero(total_rows, x.cols());
  out.topRows(x.rows()) = x.value();
  const Eigen::Index n = x.rows();
  return Node(std::move(out), {x},
              [x, n](const Matrix& g) { x.accumulate(g.topRows(n)); }, "pad_rows");
}

Node dropout(const Node& x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ShapeError("dropout: rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix keep(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < keep.size(); ++i)
    keep.data()[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return mul_constant(x, keep);
}

}  // namespace fnd::ad
