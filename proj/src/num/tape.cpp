#include "hmg/num/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hmg::num {
namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

std::vector<int> lexicographic_row_order(const Matrix& rows) {
  std::vector<int> order(rows.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (rows(a, c) != rows(b, c)) return rows(a, c) < rows(b, c);
    }
    return a < b;
  });
  return order;
}

Matrix& Tape::grad_of(int id) {
  Node& node = nodes_[id];
  if (!node.grad_ready) {
    node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    node.grad_ready = true;
  }
  return node.grad;
}

int Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

Tape::Value Tape::input(Matrix value) {
  Node node;
  node.kind = OpKind::leaf;
  node.value = std::move(value);
  return {push(std::move(node))};
}

Tape::Value Tape::param(Parameter& parameter) {
  auto it = param_ids_.find(&parameter);
  if (it != param_ids_.end()) return {it->second};
  Node node;
  node.kind = OpKind::leaf;
  node.value = parameter.value;
  node.parameter = &parameter;
  node.pull = [](Tape&, Node& self) {
    if (self.grad_ready) self.parameter->grad += self.grad;
  };
  const int id = push(std::move(node));
  param_ids_.emplace(&parameter, id);
  return {id};
}

Tape::Value Tape::matmul(Value a, Value b) {
  check(cols(a) == rows(b), "matmul: inner dimensions differ");
  Node node;
  node.kind = OpKind::matmul;
  node.inputs = {a.id, b.id};
  node.value = nodes_[a.id].value * nodes_[b.id].value;
  node.pull = [](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    const Matrix& lhs = tape.nodes_[self.inputs[0]].value;
    const Matrix& rhs = tape.nodes_[self.inputs[1]].value;
    tape.grad_of(self.inputs[0]) += self.grad * rhs.transpose();
    tape.grad_of(self.inputs[1]) += lhs.transpose() * self.grad;
  };
  return {push(std::move(node))};
}

Tape::Value Tape::add(Value a, Value b) {
  check(rows(a) == rows(b) && cols(a) == cols(b), "add: shape mismatch");
  Node node;
  node.kind = OpKind::add;
  node.inputs = {a.id, b.id};
  node.value = nodes_[a.id].value + nodes_[b.id].value;
  node.pull = [](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    tape.grad_of(self.inputs[0]) += self.grad;
    tape.grad_of(self.inputs[1]) += self.grad;
  };
  return {push(std::move(node))};
}

Tape::Value Tape::add_bias(Value x, Value bias) {
  check(rows(bias) == 1 && cols(bias) == cols(x), "add_bias: bias must be 1 x d");
  Node node;
  node.kind = OpKind::add_bias;
  node.inputs = {x.id, bias.id};
  node.value = nodes_[x.id].value.rowwise() + nodes_[bias.id].value.row(0);
  node.pull = [](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    tape.grad_of(self.inputs[0]) += self.grad;
    tape.grad_of(self.inputs[1]).row(0) += self.grad.colwise().sum();
  };
  return {push(std::move(node))};
}

Tape::Value Tape::scale(Value x, double factor) {
  Node node;
  node.kind = OpKind::scale;
  node.inputs = {x.id};
  node.value = factor * nodes_[x.id].value;
  node.pull = [factor](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    tape.grad_of(self.inputs[0]) += factor * self.grad;
  };
  return {push(std::move(node))};
}

Tape::Value Tape::relu(Value x) {
  Node node;
  node.kind = OpKind::relu;
  node.inputs = {x.id};
  node.value = nodes_[x.id].value.cwiseMax(0.0);
  node.pull = [](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    const Matrix& in = tape.nodes_[self.inputs[0]].value;
    tape.grad_of(self.inputs[0]) +=
        (in.array() > 0.0).cast<double>().matrix().cwiseProduct(self.grad);
  };
  return {push(std::move(node))};
}

Tape::Value Tape::dropout(Value x, double p, Mode mode, Rng& rng) {
  check(p >= 0.0 && p < 1.0, "dropout: p must be in [0, 1)");
  if (mode == Mode::eval || p == 0.0) return x;
  Node node;
  node.kind = OpKind::dropout;
  node.inputs = {x.id};
  const Matrix& in = nodes_[x.id].value;
  Matrix mask(in.rows(), in.cols());
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
      mask(r, c) = rng.bernoulli(p) ? 0.0 : keep_scale;
    }
  }
  node.value = in.cwiseProduct(mask);
  node.pull = [mask](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    tape.grad_of(self.inputs[0]) += self.grad.cwiseProduct(mask);
  };
  return {push(std::move(node))};
}

Tape::Value Tape::batch_norm(Value x, Value gamma, Value beta,
                             BatchNormState& state, Mode mode) {
  const Eigen::Index d = cols(x);
  check(rows(gamma) == 1 && cols(gamma) == d, "batch_norm: gamma must be 1 x d");
  check(rows(beta) == 1 && cols(beta) == d, "batch_norm: beta must be 1 x d");
  check(state.running_mean.cols() == d, "batch_norm: state width mismatch");

  const Matrix& in = nodes_[x.id].value;
  const Eigen::Index n = in.rows();
  check(n >= 1, "batch_norm: empty batch");

  RowVector mean(d), var(d), inv_std(d);
  std::vector<int> order;
  if (mode == Mode::train) {
    order = lexicographic_row_order(in);
    mean.setZero();
    for (int r : order) mean += in.row(r);
    mean /= static_cast<double>(n);
    var.setZero();
    for (int r : order) {
      var += (in.row(r) - mean).cwiseAbs2();
    }
    var /= static_cast<double>(n);
    state.running_mean =
        (1.0 - state.momentum) * state.running_mean + state.momentum * mean;
    state.running_var =
        (1.0 - state.momentum) * state.running_var + state.momentum * var;
  } else {
    mean = state.running_mean;
    var = state.running_var;
  }
  inv_std = (var.array() + state.eps).rsqrt().matrix();

  Matrix x_hat =
      ((in.rowwise() - mean).array().rowwise() * inv_std.array()).matrix();
  Node node;
  node.kind = OpKind::batch_norm;
  node.inputs = {x.id, gamma.id, beta.id};
  node.value =
      ((x_hat.array().rowwise() * nodes_[gamma.id].value.row(0).array())
           .rowwise() +
       nodes_[beta.id].value.row(0).array())
          .matrix();
  const bool train = mode == Mode::train;
  node.pull = [x_hat = std::move(x_hat), inv_std, order,
               train](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    const Matrix& dy = self.grad;
    const RowVector gamma_row = tape.nodes_[self.inputs[1]].value.row(0);
    const Eigen::Index n_rows = dy.rows();

    RowVector sum_dy = RowVector::Zero(dy.cols());
    RowVector sum_dy_xhat = RowVector::Zero(dy.cols());
    if (train) {
      for (int r : order) {
        sum_dy += dy.row(r);
        sum_dy_xhat += dy.row(r).cwiseProduct(x_hat.row(r));
      }
    } else {
      for (Eigen::Index r = 0; r < n_rows; ++r) {
        sum_dy += dy.row(r);
        sum_dy_xhat += dy.row(r).cwiseProduct(x_hat.row(r));
      }
    }
    tape.grad_of(self.inputs[1]).row(0) += sum_dy_xhat;
    tape.grad_of(self.inputs[2]).row(0) += sum_dy;

    Matrix& dx = tape.grad_of(self.inputs[0]);
    if (train) {
      const double inv_n = 1.0 / static_cast<double>(n_rows);
      // dx = gamma*inv_std/n * (n*dy - sum(dy) - x_hat * sum(dy*x_hat))
      Matrix centered = static_cast<double>(n_rows) * dy;
      centered.rowwise() -= sum_dy;
      centered -= (x_hat.array().rowwise() * sum_dy_xhat.array()).matrix();
      dx += inv_n * (centered.array().rowwise() *
                     (gamma_row.cwiseProduct(inv_std)).array())
                        .matrix();
    } else {
      dx += (dy.array().rowwise() *
             (gamma_row.cwiseProduct(inv_std)).array())
                .matrix();
    }
  };
  return {push(std::move(node))};
}

Tape::Value Tape::segment_sum(Value x, std::vector<SegmentEntry> entries,
                              Eigen::Index out_rows) {
  const Matrix& in = nodes_[x.id].value;
  for (const auto& entry : entries) {
    check(entry.src >= 0 && entry.src < in.rows(), "segment_sum: src out of range");
    check(entry.dst >= 0 && entry.dst < out_rows, "segment_sum: dst out of range");
  }
  // weighted contribution rows, accumulated per segment in value-sorted order
  Matrix contributions(static_cast<Eigen::Index>(entries.size()), in.cols());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    contributions.row(static_cast<Eigen::Index>(i)) =
        entries[i].weight * in.row(entries[i].src);
  }
  std::vector<int> order = lexicographic_row_order(contributions);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return entries[a].dst < entries[b].dst;
  });

  Node node;
  node.kind = OpKind::segment_sum;
  node.inputs = {x.id};
  node.value = Matrix::Zero(out_rows, in.cols());
  for (int i : order) {
    node.value.row(entries[i].dst) += contributions.row(i);
  }
  node.pull = [entries = std::move(entries)](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    Matrix& dx = tape.grad_of(self.inputs[0]);
    for (const auto& entry : entries) {
      dx.row(entry.src) += entry.weight * self.grad.row(entry.dst);
    }
  };
  return {push(std::move(node))};
}

Tape::Value Tape::gather_rows(Value x, std::vector<int> rows_to_take) {
  const Matrix& in = nodes_[x.id].value;
  for (int r : rows_to_take) {
    check(r >= 0 && r < in.rows(), "gather_rows: row out of range");
  }
  Node node;
  node.kind = OpKind::gather_rows;
  node.inputs = {x.id};
  node.value.resize(static_cast<Eigen::Index>(rows_to_take.size()), in.cols());
  for (std::size_t i = 0; i < rows_to_take.size(); ++i) {
    node.value.row(static_cast<Eigen::Index>(i)) = in.row(rows_to_take[i]);
  }
  node.pull = [rows_to_take = std::move(rows_to_take)](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    Matrix& dx = tape.grad_of(self.inputs[0]);
    for (std::size_t i = 0; i < rows_to_take.size(); ++i) {
      dx.row(rows_to_take[i]) += self.grad.row(static_cast<Eigen::Index>(i));
    }
  };
  return {push(std::move(node))};
}

Tape::Value Tape::concat_cols(const std::vector<Value>& parts) {
  check(!parts.empty(), "concat: no inputs");
  const Eigen::Index n = rows(parts.front());
  Eigen::Index total_cols = 0;
  for (Value part : parts) {
    check(rows(part) == n, "concat: row counts differ");
    total_cols += cols(part);
  }
  Node node;
  node.kind = OpKind::concat;
  std::vector<Eigen::Index> widths;
  node.value.resize(n, total_cols);
  Eigen::Index offset = 0;
  for (Value part : parts) {
    node.inputs.push_back(part.id);
    const Matrix& block = nodes_[part.id].value;
    node.value.middleCols(offset, block.cols()) = block;
    widths.push_back(block.cols());
    offset += block.cols();
  }
  node.pull = [widths = std::move(widths)](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      tape.grad_of(self.inputs[i]) += self.grad.middleCols(at, widths[i]);
      at += widths[i];
    }
  };
  return {push(std::move(node))};
}

Tape::Value Tape::softmax_cross_entropy(Value logits, std::vector<int> labels) {
  const Matrix& in = nodes_[logits.id].value;
  check(static_cast<Eigen::Index>(labels.size()) == in.rows(),
        "softmax_ce: one label per row required");
  for (int label : labels) {
    check(label >= 0 && label < in.cols(), "softmax_ce: label out of range");
  }
  const Eigen::Index n = in.rows();
  Matrix probs(n, in.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double m = in.row(r).maxCoeff();
    const auto shifted = (in.row(r).array() - m).exp();
    const double z = shifted.sum();
    probs.row(r) = (shifted / z).matrix();
    total += std::log(z) - (in(r, labels[r]) - m);
  }
  Node node;
  node.kind = OpKind::softmax_ce;
  node.inputs = {logits.id};
  node.value = Matrix::Constant(1, 1, total / static_cast<double>(n));
  node.pull = [probs = std::move(probs),
               labels = std::move(labels)](Tape& tape, Node& self) {
    if (!self.grad_ready) return;
    const double upstream = self.grad(0, 0) / static_cast<double>(probs.rows());
    Matrix& dx = tape.grad_of(self.inputs[0]);
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      dx.row(r) += upstream * probs.row(r);
      dx(r, labels[r]) -= upstream;
    }
  };
  return {push(std::move(node))};
}

void Tape::backward(Value root) {
  check(rows(root) == 1 && cols(root) == 1, "backward: root must be scalar");
  grad_of(root.id)(0, 0) = 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.pull) node.pull(*this, node);
  }
}

}  // namespace hmg::num
