#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hmg/num/rng.hpp"

namespace hmg::num {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major dense tensor of 64-bit floats (rank <= 2 is all the towers need).
using Matrix = Mat<double>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

/// A trainable tensor with gradient and Adam moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  std::int64_t step_count = 0;

  Parameter() = default;
  Parameter(std::string param_name, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(param_name)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)),
        adam_m(Matrix::Zero(rows, cols)),
        adam_v(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

/// Running statistics owned by a batch-norm layer (updated in train mode).
struct BatchNormState {
  RowVector running_mean;
  RowVector running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  BatchNormState() = default;
  explicit BatchNormState(Eigen::Index features)
      : running_mean(RowVector::Zero(features)),
        running_var(RowVector::Ones(features)) {}
};

enum class Mode { train, eval };

/// One weighted routing entry for segment_sum: out[dst] += weight * x[src].
struct SegmentEntry {
  int src = 0;
  int dst = 0;
  double weight = 1.0;
};

enum class OpKind {
  leaf,
  matmul,
  add,
  add_bias,
  scale,
  relu,
  dropout,
  batch_norm,
  segment_sum,
  gather_rows,
  concat,
  softmax_ce,
};

/// Reverse-mode tape. Build a fresh tape per forward pass; backward visits
/// nodes once in reverse creation order and accumulates into Parameter::grad.
///
/// Cross-row reductions (segment_sum, train-mode batch statistics) accumulate
/// in value-sorted order, which makes forward outputs bit-exactly invariant
/// under input-row permutations.
class Tape {
 public:
  struct Value {
    int id = -1;
  };

  Value input(Matrix value);
  Value param(Parameter& parameter);

  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value add_bias(Value x, Value bias);
  Value scale(Value x, double factor);
  Value relu(Value x);
  Value dropout(Value x, double p, Mode mode, Rng& rng);
  Value batch_norm(Value x, Value gamma, Value beta, BatchNormState& state,
                   Mode mode);
  Value segment_sum(Value x, std::vector<SegmentEntry> entries,
                    Eigen::Index out_rows);
  Value gather_rows(Value x, std::vector<int> rows);
  Value concat_cols(const std::vector<Value>& parts);
  /// Mean cross-entropy of row-wise softmax; returns a 1x1 value.
  Value softmax_cross_entropy(Value logits, std::vector<int> labels);

  const Matrix& value(Value v) const { return nodes_[v.id].value; }
  Eigen::Index rows(Value v) const { return nodes_[v.id].value.rows(); }
  Eigen::Index cols(Value v) const { return nodes_[v.id].value.cols(); }

  /// Seeds d(root)/d(root) = 1 (root must be 1x1) and propagates.
  void backward(Value root);

 private:
  struct Node {
    OpKind kind = OpKind::leaf;
    std::vector<int> inputs;
    Matrix value;
    Matrix grad;
    bool grad_ready = false;
    Parameter* parameter = nullptr;
    std::function<void(Tape&, Node&)> pull;  // backward step
  };

  Matrix& grad_of(int id);
  int push(Node node);

  std::vector<Node> nodes_;
  std::map<const Parameter*, int> param_ids_;
};

/// Indices of input rows sorted lexicographically by row content; equal rows
/// tie-break by index. Shared by the canonical-order reductions.
std::vector<int> lexicographic_row_order(const Matrix& rows);

}  // namespace hmg::num
