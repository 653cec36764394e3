#include "sparseview/tape.h"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace sparseview {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using ConstRowVectorMap = Eigen::Map<const Eigen::RowVectorXd>;

ConstMatrixMap as_matrix(const NumericArray& a) {
  return ConstMatrixMap(a.data(), static_cast<Eigen::Index>(a.rows()),
                        static_cast<Eigen::Index>(a.cols()));
}

MatrixMap as_matrix(NumericArray& a) {
  return MatrixMap(a.data(), static_cast<Eigen::Index>(a.rows()),
                   static_cast<Eigen::Index>(a.cols()));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

class AffineOp final : public Op {
 public:
  std::string_view kind() const override { return "affine"; }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    return forward_affine(*in[0], *in[1], *in[2]);
  }

  void backward(std::span<const NumericArray* const> in, const NumericArray&,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    auto dY = as_matrix(dy);
    if (grads[0]) as_matrix(*grads[0]).noalias() += dY * as_matrix(*in[1]);
    if (grads[1]) as_matrix(*grads[1]).noalias() += dY.transpose() * as_matrix(*in[0]);
    if (grads[2]) {
      auto db = Eigen::Map<Eigen::RowVectorXd>(grads[2]->data(),
                                               static_cast<Eigen::Index>(grads[2]->size()));
      db += dY.colwise().sum();
    }
  }
};

class ActivationOp final : public Op {
 public:
  explicit ActivationOp(Activation kind) : kind_(kind) {}

  std::string_view kind() const override { return activation_name(kind_); }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    return apply_activation(*in[0], kind_);
  }

  void backward(std::span<const NumericArray* const> in, const NumericArray& y,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    if (!grads[0]) return;
    const NumericArray& x = *in[0];
    NumericArray& dx = *grads[0];
    const std::size_t n = x.size();
    switch (kind_) {
      case Activation::kRelu:
        for (std::size_t i = 0; i < n; ++i) dx[i] += x[i] > 0.0 ? dy[i] : 0.0;
        break;
      case Activation::kSigmoid:
        for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
        break;
      case Activation::kSoftplus:
        for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * sigmoid(x[i]);
        break;
      case Activation::kExp:
        for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * y[i];
        break;
    }
  }

 private:
  Activation kind_;
};

class ConcatColumnsOp final : public Op {
 public:
  std::string_view kind() const override { return "concat"; }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    const NumericArray& a = *in[0];
    const NumericArray& b = *in[1];
    const std::size_t rows = a.rows();
    const std::size_t ca = a.cols(), cb = b.cols();
    NumericArray out({rows, ca + cb});
    for (std::size_t r = 0; r < rows; ++r) {
      double* dst = out.data() + r * (ca + cb);
      const double* pa = a.data() + r * ca;
      const double* pb = b.data() + r * cb;
      std::copy(pa, pa + ca, dst);
      std::copy(pb, pb + cb, dst + ca);
    }
    return out;
  }

  void backward(std::span<const NumericArray* const> in, const NumericArray&,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    const std::size_t rows = in[0]->rows();
    const std::size_t ca = in[0]->cols(), cb = in[1]->cols();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* src = dy.data() + r * (ca + cb);
      if (grads[0]) {
        double* d = grads[0]->data() + r * ca;
        for (std::size_t c = 0; c < ca; ++c) d[c] += src[c];
      }
      if (grads[1]) {
        double* d = grads[1]->data() + r * cb;
        for (std::size_t c = 0; c < cb; ++c) d[c] += src[ca + c];
      }
    }
  }
};

class AddOp final : public Op {
 public:
  std::string_view kind() const override { return "add"; }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    NumericArray out = *in[0];
    const NumericArray& b = *in[1];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
  }

  void backward(std::span<const NumericArray* const>, const NumericArray&,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    for (NumericArray* g : grads) {
      if (!g) continue;
      for (std::size_t i = 0; i < dy.size(); ++i) (*g)[i] += dy[i];
    }
  }
};

class MultiplyOp final : public Op {
 public:
  std::string_view kind() const override { return "multiply"; }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    NumericArray out = *in[0];
    const NumericArray& b = *in[1];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
  }

  void backward(std::span<const NumericArray* const> in, const NumericArray&,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    if (grads[0]) {
      for (std::size_t i = 0; i < dy.size(); ++i) (*grads[0])[i] += dy[i] * (*in[1])[i];
    }
    if (grads[1]) {
      for (std::size_t i = 0; i < dy.size(); ++i) (*grads[1])[i] += dy[i] * (*in[0])[i];
    }
  }
};

class GatherRowsOp final : public Op {
 public:
  explicit GatherRowsOp(std::vector<std::size_t> rows) : rows_(std::move(rows)) {}

  std::string_view kind() const override { return "gather"; }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    const NumericArray& x = *in[0];
    const std::size_t cols = x.cols();
    NumericArray out({rows_.size(), cols});
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const double* src = x.data() + rows_[r] * cols;
      std::copy(src, src + cols, out.data() + r * cols);
    }
    return out;
  }

  void backward(std::span<const NumericArray* const> in, const NumericArray&,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    if (!grads[0]) return;
    const std::size_t cols = in[0]->cols();
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      double* dst = grads[0]->data() + rows_[r] * cols;
      const double* src = dy.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
  }

 private:
  std::vector<std::size_t> rows_;
};

class SumOp final : public Op {
 public:
  std::string_view kind() const override { return "sum"; }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    double total = 0.0;
    for (double v : in[0]->values()) total += v;
    return NumericArray::scalar(total);
  }

  void backward(std::span<const NumericArray* const>, const NumericArray&,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    if (!grads[0]) return;
    for (double& g : grads[0]->values()) g += dy[0];
  }
};

class WeightedSquaredErrorOp final : public Op {
 public:
  WeightedSquaredErrorOp(NumericArray target, std::vector<double> row_weights, double scale)
      : target_(std::move(target)), row_weights_(std::move(row_weights)), scale_(scale) {}

  std::string_view kind() const override { return "weighted_squared_error"; }

  NumericArray forward(std::span<const NumericArray* const> in) const override {
    const NumericArray& p = *in[0];
    const std::size_t cols = p.cols();
    double total = 0.0;
    for (std::size_t r = 0; r < row_weights_.size(); ++r) {
      if (row_weights_[r] == 0.0) continue;
      double row = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = p(r, c) - target_(r, c);
        row += d * d;
      }
      total += row_weights_[r] * row;
    }
    return NumericArray::scalar(scale_ * total);
  }

  void backward(std::span<const NumericArray* const> in, const NumericArray&,
                const NumericArray& dy, std::span<NumericArray* const> grads) const override {
    if (!grads[0]) return;
    const NumericArray& p = *in[0];
    const std::size_t cols = p.cols();
    for (std::size_t r = 0; r < row_weights_.size(); ++r) {
      if (row_weights_[r] == 0.0) continue;
      const double k = 2.0 * scale_ * row_weights_[r] * dy[0];
      for (std::size_t c = 0; c < cols; ++c) {
        (*grads[0])(r, c) += k * (p(r, c) - target_(r, c));
      }
    }
  }

 private:
  NumericArray target_;
  std::vector<double> row_weights_;
  double scale_;
};

std::string dims(const NumericArray& a) { return a.shape_string(); }

}  // namespace

std::string_view activation_name(Activation kind) {
  switch (kind) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kSoftplus:
      return "softplus";
    case Activation::kExp:
      return "exp";
  }
  return "unknown";
}

NumericArray apply_activation(const NumericArray& x, Activation kind) {
  NumericArray y = x;
  switch (kind) {
    case Activation::kRelu:
      for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::kSigmoid:
      for (double& v : y.values()) v = sigmoid(v);
      break;
    case Activation::kSoftplus:
      for (double& v : y.values()) v = softplus(v);
      break;
    case Activation::kExp:
      for (double& v : y.values()) v = std::exp(v);
      break;
  }
  return y;
}

NumericArray forward_affine(const NumericArray& x, const NumericArray& weight,
                            const NumericArray& bias) {
  if (weight.rank() != 2 || bias.rank() != 1 || (x.rank() != 1 && x.rank() != 2)) {
    throw std::invalid_argument("affine: expected x rank 1 or 2, W rank 2, b rank 1; got x" +
                                dims(x) + " W" + dims(weight) + " b" + dims(bias));
  }
  const std::size_t out_dim = weight.dim(0), in_dim = weight.dim(1);
  if (x.cols() != in_dim || bias.dim(0) != out_dim) {
    throw std::invalid_argument("affine: dimension mismatch, x" + dims(x) + " W" + dims(weight) +
                                " b" + dims(bias));
  }
  NumericArray y = x.rank() == 1 ? NumericArray({out_dim}) : NumericArray({x.rows(), out_dim});
  auto Y = as_matrix(y);
  Y.noalias() = as_matrix(x) * as_matrix(weight).transpose();
  Y.rowwise() += ConstRowVectorMap(bias.data(), static_cast<Eigen::Index>(out_dim));
  return y;
}

Var Tape::constant(NumericArray value) {
  nodes_.push_back(Node{std::move(value), {}, -1, false});
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(std::string name, NumericArray value) {
  if (name.empty()) throw std::invalid_argument("parameter name must not be empty");
  nodes_.push_back(Node{std::move(value), std::move(name), -1, true});
  return Var{nodes_.size() - 1};
}

void Tape::check(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw std::out_of_range("Var does not belong to this tape");
  }
}

Var Tape::record(std::unique_ptr<Op> op, std::vector<Var> inputs) {
  std::vector<const NumericArray*> in;
  in.reserve(inputs.size());
  bool needs_grad = false;
  for (Var v : inputs) {
    check(v);
    in.push_back(&nodes_[v.id].value);
    needs_grad = needs_grad || nodes_[v.id].requires_grad;
  }
  NumericArray out = op->forward(in);
  nodes_.push_back(Node{std::move(out), {}, static_cast<std::ptrdiff_t>(records_.size()),
                        needs_grad});
  Var result{nodes_.size() - 1};
  records_.push_back(Record{std::move(op), std::move(inputs), result});
  return result;
}

const NumericArray& Tape::value(Var v) const {
  check(v);
  return nodes_[v.id].value;
}

bool Tape::requires_grad(Var v) const {
  check(v);
  return nodes_[v.id].requires_grad;
}

std::string_view Tape::op_kind(std::size_t index) const { return records_.at(index).op->kind(); }

std::span<const Var> Tape::op_inputs(std::size_t index) const { return records_.at(index).inputs; }

void Tape::replay() {
  std::vector<const NumericArray*> in;
  for (Record& rec : records_) {
    in.clear();
    for (Var v : rec.inputs) in.push_back(&nodes_[v.id].value);
    nodes_[rec.output.id].value = rec.op->forward(in);
  }
}

std::vector<NumericArray> Tape::node_gradients(Var loss) const {
  check(loss);
  if (nodes_[loss.id].value.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                nodes_[loss.id].value.shape_string());
  }
  std::vector<NumericArray> grads(nodes_.size());
  grads[loss.id] = NumericArray(nodes_[loss.id].value.shape(), 1.0);

  std::vector<const NumericArray*> in;
  std::vector<NumericArray*> in_grads;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    const Record& rec = *it;
    const NumericArray& dy = grads[rec.output.id];
    if (dy.size() == 0 && nodes_[rec.output.id].value.size() != 0) continue;
    in.clear();
    in_grads.clear();
    bool any = false;
    for (Var v : rec.inputs) {
      in.push_back(&nodes_[v.id].value);
      if (nodes_[v.id].requires_grad) {
        if (grads[v.id].size() == 0) grads[v.id] = NumericArray(nodes_[v.id].value.shape(), 0.0);
        in_grads.push_back(&grads[v.id]);
        any = true;
      } else {
        in_grads.push_back(nullptr);
      }
    }
    if (any) rec.op->backward(in, nodes_[rec.output.id].value, dy, in_grads);
  }
  return grads;
}

GradientSet Tape::backward(Var loss, const ParameterStore& params) const {
  std::vector<NumericArray> grads = node_gradients(loss);
  GradientSet out = params.zeros_like();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    if (node.parameter_name.empty()) continue;
    if (!params.contains(node.parameter_name)) {
      throw std::invalid_argument("backward: tape parameter '" + node.parameter_name +
                                  "' is not in the parameter store");
    }
    if (grads[i].size() == 0) continue;
    NumericArray& dst = out.at(node.parameter_name);
    if (!dst.same_shape(grads[i])) {
      throw std::invalid_argument("backward: shape mismatch for '" + node.parameter_name + "'");
    }
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += grads[i][k];
  }
  return out;
}

Var affine(Tape& tape, Var x, Var weight, Var bias) {
  // Validate eagerly so the error names the offending shapes.
  (void)forward_affine(NumericArray(tape.value(x).shape()), NumericArray(tape.value(weight).shape()),
                       NumericArray(tape.value(bias).shape()));
  return tape.record(std::make_unique<AffineOp>(), {x, weight, bias});
}

Var activate(Tape& tape, Var x, Activation kind) {
  return tape.record(std::make_unique<ActivationOp>(kind), {x});
}

Var concat_columns(Tape& tape, Var left, Var right) {
  const NumericArray& a = tape.value(left);
  const NumericArray& b = tape.value(right);
  if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows()) {
    throw std::invalid_argument("concat_columns: incompatible shapes " + dims(a) + " and " +
                                dims(b));
  }
  return tape.record(std::make_unique<ConcatColumnsOp>(), {left, right});
}

Var add(Tape& tape, Var a, Var b) {
  if (!tape.value(a).same_shape(tape.value(b))) {
    throw std::invalid_argument("add: shape mismatch " + dims(tape.value(a)) + " vs " +
                                dims(tape.value(b)));
  }
  return tape.record(std::make_unique<AddOp>(), {a, b});
}

Var multiply(Tape& tape, Var a, Var b) {
  if (!tape.value(a).same_shape(tape.value(b))) {
    throw std::invalid_argument("multiply: shape mismatch " + dims(tape.value(a)) + " vs " +
                                dims(tape.value(b)));
  }
  return tape.record(std::make_unique<MultiplyOp>(), {a, b});
}

Var gather_rows(Tape& tape, Var x, std::vector<std::size_t> rows) {
  const NumericArray& v = tape.value(x);
  if (v.rank() != 2) throw std::invalid_argument("gather_rows: expected rank 2, got " + dims(v));
  for (std::size_t r : rows) {
    if (r >= v.rows()) {
      throw std::out_of_range("gather_rows: row " + std::to_string(r) + " outside " + dims(v));
    }
  }
  return tape.record(std::make_unique<GatherRowsOp>(std::move(rows)), {x});
}

Var sum(Tape& tape, Var x) { return tape.record(std::make_unique<SumOp>(), {x}); }

Var weighted_squared_error(Tape& tape, Var prediction, NumericArray target,
                           std::vector<double> row_weights, double scale) {
  const NumericArray& p = tape.value(prediction);
  if (p.rank() != 2 || !p.same_shape(target) || row_weights.size() != p.rows()) {
    throw std::invalid_argument("weighted_squared_error: prediction " + dims(p) + ", target " +
                                dims(target) + ", " + std::to_string(row_weights.size()) +
                                " row weights");
  }
  return tape.record(
      std::make_unique<WeightedSquaredErrorOp>(std::move(target), std::move(row_weights), scale),
      {prediction});
}

}  // namespace sparseview
