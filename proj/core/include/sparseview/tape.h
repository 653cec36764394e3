#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparseview/tensor.h"

namespace sparseview {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = std::numeric_limits<std::size_t>::max();
  bool valid() const noexcept { return id != std::numeric_limits<std::size_t>::max(); }
};

enum class Activation { kRelu, kSigmoid, kSoftplus, kExp };

std::string_view activation_name(Activation kind);

// A differentiable primitive. forward() must be a pure function of its
// inputs so that Tape::replay() reproduces outputs bit for bit.
class Op {
 public:
  virtual ~Op() = default;

  virtual std::string_view kind() const = 0;
  virtual NumericArray forward(std::span<const NumericArray* const> inputs) const = 0;
  // Accumulates (+=) vector-Jacobian products into input_grads. An entry is
  // null when that input does not need a gradient.
  virtual void backward(std::span<const NumericArray* const> inputs, const NumericArray& output,
                        const NumericArray& output_grad,
                        std::span<NumericArray* const> input_grads) const = 0;
};

// Eager reverse-mode computation record. Ops are evaluated as they are
// recorded; the record is append-only, so every op's inputs precede it.
// A Tape is single-writer; use one tape per thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  Var constant(NumericArray value);
  // Trainable leaf. The same name may be registered on several tapes (one per
  // ray chunk); gradients are summed by the caller.
  Var parameter(std::string name, NumericArray value);
  Var record(std::unique_ptr<Op> op, std::vector<Var> inputs);

  const NumericArray& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t op_count() const noexcept { return records_.size(); }
  // Op records in record order.
  std::string_view op_kind(std::size_t index) const;
  std::span<const Var> op_inputs(std::size_t index) const;

  // Recomputes every op output from the leaves, in record order.
  void replay();

  // Gradient of a scalar loss with respect to every node. Nodes the loss does
  // not reach hold an empty array.
  std::vector<NumericArray> node_gradients(Var loss) const;

  // Gradient with respect to the parameter leaves, laid out like `params`.
  // Parameters absent from the tape or unreached by the loss get zeros.
  GradientSet backward(Var loss, const ParameterStore& params) const;

 private:
  struct Node {
    NumericArray value;
    std::string parameter_name;
    std::ptrdiff_t producer = -1;
    bool requires_grad = false;
  };
  struct Record {
    std::unique_ptr<Op> op;
    std::vector<Var> inputs;
    Var output;
  };

  void check(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Record> records_;
};

// y = x W^T + b for x of shape [batch, in] (or [in]), W [out, in], b [out].
Var affine(Tape& tape, Var x, Var weight, Var bias);
Var activate(Tape& tape, Var x, Activation kind);
// [B, n] ++ [B, m] -> [B, n + m]
Var concat_columns(Tape& tape, Var left, Var right);
// Elementwise; shapes must match exactly.
Var add(Tape& tape, Var a, Var b);
Var multiply(Tape& tape, Var a, Var b);
// out[r, :] = x[rows[r], :]
Var gather_rows(Tape& tape, Var x, std::vector<std::size_t> rows);
Var sum(Tape& tape, Var x);
// scale * sum_r row_weights[r] * sum_c (prediction[r, c] - target[r, c])^2
Var weighted_squared_error(Tape& tape, Var prediction, NumericArray target,
                           std::vector<double> row_weights, double scale);

// Elementwise activation without recording; shares the tape's numerics.
NumericArray apply_activation(const NumericArray& x, Activation kind);
// Dense y = x W^T + b without recording.
NumericArray forward_affine(const NumericArray& x, const NumericArray& weight,
                            const NumericArray& bias);

}  // namespace sparseview
