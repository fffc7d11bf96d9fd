// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cookgen/types.hpp"

namespace cookgen {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid for the tape's lifetime.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t index = 0;
};

// Reverse-mode differentiation tape. Operations append nodes in execution
// order; backward() replays the recorded closures in exactly the reverse of
// insertion order, so gradient accumulation order is fixed and results are
// reproducible bit for bit.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matd value);

  const Matd& value(Var v) const;

  // Gradient of the node, materializing zeros on first access.
  Matd& grad(Var v);
  bool has_grad(Var v) const;

  // Seed the (1x1) result with gradient one and sweep the tape backwards.
  // A tape supports a single backward pass.
  void backward(Var result);

  // Append a node. The closure receives this tape and the node's own handle
  // and must route grad(self) to the node's inputs via accumulate().
  using BackwardFn = std::function<void(Tape&, Var self)>;
  Var record(Matd value, BackwardFn back);

  void accumulate(Var v, const Matd& g);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matd value;
    std::optional<Matd> grad;
    BackwardFn back;
  };
  std::vector<Node> nodes_;
  bool swept_ = false;
};

// Tape operations. Each checks shapes up front and reports offending
// dimensions in the error message.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
// m x n plus a 1 x n row broadcast over every row.
Var add_rowwise(Var a, Var b);
Var relu(Var x);
Var row_mean(Var a);
Var prefix_row_means(Var a);
Var elem_pow(Var a, int power);
// Select rows by index; duplicate indices accumulate gradient additively.
Var gather_rows(Var a, const std::vector<int>& rows);
Var gather_cols(Var a, const std::vector<int>& cols);
Var sum_all(Var a);
Var scale(Var a, double c);
Var sigmoid(Var x);

// Cross-entropy of a 1 x n logit row against a target index, computed with
// max-subtracted softmax. Returns a 1 x 1 loss.
Var softmax_cross_entropy(Var logits, int target);
// Mean over rows of per-row softmax cross-entropy against targets[t].
Var softmax_cross_entropy_rows(Var logits, const std::vector<int>& targets);

// Mean over elements of -[w1*y*ln(p) + w0*(1-y)*ln(1-p)] with p clamped to
// [1e-12, 1 - 1e-12]. labels entries must be 0 or 1.
Var weighted_binary_cross_entropy(Var probs, const Matd& labels, double w0, double w1);

}  // namespace cookgen
