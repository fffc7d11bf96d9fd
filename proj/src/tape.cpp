// SPDX-License-Identifier: Apache-2.0
#include "cookgen/tape.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cookgen/kernels.hpp"

namespace cookgen {

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw error(std::string(op) + ": operands live on different tapes");
  return *a.tape;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw error(msg);
}

// Numerically stable logistic function.
double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::leaf(Matd value) { return record(std::move(value), BackwardFn{}); }

const Matd& Tape::value(Var v) const { return nodes_.at(v.index).value; }

Matd& Tape::grad(Var v) {
  Node& n = nodes_.at(v.index);
  if (!n.grad) n.grad = Matd::Zero(n.value.rows(), n.value.cols());
  return *n.grad;
}

bool Tape::has_grad(Var v) const { return nodes_.at(v.index).grad.has_value(); }

Var Tape::record(Matd value, BackwardFn back) {
  nodes_.push_back(Node{std::move(value), std::nullopt, std::move(back)});
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::accumulate(Var v, const Matd& g) {
  Node& n = nodes_.at(v.index);
  require(g.rows() == n.value.rows() && g.cols() == n.value.cols(),
          "accumulate: gradient shape " + shape_str(g) + " does not match value shape " +
              shape_str(n.value));
  if (!n.grad)
    n.grad = g;
  else
    *n.grad += g;
}

void Tape::backward(Var result) {
  require(result.tape == this, "backward: result is not on this tape");
  require(!swept_, "backward: tape already swept");
  const Node& r = nodes_.at(result.index);
  // Validate before committing the sweep so a rejected call leaves the tape
  // usable.
  require(r.value.rows() == 1 && r.value.cols() == 1,
          "backward: result must be 1x1, got " + shape_str(r.value));
  swept_ = true;
  accumulate(result, Matd::Ones(1, 1));
  // Reverse insertion order; nodes that received no gradient are dead ends.
  for (std::uint32_t i = result.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad && n.back) n.back(*this, Var{this, i});
  }
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  const Matd& av = t.value(a);
  const Matd& bv = t.value(b);
  require(av.cols() == bv.rows(),
          "matmul: inner dimensions differ, " + shape_str(av) + " * " + shape_str(bv));
  return t.record(av * bv, [a, b](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    tp.accumulate(a, g * tp.value(b).transpose());
    tp.accumulate(b, tp.value(a).transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  const Matd& av = t.value(a);
  const Matd& bv = t.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(),
          "add: shapes differ, " + shape_str(av) + " + " + shape_str(bv));
  return t.record(av + bv, [a, b](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var add_rowwise(Var a, Var b) {
  Tape& t = same_tape(a, b, "add_rowwise");
  const Matd& av = t.value(a);
  const Matd& bv = t.value(b);
  require(bv.rows() == 1 && bv.cols() == av.cols(),
          "add_rowwise: expected 1x" + std::to_string(av.cols()) + " row to broadcast over " +
              shape_str(av) + ", got " + shape_str(bv));
  Matd out = av;
  out.rowwise() += bv.row(0);
  return t.record(std::move(out), [a, b](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    tp.accumulate(a, g);
    tp.accumulate(b, g.colwise().sum());
  });
}

Var relu(Var x) {
  Tape& t = *x.tape;
  const Matd& xv = t.value(x);
  return t.record(relu(xv).eval(), [x](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    const Matd& xv2 = tp.value(x);
    tp.accumulate(x, (xv2.array() > 0.0).cast<double>().matrix().cwiseProduct(g));
  });
}

Var row_mean(Var a) {
  Tape& t = *a.tape;
  const Matd& av = t.value(a);
  Matd out = row_mean(av);  // kernels overload; throws on 0 rows
  return t.record(std::move(out), [a](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    const Eigen::Index m = tp.value(a).rows();
    Matd ga(m, g.cols());
    ga.rowwise() = (g.row(0) / static_cast<double>(m)).eval();
    tp.accumulate(a, ga);
  });
}

Var prefix_row_means(Var a) {
  Tape& t = *a.tape;
  const Matd& av = t.value(a);
  Matd out = prefix_row_means(av);
  return t.record(std::move(out), [a](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    // Row i of the input feeds rows i..T-1 of the output with weight 1/(t+1),
    // so its gradient is the suffix sum of g[t] / (t + 1).
    const Eigen::Index rows = g.rows();
    Matd ga(rows, g.cols());
    RowVecd suffix = RowVecd::Zero(g.cols());
    for (Eigen::Index i = rows; i-- > 0;) {
      suffix += g.row(i) / static_cast<double>(i + 1);
      ga.row(i) = suffix;
    }
    tp.accumulate(a, ga);
  });
}

Var elem_pow(Var a, int power) {
  Tape& t = *a.tape;
  const Matd& av = t.value(a);
  Matd out = elem_pow(av, power);  // validates power >= 1
  return t.record(std::move(out), [a, power](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    const Matd& av2 = tp.value(a);
    if (power == 1) {
      tp.accumulate(a, g);
      return;
    }
    Matd d = av2.unaryExpr([power](double v) { return power * ipow(v, power - 1); });
    tp.accumulate(a, d.cwiseProduct(g));
  });
}

Var gather_rows(Var a, const std::vector<int>& rows) {
  Tape& t = *a.tape;
  const Matd& av = t.value(a);
  Matd out(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < av.rows(),
            "gather_rows: index " + std::to_string(rows[i]) + " out of range for " +
                std::to_string(av.rows()) + " rows");
    out.row(static_cast<Eigen::Index>(i)) = av.row(rows[i]);
  }
  return t.record(std::move(out), [a, rows](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    Matd ga = Matd::Zero(tp.value(a).rows(), tp.value(a).cols());
    // Scatter-add in gather order; duplicates accumulate.
    for (std::size_t i = 0; i < rows.size(); ++i)
      ga.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
    tp.accumulate(a, ga);
  });
}

Var gather_cols(Var a, const std::vector<int>& cols) {
  Tape& t = *a.tape;
  const Matd& av = t.value(a);
  Matd out(av.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    require(cols[j] >= 0 && cols[j] < av.cols(),
            "gather_cols: index " + std::to_string(cols[j]) + " out of range for " +
                std::to_string(av.cols()) + " cols");
    out.col(static_cast<Eigen::Index>(j)) = av.col(cols[j]);
  }
  return t.record(std::move(out), [a, cols](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    Matd ga = Matd::Zero(tp.value(a).rows(), tp.value(a).cols());
    for (std::size_t j = 0; j < cols.size(); ++j)
      ga.col(cols[j]) += g.col(static_cast<Eigen::Index>(j));
    tp.accumulate(a, ga);
  });
}

Var sum_all(Var a) {
  Tape& t = *a.tape;
  Matd out(1, 1);
  out(0, 0) = t.value(a).sum();
  return t.record(std::move(out), [a](Tape& tp, Var self) {
    const double g = tp.grad(self)(0, 0);
    tp.accumulate(a, Matd::Constant(tp.value(a).rows(), tp.value(a).cols(), g));
  });
}

Var scale(Var a, double c) {
  Tape& t = *a.tape;
  return t.record(t.value(a) * c, [a, c](Tape& tp, Var self) {
    tp.accumulate(a, tp.grad(self) * c);
  });
}

Var sigmoid(Var x) {
  Tape& t = *x.tape;
  Matd p = t.value(x).unaryExpr(&sigmoid_scalar);
  return t.record(p, [x, p](Tape& tp, Var self) {
    const Matd& g = tp.grad(self);
    tp.accumulate(x, (p.array() * (1.0 - p.array())).matrix().cwiseProduct(g));
  });
}

Var softmax_cross_entropy(Var logits, int target) {
  Tape& t = *logits.tape;
  const Matd& z = t.value(logits);
  require(z.rows() == 1, "softmax_cross_entropy: logits must be a single row, got " + shape_str(z));
  require(target >= 0 && target < z.cols(),
          "softmax_cross_entropy: target " + std::to_string(target) + " out of range for " +
              std::to_string(z.cols()) + " classes");
  const double zmax = z.maxCoeff();
  Matd shifted = z.array() - zmax;
  Matd ex = shifted.array().exp();
  const double denom = ex.sum();
  Matd p = ex / denom;
  Matd loss(1, 1);
  loss(0, 0) = std::log(denom) - shifted(0, target);
  return t.record(std::move(loss), [logits, p, target](Tape& tp, Var self) {
    const double g = tp.grad(self)(0, 0);
    Matd gz = p * g;
    gz(0, target) -= g;
    tp.accumulate(logits, gz);
  });
}

Var softmax_cross_entropy_rows(Var logits, const std::vector<int>& targets) {
  Tape& t = *logits.tape;
  const Matd& z = t.value(logits);
  require(static_cast<Eigen::Index>(targets.size()) == z.rows(),
          "softmax_cross_entropy_rows: " + std::to_string(targets.size()) + " targets for " +
              std::to_string(z.rows()) + " rows");
  require(z.rows() > 0, "softmax_cross_entropy_rows: empty logits");
  const Eigen::Index rows = z.rows();
  Matd p(rows, z.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int target = targets[static_cast<std::size_t>(i)];
    require(target >= 0 && target < z.cols(),
            "softmax_cross_entropy_rows: target " + std::to_string(target) +
                " out of range for " + std::to_string(z.cols()) + " classes");
    const double zmax = z.row(i).maxCoeff();
    RowVecd shifted = z.row(i).array() - zmax;
    RowVecd ex = shifted.array().exp();
    const double denom = ex.sum();
    p.row(i) = ex / denom;
    total += std::log(denom) - shifted(target);
  }
  Matd loss(1, 1);
  loss(0, 0) = total / static_cast<double>(rows);
  return t.record(std::move(loss), [logits, p, targets](Tape& tp, Var self) {
    const double g = tp.grad(self)(0, 0) / static_cast<double>(p.rows());
    Matd gz = p * g;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      gz(i, targets[static_cast<std::size_t>(i)]) -= g;
    tp.accumulate(logits, gz);
  });
}

Var weighted_binary_cross_entropy(Var probs, const Matd& labels, double w0, double w1) {
  Tape& t = *probs.tape;
  const Matd& p = t.value(probs);
  require(p.rows() == labels.rows() && p.cols() == labels.cols(),
          "weighted_binary_cross_entropy: probs " + shape_str(p) + " vs labels " +
              shape_str(labels));
  require(p.size() > 0, "weighted_binary_cross_entropy: empty input");
  constexpr double kEps = 1e-12;
  const double count = static_cast<double>(p.size());
  Matd pc = p.array().min(1.0 - kEps).max(kEps);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double y = labels(i, j);
      require(y == 0.0 || y == 1.0, "weighted_binary_cross_entropy: labels must be 0 or 1");
      total -= w1 * y * std::log(pc(i, j)) + w0 * (1.0 - y) * std::log(1.0 - pc(i, j));
    }
  }
  Matd loss(1, 1);
  loss(0, 0) = total / count;
  return t.record(std::move(loss), [probs, pc, labels, w0, w1, count](Tape& tp, Var self) {
    const double g = tp.grad(self)(0, 0) / count;
    // Derivative through the clamped probability; the clamp itself passes
    // gradient unchanged so saturated units still learn.
    Matd gp = ((-w1 * labels.array() / pc.array()) +
               (w0 * (1.0 - labels.array()) / (1.0 - pc.array())))
                  .matrix() *
              g;
    tp.accumulate(probs, gp);
  });
}

}  // namespace cookgen
