#pragma once

// Minimal tape-based reverse-mode automatic differentiation over dense
// double-precision matrices. The op set is exactly what the temporal GCN
// forward pass needs; each op records a closure that scatters the output
// gradient back to its inputs. Backward walks the tape in reverse order.

#include "ddtrack/common.hpp"

#include <functional>
#include <vector>

namespace ddtrack::ad {

using Mat = Eigen::MatrixXd;

class Tape;

/// Lightweight handle to a tape node.
struct Expr {
    Tape* tape = nullptr;
    int idx = -1;
    const Mat& value() const;
    const Mat& grad() const;
    bool valid() const { return tape != nullptr && idx >= 0; }
};

class Tape {
public:
    /// Leaf with gradient tracking (parameters).
    Expr leaf(const Mat& value);
    /// Leaf without gradient (graph operators, features).
    Expr constant(const Mat& value);

    Expr matmul(Expr a, Expr b);
    Expr add(Expr a, Expr b);                    // same shape
    Expr sub(Expr a, Expr b);
    Expr hadamard(Expr a, Expr b);
    Expr affine(Expr a, double alpha, double beta);  // alpha*a + beta elementwise
    Expr add_rowvec(Expr a, Expr bias);          // bias is 1 x cols, broadcast over rows
    Expr transpose(Expr a);
    Expr sigmoid(Expr a);
    Expr tanh(Expr a);
    Expr relu(Expr a);
    /// Select rows by index, in the given order, padding with zero rows up to
    /// pad_to when fewer indices than pad_to are supplied.
    Expr gather_rows(Expr a, const std::vector<int>& rows, int pad_to);
    /// out(i, j) = a(i, j) * s(i, 0); s is a column vector.
    Expr scale_rows(Expr a, Expr s);
    /// Frobenius norm as a 1x1 matrix.
    Expr l2_norm(Expr a);
    /// a / s(0,0) with gradients to both operands.
    Expr div_by_scalar(Expr a, Expr s);
    /// Sum over rows of softmax cross-entropy against integer labels (1x1).
    /// Rows with label < 0 are skipped; class_weights may be empty (all 1).
    Expr softmax_ce_sum(Expr logits, const std::vector<int>& labels,
                        const std::vector<double>& class_weights = {});

    /// Reverse pass from a 1x1 root; accumulates into leaf gradients.
    void backward(Expr root);

    const Mat& value(int idx) const { return nodes_[idx].value; }
    const Mat& grad(int idx) const { return nodes_[idx].grad; }
    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        Mat grad;
        bool needs_grad = false;
        std::function<void(Tape&, const Node&)> backprop;  // may be empty for leaves
    };

    friend struct Expr;
    int push(Mat value, bool needs_grad, std::function<void(Tape&, const Node&)> backprop);
    Mat& grad_ref(int idx) { return nodes_[idx].grad; }

    std::vector<Node> nodes_;
};

}  // namespace ddtrack::ad
