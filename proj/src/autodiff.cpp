#include "ddtrack/autodiff.hpp"

#include <cmath>

namespace ddtrack::ad {

const Mat& Expr::value() const { return tape->value(idx); }
const Mat& Expr::grad() const { return tape->grad(idx); }

int Tape::push(Mat value, bool needs_grad, std::function<void(Tape&, const Node&)> backprop) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Expr Tape::leaf(const Mat& value) { return {this, push(value, true, nullptr)}; }

Expr Tape::constant(const Mat& value) { return {this, push(value, false, nullptr)}; }

namespace {
void check_same_tape(const Expr& a, const Expr& b) {
    if (a.tape != b.tape) throw std::logic_error("autodiff: operands from different tapes");
}
}  // namespace

Expr Tape::matmul(Expr a, Expr b) {
    check_same_tape(a, b);
    if (a.value().cols() != b.value().rows())
        throw std::invalid_argument("autodiff: matmul dimension mismatch");
    Mat out = a.value() * b.value();
    const int ia = a.idx, ib = b.idx;
    return {this, push(std::move(out), true, [ia, ib](Tape& t, const Node& n) {
                t.grad_ref(ia).noalias() += n.grad * t.value(ib).transpose();
                t.grad_ref(ib).noalias() += t.value(ia).transpose() * n.grad;
            })};
}

Expr Tape::add(Expr a, Expr b) {
    check_same_tape(a, b);
    if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
        throw std::invalid_argument("autodiff: add shape mismatch");
    const int ia = a.idx, ib = b.idx;
    return {this, push(a.value() + b.value(), true, [ia, ib](Tape& t, const Node& n) {
                t.grad_ref(ia) += n.grad;
                t.grad_ref(ib) += n.grad;
            })};
}

Expr Tape::sub(Expr a, Expr b) {
    check_same_tape(a, b);
    if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
        throw std::invalid_argument("autodiff: sub shape mismatch");
    const int ia = a.idx, ib = b.idx;
    return {this, push(a.value() - b.value(), true, [ia, ib](Tape& t, const Node& n) {
                t.grad_ref(ia) += n.grad;
                t.grad_ref(ib) -= n.grad;
            })};
}

Expr Tape::hadamard(Expr a, Expr b) {
    check_same_tape(a, b);
    if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
        throw std::invalid_argument("autodiff: hadamard shape mismatch");
    const int ia = a.idx, ib = b.idx;
    return {this, push(a.value().cwiseProduct(b.value()), true, [ia, ib](Tape& t, const Node& n) {
                t.grad_ref(ia) += n.grad.cwiseProduct(t.value(ib));
                t.grad_ref(ib) += n.grad.cwiseProduct(t.value(ia));
            })};
}

Expr Tape::affine(Expr a, double alpha, double beta) {
    const int ia = a.idx;
    Mat out = ((alpha * a.value()).array() + beta).matrix();
    return {this, push(std::move(out), true, [ia, alpha](Tape& t, const Node& n) {
                t.grad_ref(ia) += alpha * n.grad;
            })};
}

Expr Tape::add_rowvec(Expr a, Expr bias) {
    check_same_tape(a, bias);
    if (bias.value().rows() != 1 || bias.value().cols() != a.value().cols())
        throw std::invalid_argument("autodiff: add_rowvec expects 1 x cols bias");
    Mat out = a.value().rowwise() + bias.value().row(0);
    const int ia = a.idx, ib = bias.idx;
    return {this, push(std::move(out), true, [ia, ib](Tape& t, const Node& n) {
                t.grad_ref(ia) += n.grad;
                t.grad_ref(ib).row(0) += n.grad.colwise().sum();
            })};
}

Expr Tape::transpose(Expr a) {
    const int ia = a.idx;
    return {this, push(a.value().transpose(), true, [ia](Tape& t, const Node& n) {
                t.grad_ref(ia) += n.grad.transpose();
            })};
}

Expr Tape::sigmoid(Expr a) {
    Mat out = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    const int ia = a.idx, iout = static_cast<int>(nodes_.size());
    return {this, push(std::move(out), true, [ia, iout](Tape& t, const Node& n) {
                const Mat& y = t.value(iout);
                t.grad_ref(ia) += n.grad.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
            })};
}

Expr Tape::tanh(Expr a) {
    Mat out = a.value().array().tanh();
    const int ia = a.idx, iout = static_cast<int>(nodes_.size());
    return {this, push(std::move(out), true, [ia, iout](Tape& t, const Node& n) {
                const Mat& y = t.value(iout);
                t.grad_ref(ia) += n.grad.cwiseProduct((1.0 - y.array().square()).matrix());
            })};
}

Expr Tape::relu(Expr a) {
    Mat out = a.value().cwiseMax(0.0);
    const int ia = a.idx;
    return {this, push(std::move(out), true, [ia](Tape& t, const Node& n) {
                const Mat mask = (t.value(ia).array() > 0.0).cast<double>();
                t.grad_ref(ia) += n.grad.cwiseProduct(mask);
            })};
}

Expr Tape::gather_rows(Expr a, const std::vector<int>& rows, int pad_to) {
    if (static_cast<int>(rows.size()) > pad_to)
        throw std::invalid_argument("autodiff: gather_rows got more indices than pad_to");
    for (int r : rows)
        if (r < 0 || r >= a.value().rows())
            throw std::out_of_range("autodiff: gather_rows index outside matrix");
    Mat out = Mat::Zero(pad_to, a.value().cols());
    for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<int>(i)) = a.value().row(rows[i]);
    const int ia = a.idx;
    const std::vector<int> idx = rows;
    return {this, push(std::move(out), true, [ia, idx](Tape& t, const Node& n) {
                for (size_t i = 0; i < idx.size(); ++i)
                    t.grad_ref(ia).row(idx[i]) += n.grad.row(static_cast<int>(i));
            })};
}

Expr Tape::scale_rows(Expr a, Expr s) {
    check_same_tape(a, s);
    if (s.value().cols() != 1 || s.value().rows() != a.value().rows())
        throw std::invalid_argument("autodiff: scale_rows expects a rows x 1 scale vector");
    Mat out = (a.value().array().colwise() * s.value().col(0).array()).matrix();
    const int ia = a.idx, is = s.idx;
    return {this, push(std::move(out), true, [ia, is](Tape& t, const Node& n) {
                t.grad_ref(ia) += (n.grad.array().colwise() * t.value(is).col(0).array()).matrix();
                t.grad_ref(is).col(0) += n.grad.cwiseProduct(t.value(ia)).rowwise().sum();
            })};
}

Expr Tape::l2_norm(Expr a) {
    const double nrm = a.value().norm();
    Mat out(1, 1);
    out(0, 0) = nrm;
    const int ia = a.idx;
    return {this, push(std::move(out), true, [ia, nrm](Tape& t, const Node& n) {
                if (nrm > 0.0) t.grad_ref(ia) += (n.grad(0, 0) / nrm) * t.value(ia);
            })};
}

Expr Tape::div_by_scalar(Expr a, Expr s) {
    check_same_tape(a, s);
    if (s.value().rows() != 1 || s.value().cols() != 1)
        throw std::invalid_argument("autodiff: div_by_scalar expects a 1x1 divisor");
    const double sv = s.value()(0, 0);
    if (sv == 0.0) throw std::domain_error("autodiff: division by zero scalar");
    const int ia = a.idx, is = s.idx;
    return {this, push(a.value() / sv, true, [ia, is, sv](Tape& t, const Node& n) {
                t.grad_ref(ia) += n.grad / sv;
                t.grad_ref(is)(0, 0) -= n.grad.cwiseProduct(t.value(ia)).sum() / (sv * sv);
            })};
}

Expr Tape::softmax_ce_sum(Expr logits, const std::vector<int>& labels,
                          const std::vector<double>& class_weights) {
    const Mat& z = logits.value();
    if (static_cast<int>(labels.size()) != z.rows())
        throw std::invalid_argument("autodiff: one label per logits row required");
    const int n_class = static_cast<int>(z.cols());
    for (int y : labels)
        if (y >= n_class) throw std::invalid_argument("autodiff: label outside class range");
    if (!class_weights.empty() && static_cast<int>(class_weights.size()) != n_class)
        throw std::invalid_argument("autodiff: class weight count must equal class count");

    double loss = 0.0;
    Mat soft(z.rows(), z.cols());
    std::vector<double> row_w(labels.size(), 0.0);
    for (int i = 0; i < z.rows(); ++i) {
        const double zmax = z.row(i).maxCoeff();
        const Eigen::RowVectorXd ex = (z.row(i).array() - zmax).exp().matrix();
        const double denom = ex.sum();
        soft.row(i) = ex / denom;
        if (labels[i] < 0) continue;  // unlabeled rows contribute nothing
        const double w = class_weights.empty() ? 1.0 : class_weights[labels[i]];
        row_w[i] = w;
        loss += w * (std::log(denom) + zmax - z(i, labels[i]));
    }
    Mat out(1, 1);
    out(0, 0) = loss;
    const int ia = logits.idx;
    const std::vector<int> lab = labels;
    return {this, push(std::move(out), true, [ia, lab, row_w, soft](Tape& t, const Node& n) {
                const double g = n.grad(0, 0);
                Mat d = soft;
                for (int i = 0; i < d.rows(); ++i) {
                    if (lab[i] < 0) {
                        d.row(i).setZero();
                        continue;
                    }
                    d(i, lab[i]) -= 1.0;
                    d.row(i) *= row_w[i];
                }
                t.grad_ref(ia) += g * d;
            })};
}

void Tape::backward(Expr root) {
    if (root.tape != this) throw std::logic_error("autodiff: backward root from another tape");
    if (root.value().rows() != 1 || root.value().cols() != 1)
        throw std::invalid_argument("autodiff: backward root must be 1x1");
    for (auto& n : nodes_) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    nodes_[root.idx].grad(0, 0) = 1.0;
    for (int i = root.idx; i >= 0; --i) {
        const Node& n = nodes_[i];
        if (n.backprop && n.grad.cwiseAbs().sum() != 0.0) n.backprop(*this, n);
    }
}

}  // namespace ddtrack::ad
