#include <doctest.h>

#include "ddtrack/autodiff.hpp"

#include <cmath>
#include <functional>
#include <vector>

using namespace ddtrack;
using ad::Mat;

namespace {

using BuildFn = std::function<ad::Expr(ad::Tape&, const std::vector<ad::Expr>&)>;

// Rebuilds the expression from perturbed inputs and compares reverse-mode
// gradients against central differences, scalar by scalar.
double max_rel_grad_err(const std::vector<Mat>& inputs, const BuildFn& build, double h = 1e-6) {
    ad::Tape tape;
    std::vector<ad::Expr> leaves;
    for (const Mat& m : inputs) leaves.push_back(tape.leaf(m));
    tape.backward(build(tape, leaves));
    std::vector<Mat> analytic;
    for (const auto& l : leaves) analytic.push_back(l.grad());

    const auto eval = [&](const std::vector<Mat>& in) {
        ad::Tape t;
        std::vector<ad::Expr> lv;
        for (const Mat& m : in) lv.push_back(t.leaf(m));
        return build(t, lv).value()(0, 0);
    };

    double worst = 0.0;
    for (size_t i = 0; i < inputs.size(); ++i) {
        for (int r = 0; r < inputs[i].rows(); ++r) {
            for (int c = 0; c < inputs[i].cols(); ++c) {
                std::vector<Mat> plus = inputs, minus = inputs;
                plus[i](r, c) += h;
                minus[i](r, c) -= h;
                const double fd = (eval(plus) - eval(minus)) / (2.0 * h);
                const double a = analytic[i](r, c);
                const double denom = std::max({std::abs(a), std::abs(fd), 1e-6});
                worst = std::max(worst, std::abs(a - fd) / denom);
            }
        }
    }
    return worst;
}

// Fixed-weight contraction to a 1x1 root so any op output can feed backward().
ad::Expr contract(ad::Tape& t, ad::Expr m, std::uint64_t seed = 5) {
    Rng rng(seed);
    Mat w(m.value().rows(), m.value().cols());
    for (int c = 0; c < w.cols(); ++c)
        for (int r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-1.0, 1.0);
    ad::Expr left = t.constant(Mat::Ones(1, m.value().rows()));
    ad::Expr right = t.constant(Mat::Ones(m.value().cols(), 1));
    return t.matmul(t.matmul(left, t.hadamard(m, t.constant(w))), right);
}

Mat random_mat(int rows, int cols, std::uint64_t seed, double lo = -2.0, double hi = 2.0) {
    Rng rng(seed);
    Mat m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("forward values of the nonlinearities") {
    ad::Tape t;
    Mat x(1, 4);
    x << -2.0, 0.0, 0.5, 3.0;
    ad::Expr e = t.leaf(x);
    CHECK(t.sigmoid(e).value()(0, 1) == 0.5);
    CHECK(t.sigmoid(e).value()(0, 3) == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))));
    CHECK(t.tanh(e).value()(0, 0) == doctest::Approx(std::tanh(-2.0)));
    CHECK(t.relu(e).value()(0, 0) == 0.0);
    CHECK(t.relu(e).value()(0, 2) == 0.5);
    CHECK(t.affine(e, 2.0, 1.0).value()(0, 2) == 2.0);
}

TEST_CASE("matrix product gradient") {
    const std::vector<Mat> in{random_mat(3, 4, 1), random_mat(4, 2, 2)};
    const double err = max_rel_grad_err(in, [](ad::Tape& t, const std::vector<ad::Expr>& l) {
        return contract(t, t.matmul(l[0], l[1]));
    });
    CHECK(err < 5e-6);
}

TEST_CASE("elementwise op gradients") {
    const std::vector<Mat> in{random_mat(3, 3, 3), random_mat(3, 3, 4)};
    const double err = max_rel_grad_err(in, [](ad::Tape& t, const std::vector<ad::Expr>& l) {
        ad::Expr mix = t.add(t.hadamard(l[0], l[1]), t.sub(l[0], l[1]));
        return contract(t, t.affine(mix, 0.5, -1.25));
    });
    CHECK(err < 5e-6);
}

TEST_CASE("nonlinearity gradients") {
    // keep inputs away from the relu kink where the derivative jumps
    Mat x = random_mat(4, 3, 6, 0.2, 2.0);
    x.row(1) *= -1.0;
    const double err = max_rel_grad_err({x}, [](ad::Tape& t, const std::vector<ad::Expr>& l) {
        ad::Expr y = t.add(t.sigmoid(l[0]), t.add(t.tanh(l[0]), t.relu(l[0])));
        return contract(t, y);
    });
    CHECK(err < 5e-6);
}

TEST_CASE("bias broadcast and transpose gradients") {
    const std::vector<Mat> in{random_mat(4, 3, 7), random_mat(1, 4, 8)};
    const double err = max_rel_grad_err(in, [](ad::Tape& t, const std::vector<ad::Expr>& l) {
        return contract(t, t.add_rowvec(t.transpose(l[0]), l[1]));
    });
    CHECK(err < 5e-6);
}

TEST_CASE("row gather with zero padding and duplicate sources") {
    const std::vector<Mat> in{random_mat(5, 3, 9)};
    const std::vector<int> rows{2, 0, 2};  // row 2 used twice; rows 1,3,4 unused
    const double err = max_rel_grad_err(in, [&](ad::Tape& t, const std::vector<ad::Expr>& l) {
        return contract(t, t.gather_rows(l[0], rows, 4));
    });
    CHECK(err < 5e-6);

    ad::Tape t;
    ad::Expr a = t.leaf(in[0]);
    ad::Expr g = t.gather_rows(a, rows, 4);
    CHECK(g.value().rows() == 4);
    CHECK(g.value().row(3).cwiseAbs().maxCoeff() == 0.0);  // padded
    CHECK(g.value().row(0) == in[0].row(2));
    CHECK_THROWS_AS(t.gather_rows(a, {0, 1, 2}, 2), std::invalid_argument);
    CHECK_THROWS_AS(t.gather_rows(a, {5}, 2), std::out_of_range);
}

TEST_CASE("row scaling, norm and scalar division gradients") {
    const std::vector<Mat> in{random_mat(4, 3, 10), random_mat(4, 1, 11), random_mat(3, 2, 12)};
    const double err = max_rel_grad_err(in, [](ad::Tape& t, const std::vector<ad::Expr>& l) {
        ad::Expr scaled = t.scale_rows(l[0], l[1]);
        ad::Expr nrm = t.l2_norm(l[2]);  // gradients flow into the divisor too
        return contract(t, t.div_by_scalar(scaled, nrm));
    });
    CHECK(err < 5e-6);

    ad::Tape t;
    Mat v(2, 2);
    v << 3.0, 0.0, 0.0, 4.0;
    CHECK(t.l2_norm(t.leaf(v)).value()(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("softmax cross-entropy value against a log-sum-exp reference") {
    Mat z(3, 4);
    z << 1.0, -0.5, 2.0, 0.0,
         0.3, 0.3, 0.3, 0.3,
         -4.0, 6.0, 0.0, 1.0;
    const std::vector<int> labels{2, 0, 1};

    double expect = 0.0;
    for (int i = 0; i < 3; ++i) {
        double lse = 0.0;
        for (int c = 0; c < 4; ++c) lse += std::exp(z(i, c));
        expect += std::log(lse) - z(i, labels[i]);
    }

    ad::Tape t;
    ad::Expr loss = t.softmax_ce_sum(t.leaf(z), labels);
    CHECK(loss.value()(0, 0) == doctest::Approx(expect).epsilon(1e-12));

    // class weights scale per-row contributions by the label's weight
    const std::vector<double> w{2.0, 1.0, 0.25, 1.0};
    ad::Expr wloss = t.softmax_ce_sum(t.leaf(z), labels, w);
    double wexpect = 0.0;
    for (int i = 0; i < 3; ++i) {
        double lse = 0.0;
        for (int c = 0; c < 4; ++c) lse += std::exp(z(i, c));
        wexpect += w[labels[i]] * (std::log(lse) - z(i, labels[i]));
    }
    CHECK(wloss.value()(0, 0) == doctest::Approx(wexpect).epsilon(1e-12));
}

TEST_CASE("rows with negative labels are invisible to loss and gradient") {
    Mat z = random_mat(4, 3, 13);
    ad::Tape t;
    ad::Expr a = t.leaf(z);
    ad::Expr loss = t.softmax_ce_sum(a, {1, -1, 0, -1});
    t.backward(loss);
    CHECK(a.grad().row(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.grad().row(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.grad().row(0).cwiseAbs().maxCoeff() > 0.0);

    Mat z2 = z;
    z2.row(1).setConstant(100.0);  // huge logits on a skipped row: no effect
    ad::Tape t2;
    CHECK(t2.softmax_ce_sum(t2.leaf(z2), {1, -1, 0, -1}).value()(0, 0) ==
          doctest::Approx(loss.value()(0, 0)).epsilon(1e-12));
}

TEST_CASE("softmax cross-entropy gradients, with and without class weights") {
    const std::vector<Mat> in{random_mat(5, 3, 14)};
    const std::vector<int> labels{0, 2, -1, 1, 2};
    double err = max_rel_grad_err(in, [&](ad::Tape& t, const std::vector<ad::Expr>& l) {
        return t.softmax_ce_sum(l[0], labels);
    });
    CHECK(err < 5e-6);
    err = max_rel_grad_err(in, [&](ad::Tape& t, const std::vector<ad::Expr>& l) {
        return t.softmax_ce_sum(l[0], labels, {1.0, 3.0, 0.5});
    });
    CHECK(err < 5e-6);
}

TEST_CASE("gradients accumulate when a leaf feeds several branches") {
    Mat x = random_mat(3, 3, 15);
    ad::Tape t;
    ad::Expr a = t.leaf(x);
    ad::Expr ones_l = t.constant(Mat::Ones(1, 3));
    ad::Expr ones_r = t.constant(Mat::Ones(3, 1));
    // f = sum(a o a), so df/da = 2a
    ad::Expr root = t.matmul(t.matmul(ones_l, t.hadamard(a, a)), ones_r);
    t.backward(root);
    CHECK((a.grad() - 2.0 * x).cwiseAbs().maxCoeff() < 1e-12);

    const double err = max_rel_grad_err({x}, [](ad::Tape& tt, const std::vector<ad::Expr>& l) {
        ad::Expr s = tt.add(l[0], l[0]);  // diamond: same leaf through two paths
        return contract(tt, tt.hadamard(tt.sigmoid(s), tt.tanh(l[0])));
    });
    CHECK(err < 5e-6);
}

TEST_CASE("constants receive no gradient") {
    ad::Tape t;
    ad::Expr c = t.constant(random_mat(2, 2, 16));
    ad::Expr a = t.leaf(random_mat(2, 2, 17));
    t.backward(contract(t, t.matmul(c, a)));
    CHECK(a.grad().cwiseAbs().maxCoeff() > 0.0);
    CHECK(c.grad().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shape and argument validation") {
    ad::Tape t;
    ad::Expr a = t.leaf(Mat::Zero(2, 3));
    ad::Expr b = t.leaf(Mat::Zero(2, 2));
    CHECK_THROWS_AS(t.matmul(a, a), std::invalid_argument);
    CHECK_THROWS_AS(t.add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(t.hadamard(a, b), std::invalid_argument);
    CHECK_THROWS_AS(t.add_rowvec(a, b), std::invalid_argument);
    CHECK_THROWS_AS(t.scale_rows(a, b), std::invalid_argument);
    CHECK_THROWS_AS(t.div_by_scalar(a, b), std::invalid_argument);
    CHECK_THROWS_AS(t.backward(a), std::invalid_argument);  // root not 1x1
    CHECK_THROWS_AS(t.softmax_ce_sum(a, {0, 1}), std::invalid_argument);        // label count
    CHECK_THROWS_AS(t.softmax_ce_sum(a, {0, 1, 3}), std::invalid_argument);     // class range
    CHECK_THROWS_AS(t.softmax_ce_sum(a, {0, 1, 2}, {1.0}), std::invalid_argument);
    ad::Expr zero = t.leaf(Mat::Zero(1, 1));
    CHECK_THROWS_AS(t.div_by_scalar(a, zero), std::domain_error);
}
