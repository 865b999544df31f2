#include "ddtrack/evolvegcn.hpp"

#include "ddtrack/common.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ddtrack {

namespace {

constexpr std::uint64_t kInitStream = 0x65766f6cULL;  // "evol"
constexpr double kStdFloor = 1e-9;

MatX glorot(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    MatX m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
    return m;
}

MatX scaled_uniform(int rows, int cols, double scale, Rng& rng) {
    MatX m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.uniform() - 1.0) * scale;
    return m;
}

/// Indices of the top-r entries of a column vector, descending score, ties to
/// the smaller index; fewer than r when the vector is shorter.
std::vector<int> top_r_indices(const MatX& scores, int r) {
    std::vector<int> idx(static_cast<size_t>(scores.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return scores(a, 0) > scores(b, 0); });
    if (static_cast<int>(idx.size()) > r) idx.resize(static_cast<size_t>(r));
    return idx;
}

}  // namespace

MatX Standardizer::apply(const MatX& x) const {
    if (x.cols() != mean.size())
        throw std::invalid_argument("standardizer: feature dimension mismatch");
    MatX out = x;
    for (int j = 0; j < out.cols(); ++j)
        out.col(j) = (out.col(j).array() - mean(j)) / stddev(j);
    return out;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw std::invalid_argument("train config: learning_rate must be > 0");
    if (history_window < 1) throw std::invalid_argument("train config: history_window must be >= 1");
    if (!(train_frac > 0) || !(val_frac >= 0) || !(train_frac + val_frac <= 1.0))
        throw std::invalid_argument("train config: split fractions invalid");
    if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
    if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
    if (hidden_dims.empty()) throw std::invalid_argument("train config: need at least one layer");
    for (int d : hidden_dims)
        if (d < 1) throw std::invalid_argument("train config: layer dims must be >= 1");
    if (decoder_hidden < 1) throw std::invalid_argument("train config: decoder_hidden must be >= 1");
    for (double w : class_weights)
        if (!(w >= 0)) throw std::invalid_argument("train config: class weights must be >= 0");
}

int TrainConfig::n_train_windows(int k_total) const {
    return static_cast<int>(std::floor(train_frac * k_total));
}

int TrainConfig::n_val_windows(int k_total) const {
    return static_cast<int>(std::floor(val_frac * k_total));
}

std::vector<MatX*> EvolveGcnModel::parameters() {
    std::vector<MatX*> p;
    for (auto& l : layers) {
        p.push_back(&l.w_init);
        p.push_back(&l.gru.m_update);
        p.push_back(&l.gru.u_update);
        p.push_back(&l.gru.b_update);
        p.push_back(&l.gru.m_reset);
        p.push_back(&l.gru.u_reset);
        p.push_back(&l.gru.b_reset);
        p.push_back(&l.gru.m_cand);
        p.push_back(&l.gru.u_cand);
        p.push_back(&l.gru.b_cand);
        p.push_back(&l.scorer);
    }
    p.push_back(&decoder.w1);
    p.push_back(&decoder.b1);
    p.push_back(&decoder.w2);
    p.push_back(&decoder.b2);
    return p;
}

std::vector<const MatX*> EvolveGcnModel::parameters() const {
    auto mut = const_cast<EvolveGcnModel*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

EvolveGcnModel init_model(int feature_dim, const TrainConfig& config, int n_class) {
    config.validate();
    if (feature_dim < 1) throw std::invalid_argument("init_model: feature_dim must be >= 1");
    if (n_class < 1) throw std::invalid_argument("init_model: n_class must be >= 1");
    if (!config.class_weights.empty() &&
        static_cast<int>(config.class_weights.size()) != n_class)
        throw std::invalid_argument("init_model: class_weights size must match n_class");

    EvolveGcnModel model;
    model.feature_dim = feature_dim;
    model.n_class = n_class;
    model.config = config;

    Rng rng(mix_seed(config.seed, kInitStream, 0));
    int d_in = feature_dim;
    for (int d_out : config.hidden_dims) {
        EvolveGcnLayer layer;
        layer.d_in = d_in;
        layer.d_out = d_out;
        layer.w_init = glorot(d_in, d_out, rng);
        const double s = 1.0 / std::sqrt(static_cast<double>(d_in));
        layer.gru.m_update = scaled_uniform(d_in, d_in, s, rng);
        layer.gru.u_update = scaled_uniform(d_in, d_in, s, rng);
        layer.gru.b_update = MatX::Zero(d_in, d_out);
        layer.gru.m_reset = scaled_uniform(d_in, d_in, s, rng);
        layer.gru.u_reset = scaled_uniform(d_in, d_in, s, rng);
        layer.gru.b_reset = MatX::Zero(d_in, d_out);
        layer.gru.m_cand = scaled_uniform(d_in, d_in, s, rng);
        layer.gru.u_cand = scaled_uniform(d_in, d_in, s, rng);
        layer.gru.b_cand = MatX::Zero(d_in, d_out);
        do {
            layer.scorer = scaled_uniform(d_in, 1, s, rng);
        } while (layer.scorer.norm() < 1e-12);
        model.layers.push_back(std::move(layer));
        d_in = d_out;
    }
    model.decoder.w1 = glorot(d_in, config.decoder_hidden, rng);
    model.decoder.b1 = MatX::Zero(1, config.decoder_hidden);
    model.decoder.w2 = glorot(config.decoder_hidden, n_class, rng);
    model.decoder.b2 = MatX::Zero(1, n_class);

    model.standardizer.mean = VecX::Zero(feature_dim);
    model.standardizer.stddev = VecX::Ones(feature_dim);
    return model;
}

MatX normalized_adjacency(const MatX& adjacency) {
    if (adjacency.rows() != adjacency.cols())
        throw std::invalid_argument("normalized_adjacency: matrix must be square");
    const int n = static_cast<int>(adjacency.rows());
    MatX a_tilde = adjacency + MatX::Identity(n, n);
    VecX inv_sqrt_deg(n);
    for (int i = 0; i < n; ++i) inv_sqrt_deg(i) = 1.0 / std::sqrt(a_tilde.row(i).sum());
    return inv_sqrt_deg.asDiagonal() * a_tilde * inv_sqrt_deg.asDiagonal();
}

MatX gcn_layer_forward(const MatX& adjacency, const MatX& h, const MatX& w, bool relu) {
    MatX out = normalized_adjacency(adjacency) * h * w;
    if (relu) out = out.cwiseMax(0.0);
    return out;
}

MatX summarize_embeddings(const MatX& h, const MatX& scorer, int r) {
    if (scorer.cols() != 1 || scorer.rows() != h.cols())
        throw std::invalid_argument("summarize_embeddings: scorer must be d x 1");
    const double qn = scorer.norm();
    if (qn < 1e-300) throw std::invalid_argument("summarize_embeddings: zero scorer");
    const MatX scores = (h * scorer) / qn;  // N x 1
    const std::vector<int> idx = top_r_indices(scores, r);
    MatX z = MatX::Zero(r, h.cols());
    for (size_t i = 0; i < idx.size(); ++i)
        z.row(static_cast<int>(i)) = h.row(idx[i]) * std::tanh(scores(idx[i], 0));
    return z;
}

MatX evolve_weights(const EvolveGcnLayer& layer, const MatX& h_in, const MatX& w_prev) {
    if (w_prev.rows() != layer.d_in || w_prev.cols() != layer.d_out)
        throw std::invalid_argument("evolve_weights: weight shape mismatch");
    const MatX zt = summarize_embeddings(h_in, layer.scorer, layer.d_out).transpose();
    const auto sig = [](const MatX& m) -> MatX {
        return (1.0 / (1.0 + (-m.array()).exp())).matrix();
    };
    const GruCell& g = layer.gru;
    const MatX reset = sig(g.m_reset * zt + g.u_reset * w_prev + g.b_reset);
    const MatX update = sig(g.m_update * zt + g.u_update * w_prev + g.b_update);
    const MatX cand =
        (g.m_cand * zt + g.u_cand * (reset.cwiseProduct(w_prev)) + g.b_cand).array().tanh().matrix();
    return (1.0 - update.array()).matrix().cwiseProduct(w_prev) + update.cwiseProduct(cand);
}

double ce_loss(const MatX& logits, const std::vector<int>& labels,
               const std::vector<double>& class_weights) {
    if (static_cast<int>(labels.size()) != logits.rows())
        throw std::invalid_argument("ce_loss: one label per row required");
    double total = 0.0;
    for (int i = 0; i < logits.rows(); ++i) {
        const int y = labels[static_cast<size_t>(i)];
        if (y < 0) continue;
        if (y >= logits.cols()) throw std::invalid_argument("ce_loss: label out of range");
        const double zmax = logits.row(i).maxCoeff();
        const double lse = zmax + std::log((logits.row(i).array() - zmax).exp().sum());
        const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<size_t>(y)];
        total += w * (lse - logits(i, y));
    }
    return total;
}

namespace {

/// Tape leaves for every parameter, in registry order, with per-layer views.
struct TapeLeaves {
    struct Layer {
        ad::Expr w_init, mu, uu, bu, mr, ur, br, mc, uc, bc, q;
    };
    std::vector<ad::Expr> flat;
    std::vector<Layer> layers;
    ad::Expr dw1, db1, dw2, db2;
};

TapeLeaves make_leaves(ad::Tape& tape, const EvolveGcnModel& model) {
    TapeLeaves lv;
    for (const MatX* p : model.parameters()) lv.flat.push_back(tape.leaf(*p));
    size_t at = 0;
    for (size_t l = 0; l < model.layers.size(); ++l) {
        TapeLeaves::Layer view;
        view.w_init = lv.flat[at++];
        view.mu = lv.flat[at++];
        view.uu = lv.flat[at++];
        view.bu = lv.flat[at++];
        view.mr = lv.flat[at++];
        view.ur = lv.flat[at++];
        view.br = lv.flat[at++];
        view.mc = lv.flat[at++];
        view.uc = lv.flat[at++];
        view.bc = lv.flat[at++];
        view.q = lv.flat[at++];
        lv.layers.push_back(view);
    }
    lv.dw1 = lv.flat[at++];
    lv.db1 = lv.flat[at++];
    lv.dw2 = lv.flat[at++];
    lv.db2 = lv.flat[at++];
    return lv;
}

ad::Expr gru_step(ad::Tape& t, const TapeLeaves::Layer& l, ad::Expr zt, ad::Expr w_prev) {
    ad::Expr reset =
        t.sigmoid(t.add(t.add(t.matmul(l.mr, zt), t.matmul(l.ur, w_prev)), l.br));
    ad::Expr update =
        t.sigmoid(t.add(t.add(t.matmul(l.mu, zt), t.matmul(l.uu, w_prev)), l.bu));
    ad::Expr cand = t.tanh(
        t.add(t.add(t.matmul(l.mc, zt), t.matmul(l.uc, t.hadamard(reset, w_prev))), l.bc));
    ad::Expr keep = t.affine(update, -1.0, 1.0);
    return t.add(t.hadamard(keep, w_prev), t.hadamard(update, cand));
}

struct TapeSequence {
    std::vector<ad::Expr> logits;
    std::vector<ad::Expr> window_loss;  // invalid Expr when a window has no labeled node
    std::vector<ad::Expr> final_weights;
    ad::Expr total_loss;  // invalid when no window had labeled nodes
};

/// Forward over a span of graphs. Evolution starts from the w_init leaves when
/// initial_weights is null (gradients reach w_init), else from the supplied
/// detached values.
TapeSequence run_sequence(ad::Tape& tape, const TapeLeaves& lv, const EvolveGcnModel& model,
                          const std::vector<DDGraph>& graphs, size_t begin, size_t end,
                          const std::vector<MatX>* initial_weights) {
    TapeSequence out;
    std::vector<ad::Expr> w(model.layers.size());
    for (size_t l = 0; l < w.size(); ++l)
        w[l] = initial_weights ? tape.constant((*initial_weights)[l]) : lv.layers[l].w_init;

    for (size_t g = begin; g < end; ++g) {
        const DDGraph& graph = graphs[g];
        if (graph.features.cols() != model.feature_dim)
            throw std::invalid_argument("forward: graph feature dimension mismatch");
        ad::Expr h = tape.constant(model.standardizer.apply(graph.features));
        ad::Expr a_hat = tape.constant(normalized_adjacency(graph.adjacency()));
        for (size_t l = 0; l < model.layers.size(); ++l) {
            const int r = model.layers[l].d_out;
            ad::Expr scores = tape.div_by_scalar(tape.matmul(h, lv.layers[l].q),
                                                 tape.l2_norm(lv.layers[l].q));
            const std::vector<int> top = top_r_indices(scores.value(), r);
            ad::Expr z = tape.scale_rows(tape.gather_rows(h, top, r),
                                         tape.tanh(tape.gather_rows(scores, top, r)));
            w[l] = gru_step(tape, lv.layers[l], tape.transpose(z), w[l]);
            h = tape.relu(tape.matmul(tape.matmul(a_hat, h), w[l]));
        }
        ad::Expr hidden = tape.relu(tape.add_rowvec(tape.matmul(h, lv.dw1), lv.db1));
        ad::Expr logits = tape.add_rowvec(tape.matmul(hidden, lv.dw2), lv.db2);
        out.logits.push_back(logits);

        const bool labeled = std::any_of(graph.labels.begin(), graph.labels.end(),
                                         [](int y) { return y >= 0; });
        ad::Expr loss;
        if (labeled) {
            loss = tape.softmax_ce_sum(logits, graph.labels, model.config.class_weights);
            out.total_loss = out.total_loss.valid() ? tape.add(out.total_loss, loss) : loss;
        }
        out.window_loss.push_back(loss);
    }
    out.final_weights = w;
    return out;
}

std::vector<MatX> weight_values(const TapeSequence& seq) {
    std::vector<MatX> vals;
    vals.reserve(seq.final_weights.size());
    for (const ad::Expr& e : seq.final_weights) vals.push_back(e.value());
    return vals;
}

void fit_standardizer(EvolveGcnModel& model, const std::vector<DDGraph>& graphs, size_t n_train) {
    const int d = model.feature_dim;
    VecX sum = VecX::Zero(d), sumsq = VecX::Zero(d);
    long n = 0;
    for (size_t g = 0; g < n_train; ++g) {
        const MatX& x = graphs[g].features;
        if (x.cols() != d) throw std::invalid_argument("train: graph feature dimension mismatch");
        for (int i = 0; i < x.rows(); ++i) {
            sum += x.row(i).transpose();
            sumsq += x.row(i).transpose().cwiseProduct(x.row(i).transpose());
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("train: no nodes in the training split");
    model.standardizer.mean = sum / static_cast<double>(n);
    for (int j = 0; j < d; ++j) {
        const double var =
            std::max(0.0, sumsq(j) / static_cast<double>(n) -
                              model.standardizer.mean(j) * model.standardizer.mean(j));
        const double sd = std::sqrt(var);
        model.standardizer.stddev(j) = sd < kStdFloor ? 1.0 : sd;
    }
}

struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;
    std::vector<MatX> m, v;

    explicit Adam(double lr_in) : lr(lr_in) {}

    void step(const std::vector<MatX*>& params, const std::vector<MatX>& grads) {
        if (m.empty()) {
            for (const MatX* p : params) {
                m.push_back(MatX::Zero(p->rows(), p->cols()));
                v.push_back(MatX::Zero(p->rows(), p->cols()));
            }
        }
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i].cwiseProduct(grads[i]);
            params[i]->array() -=
                lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + eps);
        }
    }
};

void check_time_ordered(const std::vector<DDGraph>& graphs) {
    for (size_t g = 1; g < graphs.size(); ++g)
        if (graphs[g].window_index <= graphs[g - 1].window_index)
            throw std::invalid_argument("graph sequence must have increasing window indices");
}

double validation_loss(const EvolveGcnModel& model, const std::vector<DDGraph>& graphs,
                       size_t n_train, size_t n_val) {
    ad::Tape tape;
    TapeLeaves lv = make_leaves(tape, model);
    TapeSequence seq = run_sequence(tape, lv, model, graphs, 0, n_train + n_val, nullptr);
    double total = 0.0;
    for (size_t g = n_train; g < n_train + n_val; ++g)
        if (seq.window_loss[g].valid()) total += seq.window_loss[g].value()(0, 0);
    return total;
}

}  // namespace

SequenceOutput forward_sequence(const EvolveGcnModel& model, const std::vector<DDGraph>& graphs,
                                const std::vector<MatX>* initial_weights) {
    if (initial_weights && initial_weights->size() != model.layers.size())
        throw std::invalid_argument("forward_sequence: one initial weight per layer required");
    ad::Tape tape;
    TapeLeaves lv = make_leaves(tape, model);
    TapeSequence seq = run_sequence(tape, lv, model, graphs, 0, graphs.size(), initial_weights);
    SequenceOutput out;
    for (const ad::Expr& e : seq.logits) out.logits.push_back(e.value());
    out.final_weights = weight_values(seq);
    out.total_loss = seq.total_loss.valid() ? seq.total_loss.value()(0, 0) : 0.0;
    return out;
}

std::vector<std::vector<int>> predict(const EvolveGcnModel& model,
                                      const std::vector<DDGraph>& graphs) {
    const SequenceOutput out = forward_sequence(model, graphs);
    std::vector<std::vector<int>> labels;
    labels.reserve(out.logits.size());
    for (const MatX& logit : out.logits) {
        std::vector<int> win(static_cast<size_t>(logit.rows()));
        for (int i = 0; i < logit.rows(); ++i) {
            int best = 0;
            for (int c = 1; c < logit.cols(); ++c)
                if (logit(i, c) > logit(i, best)) best = c;
            win[static_cast<size_t>(i)] = best;
        }
        labels.push_back(std::move(win));
    }
    return labels;
}

TrainReport train(EvolveGcnModel& model, const std::vector<DDGraph>& graphs) {
    model.config.validate();
    check_time_ordered(graphs);
    const int k_total = static_cast<int>(graphs.size());
    const size_t n_train = static_cast<size_t>(model.config.n_train_windows(k_total));
    const size_t n_val = static_cast<size_t>(model.config.n_val_windows(k_total));
    if (n_train < 1) throw std::invalid_argument("train: training split is empty");

    fit_standardizer(model, graphs, n_train);

    TrainReport report;
    const std::vector<MatX*> params = model.parameters();
    Adam adam(model.config.learning_rate);
    std::vector<MatX> best_params;
    double best_val = std::numeric_limits<double>::infinity();
    int stale = 0;
    const size_t chunk = static_cast<size_t>(model.config.history_window);

    for (int epoch = 0; epoch < model.config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::vector<MatX> carried;
        for (size_t start = 0; start < n_train; start += chunk) {
            const size_t end = std::min(start + chunk, n_train);
            ad::Tape tape;
            TapeLeaves lv = make_leaves(tape, model);
            TapeSequence seq = run_sequence(tape, lv, model, graphs, start, end,
                                            carried.empty() ? nullptr : &carried);
            carried = weight_values(seq);
            if (!seq.total_loss.valid()) continue;
            const double loss = seq.total_loss.value()(0, 0);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "train: non-finite loss " << loss << " at epoch " << epoch
                    << ", windows [" << start << ", " << end << ")";
                throw std::runtime_error(msg.str());
            }
            epoch_loss += loss;
            tape.backward(seq.total_loss);
            std::vector<MatX> grads;
            grads.reserve(lv.flat.size());
            for (const ad::Expr& e : lv.flat) grads.push_back(e.grad());
            adam.step(params, grads);
        }
        report.train_loss.push_back(epoch_loss);

        const double vloss =
            n_val > 0 ? validation_loss(model, graphs, n_train, n_val) : epoch_loss;
        if (!std::isfinite(vloss))
            throw std::runtime_error("train: non-finite validation loss at epoch " +
                                     std::to_string(epoch));
        report.val_loss.push_back(vloss);

        if (vloss < best_val) {
            best_val = vloss;
            report.best_epoch = epoch;
            report.best_val_loss = vloss;
            best_params.clear();
            for (const MatX* p : params) best_params.push_back(*p);
            stale = 0;
        } else if (++stale >= model.config.patience) {
            break;
        }
    }

    if (!best_params.empty())
        for (size_t i = 0; i < params.size(); ++i) *params[i] = best_params[i];
    return report;
}

double gradient_check(EvolveGcnModel& model, const std::vector<DDGraph>& graphs, double step) {
    ad::Tape tape;
    TapeLeaves lv = make_leaves(tape, model);
    TapeSequence seq = run_sequence(tape, lv, model, graphs, 0, graphs.size(), nullptr);
    if (!seq.total_loss.valid())
        throw std::invalid_argument("gradient_check: no labeled nodes in the sequence");
    tape.backward(seq.total_loss);
    std::vector<MatX> analytic;
    for (const ad::Expr& e : lv.flat) analytic.push_back(e.grad());

    const std::vector<MatX*> params = model.parameters();
    double worst = 0.0;
    for (size_t p = 0; p < params.size(); ++p) {
        MatX& tensor = *params[p];
        for (int i = 0; i < tensor.rows(); ++i) {
            for (int j = 0; j < tensor.cols(); ++j) {
                const double saved = tensor(i, j);
                tensor(i, j) = saved + step;
                const double up = forward_sequence(model, graphs).total_loss;
                tensor(i, j) = saved - step;
                const double down = forward_sequence(model, graphs).total_loss;
                tensor(i, j) = saved;
                const double fd = (up - down) / (2.0 * step);
                const double a = analytic[p](i, j);
                const double denom = std::max({std::abs(a), std::abs(fd), 1e-8});
                worst = std::max(worst, std::abs(a - fd) / denom);
            }
        }
    }
    return worst;
}

namespace {

void write_mat(std::ostream& os, const MatX& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << m(i, j);
        }
        os << '\n';
    }
}

MatX read_mat(std::istream& is, int expect_rows, int expect_cols, const char* what) {
    long rows = -1, cols = -1;
    if (!(is >> rows >> cols)) throw std::runtime_error(std::string("model load: truncated at ") + what);
    if (rows != expect_rows || cols != expect_cols)
        throw std::runtime_error(std::string("model load: dimension mismatch for ") + what);
    MatX m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j)
            if (!(is >> m(i, j)))
                throw std::runtime_error(std::string("model load: bad value in ") + what);
    return m;
}

}  // namespace

void save_model(const EvolveGcnModel& model, std::ostream& os) {
    os << std::setprecision(17);
    os << "ddtrack-model 1\n";
    os << model.feature_dim << ' ' << model.n_class << '\n';
    const TrainConfig& c = model.config;
    os << c.learning_rate << ' ' << c.history_window << ' ' << c.train_frac << ' ' << c.val_frac
       << ' ' << c.epochs << ' ' << c.patience << ' ' << c.seed << ' ' << c.decoder_hidden << '\n';
    os << c.hidden_dims.size();
    for (int d : c.hidden_dims) os << ' ' << d;
    os << '\n';
    os << c.class_weights.size();
    for (double w : c.class_weights) os << ' ' << w;
    os << '\n';
    for (int j = 0; j < model.feature_dim; ++j)
        os << (j ? " " : "") << model.standardizer.mean(j);
    os << '\n';
    for (int j = 0; j < model.feature_dim; ++j)
        os << (j ? " " : "") << model.standardizer.stddev(j);
    os << '\n';
    for (const MatX* p : model.parameters()) write_mat(os, *p);
}

EvolveGcnModel load_model(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "ddtrack-model" || version != 1)
        throw std::runtime_error("model load: unrecognized header");
    int feature_dim = 0, n_class = 0;
    if (!(is >> feature_dim >> n_class)) throw std::runtime_error("model load: truncated header");
    TrainConfig c;
    if (!(is >> c.learning_rate >> c.history_window >> c.train_frac >> c.val_frac >> c.epochs >>
          c.patience >> c.seed >> c.decoder_hidden))
        throw std::runtime_error("model load: truncated config");
    size_t n_hidden = 0;
    if (!(is >> n_hidden) || n_hidden == 0) throw std::runtime_error("model load: bad layer list");
    c.hidden_dims.assign(n_hidden, 0);
    for (auto& d : c.hidden_dims)
        if (!(is >> d)) throw std::runtime_error("model load: bad layer list");
    size_t n_weights = 0;
    if (!(is >> n_weights)) throw std::runtime_error("model load: bad class weights");
    c.class_weights.assign(n_weights, 0.0);
    for (auto& w : c.class_weights)
        if (!(is >> w)) throw std::runtime_error("model load: bad class weights");

    EvolveGcnModel model = init_model(feature_dim, c, n_class);
    for (int j = 0; j < feature_dim; ++j)
        if (!(is >> model.standardizer.mean(j)))
            throw std::runtime_error("model load: bad standardizer");
    for (int j = 0; j < feature_dim; ++j)
        if (!(is >> model.standardizer.stddev(j)))
            throw std::runtime_error("model load: bad standardizer");
    for (MatX* p : model.parameters())
        *p = read_mat(is, static_cast<int>(p->rows()), static_cast<int>(p->cols()), "parameter");
    return model;
}

}  // namespace ddtrack
