#pragma once

#include "ddtrack/autodiff.hpp"
#include "ddtrack/graph.hpp"

#include <iosfwd>
#include <vector>

namespace ddtrack {

/// Matrix GRU cell evolving one layer's weight matrix W (d_in x d_out).
/// Input and hidden maps act on the row dimension and are shared across
/// columns; biases are full d_in x d_out matrices.
struct GruCell {
    MatX m_update, u_update, b_update;
    MatX m_reset, u_reset, b_reset;
    MatX m_cand, u_cand, b_cand;
};

struct EvolveGcnLayer {
    MatX w_init;   // d_in x d_out; GRU initial hidden state
    GruCell gru;
    MatX scorer;   // d_in x 1; summarization scorer q
    int d_in = 0;
    int d_out = 0;
};

struct DecoderMlp {
    MatX w1;  // d_emb x hidden
    MatX b1;  // 1 x hidden
    MatX w2;  // hidden x n_class
    MatX b2;  // 1 x n_class
};

/// Per-column feature standardization, fitted on the training split.
struct Standardizer {
    VecX mean;
    VecX stddev;
    MatX apply(const MatX& x) const;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int history_window = 6;
    double train_frac = 0.65;
    double val_frac = 0.10;
    int epochs = 200;
    int patience = 20;
    std::uint64_t seed = 0;
    std::vector<double> class_weights;  // empty = unweighted
    std::vector<int> hidden_dims = {64, 32};
    int decoder_hidden = 32;

    void validate() const;
    int n_train_windows(int k_total) const;
    int n_val_windows(int k_total) const;
};

struct EvolveGcnModel {
    int feature_dim = kFeatureDim;
    int n_class = 0;
    std::vector<EvolveGcnLayer> layers;
    DecoderMlp decoder;
    Standardizer standardizer;
    TrainConfig config;

    /// Deterministic ordering of all trainable tensors (Adam / serialization /
    /// gradient checks all iterate this).
    std::vector<MatX*> parameters();
    std::vector<const MatX*> parameters() const;
};

/// Glorot/scaled-uniform initialization, seed-controlled.
EvolveGcnModel init_model(int feature_dim, const TrainConfig& config, int n_class);

/// sigma(D^-1/2 (A+I) D^-1/2 H W), identity activation when relu=false.
MatX gcn_layer_forward(const MatX& adjacency, const MatX& h, const MatX& w, bool relu = true);

/// Normalized propagation operator D^-1/2 (A+I) D^-1/2.
MatX normalized_adjacency(const MatX& adjacency);

/// Summarize node embeddings: scores s = H q / |q|, take the top-r rows by
/// score (ties to the smaller row index), scale each by tanh(score), pad with
/// zero rows when fewer than r nodes exist. Returns r x d.
MatX summarize_embeddings(const MatX& h, const MatX& scorer, int r);

/// One GRU evolution step for a layer: Z = summarize(h_in, q, d_out),
/// W_next = GRU(Z^T, w_prev).
MatX evolve_weights(const EvolveGcnLayer& layer, const MatX& h_in, const MatX& w_prev);

/// Sum of softmax cross-entropy over rows; labels < 0 are skipped.
double ce_loss(const MatX& logits, const std::vector<int>& labels,
               const std::vector<double>& class_weights = {});

struct SequenceOutput {
    std::vector<MatX> logits;        // one N_k x n_class matrix per graph
    std::vector<MatX> final_weights; // evolved per-layer W after the last graph
    double total_loss = 0.0;         // over labeled nodes of all graphs
};

/// Forward pass over a time-ordered graph sequence starting from the model's
/// initial weights (or from explicitly supplied per-layer weights).
SequenceOutput forward_sequence(const EvolveGcnModel& model, const std::vector<DDGraph>& graphs,
                                const std::vector<MatX>* initial_weights = nullptr);

/// Argmax class per node per graph, after evolving over the whole list.
std::vector<std::vector<int>> predict(const EvolveGcnModel& model,
                                      const std::vector<DDGraph>& graphs);

struct TrainReport {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch
    int best_epoch = -1;
    double best_val_loss = 0.0;
};

/// Adam training with truncated backpropagation over history_window-sized
/// chunks; the temporally-first train_frac of the sequence trains, the next
/// val_frac validates. Restores the best-validation parameters before
/// returning. Deterministic for a fixed seed.
TrainReport train(EvolveGcnModel& model, const std::vector<DDGraph>& graphs);

/// Max relative gradient error between reverse-mode and central finite
/// differences of the sequence loss, over every scalar parameter.
double gradient_check(EvolveGcnModel& model, const std::vector<DDGraph>& graphs,
                      double step = 1e-5);

void save_model(const EvolveGcnModel& model, std::ostream& os);
EvolveGcnModel load_model(std::istream& is);

}  // namespace ddtrack
