#pragma once

#include <functional>
#include <optional>

#include "gdsp/align.hpp"
#include "gdsp/types.hpp"

namespace gdsp {

struct ModelDims {
    int vocab = 0;        // phoneme table rows
    int speakers = 0;     // speaker table rows
    int languages = 2;
    int embed = 32;       // E
    int bins = 16;        // mel bins
    int hidden = 128;     // score-net width H
    int t_embed = 16;     // sinusoidal time-embedding width, even

    void validate() const {
        require(vocab >= 1 && speakers >= 1 && languages >= 1, "ModelDims: empty tables");
        require(embed >= 1 && bins >= 1 && hidden >= 1, "ModelDims: bad widths");
        require(t_embed >= 2 && t_embed % 2 == 0, "ModelDims: t_embed must be even");
    }
};

// All trainable weights. Biases are stored as n x 1 matrices so that every
// parameter can be visited uniformly by name.
struct ModelParams {
    ModelDims dims;

    Eigen::MatrixXd phoneme_emb;   // V x E
    Eigen::MatrixXd speaker_emb;   // S x E
    Eigen::MatrixXd language_emb;  // n_lang x E

    Eigen::MatrixXd conv_w0, conv_w1, conv_w2;  // E x E taps at offsets -1, 0, +1
    Eigen::MatrixXd conv_b;                     // E x 1
    Eigen::MatrixXd proj_w;                     // bins x E
    Eigen::MatrixXd proj_b;                     // bins x 1

    Eigen::MatrixXd dp_w1;  // E x bins
    Eigen::MatrixXd dp_b1;  // E x 1
    Eigen::MatrixXd dp_w2;  // 1 x E
    Eigen::MatrixXd dp_b2;  // 1 x 1

    Eigen::MatrixXd sc_w0;          // H x (2*bins + t_embed)
    Eigen::MatrixXd sc_b0;          // H x 1
    Eigen::MatrixXd sc_w1, sc_b1;   // H x H, H x 1
    Eigen::MatrixXd sc_w2, sc_b2;   // H x H, H x 1
    Eigen::MatrixXd sc_w3;          // bins x H
    Eigen::MatrixXd sc_b3;          // bins x 1

    static ModelParams init(const ModelDims& dims, Rng& rng);
    static ModelParams zeros_like(const ModelParams& other);

    template <typename Fn>
    void visit(Fn&& fn) {
        fn("emb.phoneme", phoneme_emb);
        fn("emb.speaker", speaker_emb);
        fn("emb.language", language_emb);
        fn("enc.conv.w0", conv_w0);
        fn("enc.conv.w1", conv_w1);
        fn("enc.conv.w2", conv_w2);
        fn("enc.conv.b", conv_b);
        fn("enc.proj.w", proj_w);
        fn("enc.proj.b", proj_b);
        fn("dp.w1", dp_w1);
        fn("dp.b1", dp_b1);
        fn("dp.w2", dp_w2);
        fn("dp.b2", dp_b2);
        fn("score.w0", sc_w0);
        fn("score.b0", sc_b0);
        fn("score.w1", sc_w1);
        fn("score.b1", sc_b1);
        fn("score.w2", sc_w2);
        fn("score.b2", sc_b2);
        fn("score.w3", sc_w3);
        fn("score.b3", sc_b3);
    }
    template <typename Fn>
    void visit(Fn&& fn) const {
        const_cast<ModelParams*>(this)->visit(
            [&](const char* name, Eigen::MatrixXd& m) { fn(name, std::as_const(m)); });
    }

    std::size_t n_weights() const;
};

// [sin(2*pi*k*t), cos(2*pi*k*t)] interleaved, k = 1 .. width/2.
Eigen::VectorXd time_embedding(double t, int width);

struct EncodeCache {
    Eigen::MatrixXd emb;   // L x E summed embeddings
    Eigen::MatrixXd pre;   // L x E conv pre-activation
    Eigen::MatrixXd h;     // L x E tanh output
    std::vector<int> phonemes;
    std::optional<int> speaker;
    std::optional<int> language;
};

EncodedMeans encode(const std::vector<int>& phonemes, std::optional<int> speaker,
                    std::optional<int> language, const ModelParams& p,
                    EncodeCache* cache = nullptr);

// Accumulates weight gradients for d(loss)/d(mu_tilde) into grads.
void encode_backward(const Eigen::MatrixXd& d_mu_tilde, const EncodeCache& cache,
                     const ModelParams& p, ModelParams& grads);

struct DurationCache {
    Eigen::MatrixXd input;  // L x bins
    Eigen::MatrixXd z;      // L x E tanh hidden
};

// Stop-gradient contract: the input never receives gradient (encode_backward is
// simply not called on this path).
Eigen::VectorXd predict_log_durations(const EncodedMeans& mu_tilde_detached, const ModelParams& p,
                                      DurationCache* cache = nullptr);

void predict_log_durations_backward(const Eigen::VectorXd& d_out, const DurationCache& cache,
                                    const ModelParams& p, ModelParams& grads);

struct ScoreCache {
    Eigen::MatrixXd input;          // F x (2*bins + t_embed)
    Eigen::MatrixXd a0, a1, a2;     // F x H tanh activations
};

MelGrid score(const MelGrid& x_t, const MelGrid& mu, double t, const ModelParams& p,
              ScoreCache* cache = nullptr);

struct ScoreInputGrads {
    MelGrid d_x;   // gradient w.r.t. the x_t slice of the input
    MelGrid d_mu;  // gradient w.r.t. the mu slice
};

ScoreInputGrads score_backward(const MelGrid& d_out, const ScoreCache& cache,
                               const ModelParams& p, ModelParams& grads);

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t n_checked = 0;
    bool passed = false;
    std::string worst_param;
};

// Central-difference check of `analytic` against `loss_fn` on a random
// subsample of weights (1% of the total, at least 100).
GradCheckReport grad_check(const std::function<double(const ModelParams&)>& loss_fn,
                           const ModelParams& p, const ModelParams& analytic, double h,
                           double tol, Rng& rng);

}  // namespace gdsp
