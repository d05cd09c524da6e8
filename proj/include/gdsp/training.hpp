#pragma once

#include <optional>

#include "gdsp/model.hpp"
#include "gdsp/schedule_sde.hpp"

namespace gdsp {

struct TrainItem {
    std::vector<int> phonemes;
    std::optional<int> speaker;
    std::optional<int> language;
    MelGrid y;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 16;
    int epochs = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    double weight_enc = 1.0;
    double weight_dp = 1.0;
    double weight_diff = 1.0;
    NoiseSchedule sched;

    void validate() const {
        require(learning_rate > 0.0, "TrainConfig: learning_rate must be > 0");
        require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
        require(epochs >= 0, "TrainConfig: epochs must be >= 0");
        require(weight_enc >= 0.0 && weight_dp >= 0.0 && weight_diff >= 0.0,
                "TrainConfig: loss weights must be >= 0");
        sched.validate();
    }
};

struct EpochStats {
    double loss_enc = 0.0;
    double loss_dp = 0.0;
    double loss_diff = 0.0;
    double loss_total = 0.0;
    long wall_ms = 0;
};

struct TrainState {
    ModelParams params;
    ModelParams adam_m;
    ModelParams adam_v;
    std::int64_t adam_step = 0;
    int epoch = 0;
    std::vector<EpochStats> history;

    static TrainState fresh(const ModelParams& p) {
        return {p, ModelParams::zeros_like(p), ModelParams::zeros_like(p), 0, 0, {}};
    }
};

double loss_enc(const MelGrid& y, const EncodedMeans& mu_tilde, const Alignment& a);
// Also returns d(loss)/d(mu_tilde).
double loss_enc_grad(const MelGrid& y, const EncodedMeans& mu_tilde, const Alignment& a,
                     Eigen::MatrixXd& d_mu_tilde);

double loss_dp(const Eigen::VectorXd& pred_logd, const Eigen::VectorXd& target_logd);
double loss_dp_grad(const Eigen::VectorXd& pred_logd, const Eigen::VectorXd& target_logd,
                    Eigen::VectorXd& d_pred);

// Deterministic diffusion loss at frozen draws (t, xi); the score-matching
// target is -xi / sqrt(lambda_t) with unit anchor covariance.
double diff_loss_at(const MelGrid& y0, const MelGrid& mu, const ModelParams& p,
                    const NoiseSchedule& sched, double t, const MelGrid& xi);

// Same, accumulating score-net gradients and the gradient w.r.t. mu
// (through both the conditioning input and the noised sample).
double diff_loss_at_grad(const MelGrid& y0, const MelGrid& mu, const ModelParams& p,
                         const NoiseSchedule& sched, double t, const MelGrid& xi,
                         ModelParams& grads, Eigen::MatrixXd& d_mu);

// Single-sample Monte-Carlo estimate: draws t ~ U(t_min, t_max) and xi.
double loss_diff(const MelGrid& y0, const MelGrid& mu, const ModelParams& p,
                 const NoiseSchedule& sched, Rng& rng);

void adam_step(TrainState& state, const ModelParams& grads, const TrainConfig& cfg);

// Alternating loop: per batch, fix params and recompute the MAS alignments,
// then take one optimizer step on the weighted composite loss.
TrainState train(const std::vector<TrainItem>& dataset, const TrainConfig& cfg,
                 const ModelParams& initial,
                 const std::function<void(int, const EpochStats&)>& on_epoch = {});

void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(const std::string& path);

}  // namespace gdsp
