#pragma once

#include <functional>

#include "gdsp/types.hpp"

namespace gdsp {

// Linear noise schedule beta_t = beta0 + (beta1 - beta0) * t / t_max,
// with closed-form integral B(t) and variance weight lambda_t = 1 - exp(-B(t)).
struct NoiseSchedule {
    double beta0 = 0.05;
    double beta1 = 20.0;
    double t_max = 1.0;
    double t_min = 1e-3;

    void validate() const {
        require(beta0 > 0.0 && beta1 >= beta0, "NoiseSchedule: need 0 < beta0 <= beta1");
        require(t_min > 0.0 && t_min < t_max, "NoiseSchedule: need 0 < t_min < t_max");
    }
};

// Anchor of the forward process: X_T -> N(mu, diag(sigma_diag)).
// mu has one entry per mel bin and broadcasts across frames.
struct AnchoredGaussian {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma_diag;

    static AnchoredGaussian unit(Eigen::Index bins) {
        return {Eigen::VectorXd::Zero(bins), Eigen::VectorXd::Ones(bins)};
    }
    void validate() const {
        require(mu.size() == sigma_diag.size(), "AnchoredGaussian: mu/sigma size mismatch");
        require((sigma_diag.array() > 0.0).all(), "AnchoredGaussian: sigma entries must be > 0");
    }
};

double beta_at(const NoiseSchedule& sched, double t);
double cum_noise(const NoiseSchedule& sched, double t);
double lambda_at(const NoiseSchedule& sched, double t);

struct Marginal {
    MelGrid mean;                // frames x bins
    Eigen::VectorXd var_diag;    // per-bin variance
};

Marginal forward_marginal(const AnchoredGaussian& anchor, const MelGrid& x0,
                          const NoiseSchedule& sched, double t);

struct ForwardSample {
    MelGrid x_t;
    MelGrid xi;  // the N(0,I) draw, needed as the score-matching target
};

ForwardSample sample_forward(const AnchoredGaussian& anchor, const MelGrid& x0,
                             const NoiseSchedule& sched, double t, Rng& rng);

MelGrid true_conditional_score(const MelGrid& x_t, const MelGrid& mean,
                               const Eigen::VectorXd& var_diag);

MelGrid simulate_forward_em(const AnchoredGaussian& anchor, const MelGrid& x0,
                            const NoiseSchedule& sched, int n_steps, Rng& rng);

// One backward Euler-Maruyama step of the reverse-time SDE from t to t - dt.
MelGrid reverse_step_sde(const MelGrid& x, const MelGrid& score, const AnchoredGaussian& anchor,
                         const NoiseSchedule& sched, double t, double dt, Rng& rng);

// One backward Euler step of the probability-flow ODE; deterministic.
MelGrid reverse_step_ode(const MelGrid& x, const MelGrid& score, const AnchoredGaussian& anchor,
                         const NoiseSchedule& sched, double t, double dt);

enum class SamplerMode { Sde, Ode };

using ScoreFn = std::function<MelGrid(const MelGrid&, double)>;

// Draws X_T ~ N(mu, Sigma / temperature) and integrates from t_max down to t_min.
MelGrid sample_reverse(const ScoreFn& score_fn, const AnchoredGaussian& anchor,
                       const NoiseSchedule& sched, Eigen::Index frames, int n_steps,
                       SamplerMode mode, double temperature, Rng& rng);

}  // namespace gdsp
