#include "gdsp/schedule_sde.hpp"

#include <cmath>

namespace gdsp {

namespace {

void check_time(const NoiseSchedule& sched, double t) {
    if (!(t >= 0.0 && t <= sched.t_max))
        throw std::domain_error("time " + std::to_string(t) + " outside [0, " +
                                std::to_string(sched.t_max) + "]");
}

void check_shapes(const AnchoredGaussian& anchor, const MelGrid& x0) {
    anchor.validate();
    if (x0.cols() != anchor.mu.size())
        throw std::invalid_argument("grid has " + std::to_string(x0.cols()) +
                                    " bins but anchor has " + std::to_string(anchor.mu.size()));
}

}  // namespace

double beta_at(const NoiseSchedule& sched, double t) {
    check_time(sched, t);
    return sched.beta0 + (sched.beta1 - sched.beta0) * (t / sched.t_max);
}

double cum_noise(const NoiseSchedule& sched, double t) {
    check_time(sched, t);
    return sched.beta0 * t + (sched.beta1 - sched.beta0) * t * t / (2.0 * sched.t_max);
}

double lambda_at(const NoiseSchedule& sched, double t) {
    return 1.0 - std::exp(-cum_noise(sched, t));
}

Marginal forward_marginal(const AnchoredGaussian& anchor, const MelGrid& x0,
                          const NoiseSchedule& sched, double t) {
    check_shapes(anchor, x0);
    const double big_b = cum_noise(sched, t);
    Marginal m;
    m.mean.resize(x0.rows(), x0.cols());
    m.var_diag.resize(x0.cols());
    for (Eigen::Index j = 0; j < x0.cols(); ++j) {
        const double sigma = anchor.sigma_diag(j);
        const double decay = std::exp(-big_b / (2.0 * sigma));
        m.mean.col(j) = anchor.mu(j) + (x0.col(j).array() - anchor.mu(j)) * decay;
        m.var_diag(j) = sigma * (1.0 - std::exp(-big_b / sigma));
    }
    return m;
}

ForwardSample sample_forward(const AnchoredGaussian& anchor, const MelGrid& x0,
                             const NoiseSchedule& sched, double t, Rng& rng) {
    Marginal m = forward_marginal(anchor, x0, sched, t);
    ForwardSample s;
    s.xi = standard_normal(x0.rows(), x0.cols(), rng);
    s.x_t = m.mean + (s.xi.array().rowwise() * m.var_diag.array().sqrt().transpose()).matrix();
    return s;
}

MelGrid true_conditional_score(const MelGrid& x_t, const MelGrid& mean,
                               const Eigen::VectorXd& var_diag) {
    require(x_t.rows() == mean.rows() && x_t.cols() == mean.cols(),
            "true_conditional_score: shape mismatch");
    if (!(var_diag.array() > 0.0).all())
        throw std::domain_error("true_conditional_score: zero or negative variance");
    MelGrid s = mean - x_t;
    for (Eigen::Index j = 0; j < s.cols(); ++j) s.col(j) /= var_diag(j);
    return s;
}

MelGrid simulate_forward_em(const AnchoredGaussian& anchor, const MelGrid& x0,
                            const NoiseSchedule& sched, int n_steps, Rng& rng) {
    check_shapes(anchor, x0);
    require(n_steps >= 1, "simulate_forward_em: n_steps must be >= 1");
    const double dt = sched.t_max / n_steps;
    MelGrid x = x0;
    for (int k = 0; k < n_steps; ++k) {
        const double t = k * dt;
        const double beta = sched.beta0 + (sched.beta1 - sched.beta0) * (t / sched.t_max);
        MelGrid z = standard_normal(x.rows(), x.cols(), rng);
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double inv_sigma = 1.0 / anchor.sigma_diag(j);
            x.col(j) = x.col(j).array() -
                       0.5 * inv_sigma * (x.col(j).array() - anchor.mu(j)) * beta * dt +
                       std::sqrt(beta * dt) * z.col(j).array();
        }
    }
    return x;
}

MelGrid reverse_step_sde(const MelGrid& x, const MelGrid& score, const AnchoredGaussian& anchor,
                         const NoiseSchedule& sched, double t, double dt, Rng& rng) {
    require(dt > 0.0, "reverse_step_sde: dt must be > 0");
    if (t - dt < sched.t_min - 1e-12)
        throw std::domain_error("reverse_step_sde: step past t_min");
    const double beta = beta_at(sched, t);
    MelGrid z = standard_normal(x.rows(), x.cols(), rng);
    MelGrid out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double inv_sigma = 1.0 / anchor.sigma_diag(j);
        auto drift = -0.5 * inv_sigma * (x.col(j).array() - anchor.mu(j)) * beta -
                     beta * score.col(j).array();
        out.col(j) = x.col(j).array() - drift * dt + std::sqrt(beta * dt) * z.col(j).array();
    }
    return out;
}

MelGrid reverse_step_ode(const MelGrid& x, const MelGrid& score, const AnchoredGaussian& anchor,
                         const NoiseSchedule& sched, double t, double dt) {
    require(dt > 0.0, "reverse_step_ode: dt must be > 0");
    if (t - dt < sched.t_min - 1e-12)
        throw std::domain_error("reverse_step_ode: step past t_min");
    const double beta = beta_at(sched, t);
    MelGrid out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double inv_sigma = 1.0 / anchor.sigma_diag(j);
        auto drift = -inv_sigma * (x.col(j).array() - anchor.mu(j)) - score.col(j).array();
        out.col(j) = x.col(j).array() - 0.5 * drift * beta * dt;
    }
    return out;
}

MelGrid sample_reverse(const ScoreFn& score_fn, const AnchoredGaussian& anchor,
                       const NoiseSchedule& sched, Eigen::Index frames, int n_steps,
                       SamplerMode mode, double temperature, Rng& rng) {
    anchor.validate();
    require(n_steps >= 1, "sample_reverse: n_steps must be >= 1");
    require(temperature > 0.0, "sample_reverse: temperature must be > 0");
    const Eigen::Index bins = anchor.mu.size();
    MelGrid z = standard_normal(frames, bins, rng);
    MelGrid x(frames, bins);
    for (Eigen::Index j = 0; j < bins; ++j)
        x.col(j) = anchor.mu(j) +
                   std::sqrt(anchor.sigma_diag(j) / temperature) * z.col(j).array();

    const double dt = (sched.t_max - sched.t_min) / n_steps;
    for (int k = 0; k < n_steps; ++k) {
        const double t = sched.t_max - k * dt;
        MelGrid score = score_fn(x, t);
        if (!score.allFinite())
            throw std::runtime_error("sample_reverse: non-finite score at step " +
                                     std::to_string(k));
        x = (mode == SamplerMode::Sde)
                ? reverse_step_sde(x, score, anchor, sched, t, dt, rng)
                : reverse_step_ode(x, score, anchor, sched, t, dt);
    }
    return x;
}

}  // namespace gdsp
