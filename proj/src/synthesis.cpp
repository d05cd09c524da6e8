#include "gdsp/synthesis.hpp"

#include <cmath>

namespace gdsp {

SynthResult synthesize(const std::vector<int>& tokens, std::optional<int> speaker,
                       std::optional<int> language, const ModelParams& p,
                       const SynthConfig& cfg, Rng& rng) {
    require(!tokens.empty(), "synthesize: empty token sequence");
    require(cfg.n_steps >= 1, "synthesize: n_steps must be >= 1");

    EncodedMeans mu_tilde = encode(tokens, speaker, language, p);
    Eigen::VectorXd log_d = predict_log_durations(mu_tilde, p);

    SynthResult res;
    for (Eigen::Index i = 0; i < log_d.size(); ++i) {
        // round half up, floor 1
        const int c = static_cast<int>(std::floor(std::exp(log_d(i)) + 0.5));
        res.durations.push_back(std::max(1, c));
    }
    MelGrid mu = expand(mu_tilde, res.durations);

    // The anchor mu varies per frame while sample_reverse anchors at a per-bin
    // vector; run the dynamics in centered coordinates z = x - mu, whose law is
    // the same process anchored at zero with score(z + mu, mu, t).
    AnchoredGaussian anchor = AnchoredGaussian::unit(p.dims.bins);
    ScoreFn score_fn = [&](const MelGrid& z, double t) { return score(z + mu, mu, t, p); };
    MelGrid z = sample_reverse(score_fn, anchor, cfg.sched, mu.rows(), cfg.n_steps, cfg.mode,
                               cfg.temperature, rng);
    res.mel = z + mu;
    return res;
}

SynthResult synthesize_cross(const std::vector<int>& tokens_b, const PhonemeVocab& vocab,
                             std::optional<int> speaker_a, std::optional<int> language_a,
                             const ModelParams& p, const SynthConfig& cfg, Rng& rng) {
    return synthesize(vocab.transliterate(tokens_b), speaker_a, language_a, p, cfg, rng);
}

}  // namespace gdsp
