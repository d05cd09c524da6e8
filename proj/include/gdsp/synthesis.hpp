#pragma once

#include "gdsp/corpus.hpp"
#include "gdsp/model.hpp"
#include "gdsp/schedule_sde.hpp"

namespace gdsp {

struct SynthConfig {
    int n_steps = 50;
    SamplerMode mode = SamplerMode::Ode;
    double temperature = 1.5;
    NoiseSchedule sched;
};

struct SynthResult {
    MelGrid mel;
    std::vector<int> durations;  // frame counts actually used
};

// encode -> predict durations -> expand -> score-guided reverse diffusion.
SynthResult synthesize(const std::vector<int>& tokens, std::optional<int> speaker,
                       std::optional<int> language, const ModelParams& p,
                       const SynthConfig& cfg, Rng& rng);

// Cross-lingual inference: language-B tokens are transliterated into the
// language-A symbol set and synthesized with a language-A speaker.
SynthResult synthesize_cross(const std::vector<int>& tokens_b, const PhonemeVocab& vocab,
                             std::optional<int> speaker_a, std::optional<int> language_a,
                             const ModelParams& p, const SynthConfig& cfg, Rng& rng);

}  // namespace gdsp
