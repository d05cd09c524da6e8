#pragma once

#include "gdsp/synthesis.hpp"

namespace gdsp {

// Token-for-token bijective translation map.
struct Dictionary {
    std::map<int, int> a_to_b;

    std::vector<int> translate(const std::vector<int>& tokens) const;
    // Pairs a_i <-> b_i via the vocab's transliteration bijection.
    static Dictionary from_vocab(const PhonemeVocab& vocab);
};

struct CascadeResult {
    std::vector<int> decoded_tokens;     // ASR output
    std::vector<int> translated_tokens;  // MT output
    MelGrid output_mel;                  // TTS output
    std::vector<int> durations;
    long asr_ms = 0, mt_ms = 0, tts_ms = 0;
};

// ASR -> dictionary MT -> diffusion TTS with a language-B speaker.
CascadeResult run_cascade(const MelGrid& source_mel, const SyntheticSpec& spec,
                          const Dictionary& dict, const ModelParams& tts_params,
                          std::optional<int> target_speaker, std::optional<int> target_language,
                          const SynthConfig& synth_cfg, Rng& rng);

// Levenshtein distance with unit costs, divided by |ref|.
double token_error_rate(const std::vector<int>& ref, const std::vector<int>& hyp);

}  // namespace gdsp
