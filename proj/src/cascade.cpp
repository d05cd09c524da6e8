#include "gdsp/cascade.hpp"

#include <chrono>

namespace gdsp {

std::vector<int> Dictionary::translate(const std::vector<int>& tokens) const {
    std::vector<int> out;
    for (int t : tokens) {
        auto it = a_to_b.find(t);
        if (it == a_to_b.end())
            throw std::invalid_argument("dictionary: no translation for token id " +
                                        std::to_string(t));
        out.push_back(it->second);
    }
    return out;
}

Dictionary Dictionary::from_vocab(const PhonemeVocab& vocab) {
    Dictionary d;
    for (const auto& [b_id, a_seq] : vocab.translit) {
        require(a_seq.size() == 1, "Dictionary::from_vocab: needs one-to-one transliteration");
        auto [it, inserted] = d.a_to_b.emplace(a_seq[0], b_id);
        require(inserted, "Dictionary::from_vocab: transliteration is not bijective");
    }
    return d;
}

CascadeResult run_cascade(const MelGrid& source_mel, const SyntheticSpec& spec,
                          const Dictionary& dict, const ModelParams& tts_params,
                          std::optional<int> target_speaker, std::optional<int> target_language,
                          const SynthConfig& synth_cfg, Rng& rng) {
    using clock = std::chrono::steady_clock;
    require(source_mel.rows() >= 2, "run_cascade: empty source mel");
    CascadeResult res;

    auto t0 = clock::now();
    res.decoded_tokens = decode_tokens(source_mel, spec);
    auto t1 = clock::now();
    res.translated_tokens = dict.translate(res.decoded_tokens);
    auto t2 = clock::now();
    SynthResult synth = synthesize(res.translated_tokens, target_speaker, target_language,
                                   tts_params, synth_cfg, rng);
    auto t3 = clock::now();

    res.output_mel = std::move(synth.mel);
    res.durations = std::move(synth.durations);
    res.asr_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    res.mt_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t2 - t1).count();
    res.tts_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t3 - t2).count();
    return res;
}

double token_error_rate(const std::vector<int>& ref, const std::vector<int>& hyp) {
    require(!ref.empty(), "token_error_rate: empty reference");
    const std::size_t n = ref.size(), m = hyp.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[m]) / static_cast<double>(n);
}

}  // namespace gdsp
