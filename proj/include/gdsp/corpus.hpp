#pragma once

#include <map>
#include <unordered_map>

#include "gdsp/types.hpp"

namespace gdsp {

// Two disjoint symbol sets ('A' and 'B') with an exact transliteration
// bijection from language-B symbols to language-A symbol strings.
struct PhonemeVocab {
    std::vector<std::string> symbols;
    std::vector<char> lang;                      // per symbol, 'A' or 'B'
    std::map<int, std::vector<int>> translit;    // B id -> A id sequence

    int size() const { return static_cast<int>(symbols.size()); }
    int id_of(const std::string& symbol) const;
    std::vector<int> tokenize(const std::string& text) const;
    std::vector<int> transliterate(const std::vector<int>& ids) const;
    std::string detokenize(const std::vector<int>& ids) const;
};

struct Speaker {
    std::string name;
    char lang_affinity = 'A';
    Eigen::VectorXd gain;     // per-bin multiplicative, > 0
    Eigen::VectorXd contour;  // per-bin additive
};

struct SyntheticSpec {
    int bins = 16;
    double sigma_data = 0.05;
    PhonemeVocab vocab;
    std::vector<Eigen::VectorXd> templates;  // per symbol, bins wide
    std::vector<int> base_duration;          // per symbol, frames in 2..6
    std::vector<Speaker> speakers;

    void validate() const;
    std::string to_json() const;
    static SyntheticSpec from_json(const std::string& text);
};

// Builds a vocab of `symbols_per_language` symbols per language, templates with
// enforced pairwise separation (> 4 * sigma_data * sqrt(bins)), and speakers
// with mild invertible accent transforms split across language affinities.
SyntheticSpec make_default_spec(int bins, int symbols_per_language, int n_speakers,
                                double sigma_data, Rng& rng);

struct ManifestEntry {
    std::string id;
    std::string tokens;  // whitespace-separated symbols
    int speaker = 0;
    char language = 'A';
    std::string mel_path;
    std::vector<int> durations;  // ground truth, per token
};

// Noiseless render: per token, its accented template repeated for its duration.
MelGrid render_utterance(const SyntheticSpec& spec, const std::vector<int>& token_ids,
                         int speaker, const std::vector<int>& durations);

std::vector<ManifestEntry> generate_corpus(const SyntheticSpec& spec, int n_utts, int len_lo,
                                           int len_hi, Rng& rng, const std::string& out_dir);

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);
std::vector<ManifestEntry> load_manifest(const std::string& path);

// MEL1 format: magic "MEL1", u32 frames, u32 bins, row-major float32 LE.
void save_mel(const MelGrid& grid, const std::string& path);
MelGrid load_mel(const std::string& path);

// Toy ASR: minimum-cost monotonic segmentation against accent-normalized
// templates, per-segment length >= 2, no adjacent repeats. When speaker < 0
// every speaker's normalization is tried and the cheapest decode wins.
std::vector<int> decode_tokens(const MelGrid& mel, const SyntheticSpec& spec, int speaker = -1);

// Exhaustive oracle for short inputs (test use).
std::vector<int> decode_tokens_brute(const MelGrid& mel, const SyntheticSpec& spec, int speaker);

}  // namespace gdsp
