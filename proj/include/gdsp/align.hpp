#pragma once

#include "gdsp/types.hpp"

namespace gdsp {

// Monotonic surjective map from frames to phoneme positions.
// frame_to_phoneme is 1-based, non-decreasing, starts at 1, ends at L,
// and increments by at most 1 between consecutive frames.
struct Alignment {
    std::vector<int> frame_to_phoneme;

    int frames() const { return static_cast<int>(frame_to_phoneme.size()); }
    int phonemes() const { return frame_to_phoneme.empty() ? 0 : frame_to_phoneme.back(); }
    bool valid() const;
};

// Per-phoneme encoder outputs, L x bins.
using EncodedMeans = Eigen::MatrixXd;

// Sum over frames of log N(y_j; mu_tilde[A(j)], I).
double alignment_log_likelihood(const MelGrid& y, const EncodedMeans& mu_tilde,
                                const Alignment& a);

// Likelihood-optimal alignment via the Viterbi-style DP; ties prefer staying
// on the current phoneme.
Alignment mas_search(const MelGrid& y, const EncodedMeans& mu_tilde);

// Exhaustive-enumeration oracle; refuses instances with more than 1e6
// candidate alignments. Also reports how many candidates were scored.
Alignment brute_force_alignment(const MelGrid& y, const EncodedMeans& mu_tilde,
                                std::uint64_t* n_considered = nullptr);

// d_i = log(#frames aligned to phoneme i); requires surjectivity.
Eigen::VectorXd durations_from_alignment(const Alignment& a, int n_phonemes);

// Repeats mu_tilde row i counts[i] times, in order.
MelGrid expand(const EncodedMeans& mu_tilde, const std::vector<int>& counts);

}  // namespace gdsp
