#pragma once

#include <array>

#include "gdsp/types.hpp"

namespace gdsp {

// Exact probability table over (source phoneme, source acoustic,
// target phoneme, target acoustic). Cardinalities capped at 6 so that
// every check is exhaustive.
struct DiscreteJoint {
    std::array<int, 4> cards;  // |P_s|, |A_s|, |P_t|, |A_t|
    std::vector<double> table;

    double& at(int ps, int as, int pt, int at) {
        return table[((ps * cards[1] + as) * cards[2] + pt) * cards[3] + at];
    }
    double at(int ps, int as, int pt, int at) const {
        return table[((ps * cards[1] + as) * cards[2] + pt) * cards[3] + at];
    }
    void validate() const;
};

// Deterministic speech maps. Strict regime: f_s depends on p_s only, which is
// what makes the restriction map f_s' well defined.
struct SpeechMaps {
    int n_source_symbols = 0;
    int n_target_symbols = 0;
    std::vector<int> f_s;  // indexed ps * |A_s| + as
    std::vector<int> f_t;  // indexed pt * |A_t| + at

    static SpeechMaps strict_identity(const std::array<int, 4>& cards);
    static SpeechMaps random_general(const std::array<int, 4>& cards, Rng& rng);
};

// Joint with (p_t, a_t) independent of a_s given p_s, by construction.
DiscreteJoint make_ci_joint(const std::array<int, 4>& cards, Rng& rng);

// Negative control: mixes in an a_s-dependent conditional with the given weight.
DiscreteJoint make_non_ci_joint(const std::array<int, 4>& cards, Rng& rng, double strength);

struct FactorizationCheck {
    Eigen::MatrixXd lhs;  // target symbol x source symbol, NaN where undefined
    Eigen::MatrixXd rhs;
    double max_abs_diff = 0.0;
};

// LHS: P(target speech | source speech) by direct summation.
// RHS: sum over p_s of P(target speech | p_s) P(p_s | source speech).
FactorizationCheck check_factorization(const DiscreteJoint& joint, const SpeechMaps& maps);

}  // namespace gdsp
