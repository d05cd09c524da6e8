#include "gdsp/factorization.hpp"

#include <cmath>

namespace gdsp {

namespace {

void check_cards(const std::array<int, 4>& cards) {
    for (int c : cards) require(c >= 1 && c <= 6, "factorization: cardinalities must be in 1..6");
}

// Uniform sample from the probability simplex.
std::vector<double> random_simplex(int n, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& v : p) {
        v = e(rng);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

void DiscreteJoint::validate() const {
    check_cards(cards);
    std::size_t n = 1;
    for (int c : cards) n *= static_cast<std::size_t>(c);
    require(table.size() == n, "DiscreteJoint: table size mismatch");
    double sum = 0.0;
    for (double v : table) {
        require(v >= 0.0, "DiscreteJoint: negative entry");
        sum += v;
    }
    require(std::abs(sum - 1.0) < 1e-12, "DiscreteJoint: table does not sum to 1");
}

SpeechMaps SpeechMaps::strict_identity(const std::array<int, 4>& cards) {
    check_cards(cards);
    SpeechMaps m;
    m.n_source_symbols = cards[0];
    m.n_target_symbols = cards[2] * cards[3];
    m.f_s.resize(cards[0] * cards[1]);
    for (int ps = 0; ps < cards[0]; ++ps)
        for (int as = 0; as < cards[1]; ++as) m.f_s[ps * cards[1] + as] = ps;
    m.f_t.resize(cards[2] * cards[3]);
    for (int i = 0; i < cards[2] * cards[3]; ++i) m.f_t[i] = i;
    return m;
}

SpeechMaps SpeechMaps::random_general(const std::array<int, 4>& cards, Rng& rng) {
    check_cards(cards);
    SpeechMaps m;
    // keep f_s injective in p_s (distinct phonemes never collide) but let the
    // symbol also depend on a_s
    m.n_source_symbols = cards[0] * cards[1];
    m.f_s.resize(cards[0] * cards[1]);
    for (int ps = 0; ps < cards[0]; ++ps)
        for (int as = 0; as < cards[1]; ++as) m.f_s[ps * cards[1] + as] = ps * cards[1] + as;
    std::uniform_int_distribution<int> pick(0, std::max(1, cards[2] * cards[3] / 2) - 1);
    m.n_target_symbols = std::max(1, cards[2] * cards[3] / 2);
    m.f_t.resize(cards[2] * cards[3]);
    for (int& v : m.f_t) v = pick(rng);
    return m;
}

DiscreteJoint make_ci_joint(const std::array<int, 4>& cards, Rng& rng) {
    check_cards(cards);
    DiscreteJoint j;
    j.cards = cards;
    j.table.assign(static_cast<std::size_t>(cards[0]) * cards[1] * cards[2] * cards[3], 0.0);

    std::vector<double> p_ps = random_simplex(cards[0], rng);
    std::vector<std::vector<double>> p_as(cards[0]);
    std::vector<std::vector<double>> p_tgt(cards[0]);
    for (int ps = 0; ps < cards[0]; ++ps) {
        p_as[ps] = random_simplex(cards[1], rng);
        p_tgt[ps] = random_simplex(cards[2] * cards[3], rng);
    }
    for (int ps = 0; ps < cards[0]; ++ps)
        for (int as = 0; as < cards[1]; ++as)
            for (int pt = 0; pt < cards[2]; ++pt)
                for (int at = 0; at < cards[3]; ++at)
                    j.at(ps, as, pt, at) =
                        p_ps[ps] * p_as[ps][as] * p_tgt[ps][pt * cards[3] + at];
    return j;
}

DiscreteJoint make_non_ci_joint(const std::array<int, 4>& cards, Rng& rng, double strength) {
    check_cards(cards);
    require(strength > 0.0 && strength <= 1.0, "make_non_ci_joint: strength must be in (0,1]");
    require(cards[1] >= 2, "make_non_ci_joint: need |A_s| >= 2 to express dependence");

    DiscreteJoint base = make_ci_joint(cards, rng);
    // a fresh conditional per (p_s, a_s) pair
    std::vector<std::vector<double>> dep(cards[0] * cards[1]);
    for (auto& d : dep) d = random_simplex(cards[2] * cards[3], rng);

    // recover P(p_s, a_s) and the CI conditional, then mix
    DiscreteJoint j;
    j.cards = cards;
    j.table.assign(base.table.size(), 0.0);
    for (int ps = 0; ps < cards[0]; ++ps)
        for (int as = 0; as < cards[1]; ++as) {
            double marg = 0.0;
            for (int pt = 0; pt < cards[2]; ++pt)
                for (int at = 0; at < cards[3]; ++at) marg += base.at(ps, as, pt, at);
            for (int pt = 0; pt < cards[2]; ++pt)
                for (int at = 0; at < cards[3]; ++at) {
                    const double ci_cond = marg > 0.0 ? base.at(ps, as, pt, at) / marg : 0.0;
                    const double mixed = (1.0 - strength) * ci_cond +
                                         strength * dep[ps * cards[1] + as][pt * cards[3] + at];
                    j.at(ps, as, pt, at) = marg * mixed;
                }
        }
    return j;
}

FactorizationCheck check_factorization(const DiscreteJoint& joint, const SpeechMaps& maps) {
    joint.validate();
    const auto& cards = joint.cards;
    require(static_cast<int>(maps.f_s.size()) == cards[0] * cards[1],
            "check_factorization: f_s domain mismatch");
    require(static_cast<int>(maps.f_t.size()) == cards[2] * cards[3],
            "check_factorization: f_t domain mismatch");
    // f_s' requires p_s recoverable from the source symbol
    for (int ps = 0; ps < cards[0]; ++ps)
        for (int ps2 = ps + 1; ps2 < cards[0]; ++ps2)
            for (int as = 0; as < cards[1]; ++as)
                for (int as2 = 0; as2 < cards[1]; ++as2)
                    require(maps.f_s[ps * cards[1] + as] != maps.f_s[ps2 * cards[1] + as2],
                            "check_factorization: f_s is not injective in p_s");

    const int n_src = maps.n_source_symbols;
    const int n_tgt = maps.n_target_symbols;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // P(source symbol), P(target symbol, source symbol), P(p_s, source symbol),
    // P(target symbol, p_s), P(p_s)
    Eigen::VectorXd p_src = Eigen::VectorXd::Zero(n_src);
    Eigen::MatrixXd p_tgt_src = Eigen::MatrixXd::Zero(n_tgt, n_src);
    Eigen::MatrixXd p_ps_src = Eigen::MatrixXd::Zero(cards[0], n_src);
    Eigen::MatrixXd p_tgt_ps = Eigen::MatrixXd::Zero(n_tgt, cards[0]);
    Eigen::VectorXd p_ps = Eigen::VectorXd::Zero(cards[0]);

    for (int ps = 0; ps < cards[0]; ++ps)
        for (int as = 0; as < cards[1]; ++as) {
            const int u = maps.f_s[ps * cards[1] + as];
            for (int pt = 0; pt < cards[2]; ++pt)
                for (int at = 0; at < cards[3]; ++at) {
                    const int v = maps.f_t[pt * cards[3] + at];
                    const double p = joint.at(ps, as, pt, at);
                    p_src(u) += p;
                    p_tgt_src(v, u) += p;
                    p_ps_src(ps, u) += p;
                    p_tgt_ps(v, ps) += p;
                    p_ps(ps) += p;
                }
        }

    FactorizationCheck out;
    out.lhs = Eigen::MatrixXd::Constant(n_tgt, n_src, nan);
    out.rhs = Eigen::MatrixXd::Constant(n_tgt, n_src, nan);
    for (int u = 0; u < n_src; ++u) {
        if (p_src(u) <= 0.0) continue;  // conditioning on a null symbol: undefined
        for (int v = 0; v < n_tgt; ++v) {
            out.lhs(v, u) = p_tgt_src(v, u) / p_src(u);
            double rhs = 0.0;
            for (int ps = 0; ps < cards[0]; ++ps) {
                if (p_ps(ps) <= 0.0) continue;
                rhs += (p_tgt_ps(v, ps) / p_ps(ps)) * (p_ps_src(ps, u) / p_src(u));
            }
            out.rhs(v, u) = rhs;
            out.max_abs_diff = std::max(out.max_abs_diff, std::abs(out.lhs(v, u) - rhs));
        }
    }
    return out;
}

}  // namespace gdsp
