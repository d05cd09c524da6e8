#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gdsp/factorization.hpp"

using namespace gdsp;

TEST_CASE("make_ci_joint: degenerate cards give the point mass") {
    Rng rng(1);
    DiscreteJoint j = make_ci_joint({1, 1, 1, 1}, rng);
    REQUIRE(j.table.size() == 1);
    CHECK(j.table[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("make_ci_joint: normalization and CI by construction") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        DiscreteJoint j = make_ci_joint({4, 3, 3, 2}, rng);
        double sum = 0.0;
        for (double v : j.table) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-12);
        j.validate();

        // direct CI check: P(pt,at | ps,as) must not depend on as
        for (int ps = 0; ps < 4; ++ps) {
            std::vector<double> ref;
            for (int as = 0; as < 3; ++as) {
                double marg = 0.0;
                for (int pt = 0; pt < 3; ++pt)
                    for (int at = 0; at < 2; ++at) marg += j.at(ps, as, pt, at);
                std::vector<double> cond;
                for (int pt = 0; pt < 3; ++pt)
                    for (int at = 0; at < 2; ++at) cond.push_back(j.at(ps, as, pt, at) / marg);
                if (as == 0)
                    ref = cond;
                else
                    for (std::size_t i = 0; i < cond.size(); ++i)
                        CHECK(std::abs(cond[i] - ref[i]) < 1e-12);
            }
        }
    }
}

TEST_CASE("make_non_ci_joint: still a distribution, strength->0 recovers CI") {
    Rng rng(3);
    DiscreteJoint j = make_non_ci_joint({3, 2, 2, 2}, rng, 0.5);
    j.validate();

    Rng map_rng(4);
    SpeechMaps maps = SpeechMaps::random_general({3, 2, 2, 2}, map_rng);
    for (double strength : {1e-6, 1e-4}) {
        Rng r(7);
        DiscreteJoint weak = make_non_ci_joint({3, 2, 2, 2}, r, strength);
        FactorizationCheck chk = check_factorization(weak, maps);
        CHECK(chk.max_abs_diff < 10 * strength);
    }
    CHECK_THROWS_AS((void)make_non_ci_joint({3, 1, 2, 2}, rng, 0.5), std::invalid_argument);
}

TEST_CASE("check_factorization: exact zero on a dyadic product joint") {
    // all four variables independent with probability 1/2 each: every entry is
    // exactly 1/16, and every conditional equals the marginal with no rounding
    DiscreteJoint j;
    j.cards = {2, 2, 2, 2};
    j.table.assign(16, 1.0 / 16.0);
    Rng map_rng(5);
    FactorizationCheck chk =
        check_factorization(j, SpeechMaps::random_general({2, 2, 2, 2}, map_rng));
    CHECK(chk.max_abs_diff == 0.0);
}

TEST_CASE("check_factorization: CI joints satisfy the identity in both regimes") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::array<int, 4> cards{4, 3, 3, 2};
        DiscreteJoint j = make_ci_joint(cards, rng);
        CHECK(check_factorization(j, SpeechMaps::strict_identity(cards)).max_abs_diff < 1e-12);
        Rng rng2(seed + 1000);
        CHECK(check_factorization(j, SpeechMaps::random_general(cards, rng2)).max_abs_diff <
              1e-12);
    }
}

TEST_CASE("check_factorization: non-CI joints break the identity at strength 0.5") {
    const std::array<int, 4> cards{4, 3, 3, 2};
    int broken = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        DiscreteJoint j = make_non_ci_joint(cards, rng, 0.5);
        Rng rng2(seed + 5000);
        FactorizationCheck chk = check_factorization(j, SpeechMaps::random_general(cards, rng2));
        if (chk.max_abs_diff > 1e-6) ++broken;
    }
    CHECK(broken >= 95);
}

TEST_CASE("check_factorization: conditionals re-sum to one") {
    Rng rng(11);
    const std::array<int, 4> cards{3, 2, 4, 2};
    DiscreteJoint j = make_ci_joint(cards, rng);
    SpeechMaps maps = SpeechMaps::strict_identity(cards);
    FactorizationCheck chk = check_factorization(j, maps);
    for (int u = 0; u < maps.n_source_symbols; ++u) {
        double lhs_sum = 0.0, rhs_sum = 0.0;
        bool defined = true;
        for (int v = 0; v < maps.n_target_symbols; ++v) {
            if (std::isnan(chk.lhs(v, u))) {
                defined = false;
                break;
            }
            lhs_sum += chk.lhs(v, u);
            rhs_sum += chk.rhs(v, u);
        }
        if (defined) {
            CHECK(std::abs(lhs_sum - 1.0) < 1e-12);
            CHECK(std::abs(rhs_sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("check_factorization: non-injective f_s rejected") {
    Rng rng(12);
    const std::array<int, 4> cards{2, 2, 2, 2};
    DiscreteJoint j = make_ci_joint(cards, rng);
    SpeechMaps maps = SpeechMaps::strict_identity(cards);
    for (int& v : maps.f_s) v = 0;  // collapses distinct phonemes
    CHECK_THROWS_WITH_AS((void)check_factorization(j, maps), doctest::Contains("injective"),
                         std::invalid_argument);
}
