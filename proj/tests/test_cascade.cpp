#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gdsp/cascade.hpp"

using namespace gdsp;

namespace {

// Independent quadratic-DP Levenshtein, the second-implementation oracle.
double ter_oracle(const std::vector<int>& ref, const std::vector<int>& hyp) {
    const std::size_t n = ref.size(), m = hyp.size();
    std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
    for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0u : 1u)});
    return double(d[n][m]) / double(n);
}

}  // namespace

TEST_CASE("token_error_rate: direct values") {
    CHECK(token_error_rate({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(token_error_rate({1, 2, 3}, {1, 3}) == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(token_error_rate({5}, {}) == 1.0);
    CHECK_THROWS_AS((void)token_error_rate({}, {1}), std::invalid_argument);
}

TEST_CASE("token_error_rate: matches the independent DP on 1000 random pairs") {
    Rng rng(1);
    std::uniform_int_distribution<int> len(1, 12), sym(0, 5);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<int> ref(len(rng)), hyp(len(rng) - 1);
        for (int& v : ref) v = sym(rng);
        for (int& v : hyp) v = sym(rng);
        CHECK(token_error_rate(ref, hyp) == doctest::Approx(ter_oracle(ref, hyp)).epsilon(1e-14));
    }
}

TEST_CASE("dictionary: built from the vocab bijection, totality and errors") {
    Rng rng(2);
    SyntheticSpec spec = make_default_spec(6, 3, 2, 0.05, rng);
    Dictionary dict = Dictionary::from_vocab(spec.vocab);
    CHECK(dict.translate({0, 1, 2}) == std::vector<int>{3, 4, 5});
    CHECK_THROWS_AS((void)dict.translate({3}), std::invalid_argument);  // B id is not in domain

    // token-for-token: output length equals input length
    CHECK(dict.translate({2, 0, 2}).size() == 3);
}

TEST_CASE("cascade stages: ASR is exact on noiseless input, MT is deterministic") {
    Rng rng(3);
    SyntheticSpec spec = make_default_spec(8, 4, 2, 0.05, rng);
    Dictionary dict = Dictionary::from_vocab(spec.vocab);

    ModelDims dims;
    dims.vocab = spec.vocab.size();
    dims.speakers = int(spec.speakers.size());
    dims.embed = 8;
    dims.bins = spec.bins;
    dims.hidden = 16;
    dims.t_embed = 8;
    ModelParams p = ModelParams::init(dims, rng);

    std::vector<int> tokens{0, 2, 1};
    MelGrid source = render_utterance(spec, tokens, 0, {3, 2, 4});
    SynthConfig cfg;
    cfg.n_steps = 4;
    Rng r(4);
    CascadeResult res = run_cascade(source, spec, dict, p, 1, 1, cfg, r);
    CHECK(res.decoded_tokens == tokens);
    CHECK(res.translated_tokens == dict.translate(res.decoded_tokens));
    CHECK(res.translated_tokens.size() == res.decoded_tokens.size());
    CHECK(res.output_mel.rows() >= int(res.translated_tokens.size()));

    // determinism given seeds
    Rng r2(4);
    CascadeResult res2 = run_cascade(source, spec, dict, p, 1, 1, cfg, r2);
    CHECK((res.output_mel - res2.output_mel).norm() == 0.0);
}
