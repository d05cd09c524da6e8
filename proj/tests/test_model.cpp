#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gdsp/model.hpp"

using namespace gdsp;

namespace {

ModelDims small_dims() {
    ModelDims d;
    d.vocab = 6;
    d.speakers = 2;
    d.embed = 5;
    d.bins = 4;
    d.hidden = 8;
    d.t_embed = 6;
    return d;
}

MelGrid random_grid(Eigen::Index frames, Eigen::Index bins, Rng& rng) {
    std::normal_distribution<double> n01;
    MelGrid g(frames, bins);
    for (Eigen::Index i = 0; i < frames; ++i)
        for (Eigen::Index j = 0; j < bins; ++j) g(i, j) = n01(rng);
    return g;
}

}  // namespace

TEST_CASE("time_embedding: bounds and width") {
    Eigen::VectorXd e = time_embedding(0.37, 16);
    CHECK(e.size() == 16);
    CHECK(e.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(e(0) == doctest::Approx(std::sin(2 * M_PI * 0.37)).epsilon(1e-14));
    CHECK(e(1) == doctest::Approx(std::cos(2 * M_PI * 0.37)).epsilon(1e-14));
    CHECK_THROWS_AS((void)time_embedding(0.5, 7), std::invalid_argument);
}

TEST_CASE("encode: zero weights give constant projection-bias rows") {
    Rng rng(1);
    ModelParams p = ModelParams::init(small_dims(), rng);
    ModelParams zero = ModelParams::zeros_like(p);
    zero.proj_b.col(0) << 0.5, -1.0, 2.0, 0.25;
    EncodedMeans mu = encode({0, 3, 5}, std::nullopt, std::nullopt, zero);
    CHECK(mu.rows() == 3);
    for (int l = 0; l < 3; ++l)
        CHECK((mu.row(l).transpose() - zero.proj_b.col(0)).norm() == 0.0);
}

TEST_CASE("encode: kernel-3 locality") {
    Rng rng(2);
    ModelParams p = ModelParams::init(small_dims(), rng);
    std::vector<int> a{0, 1, 2, 3, 4, 5};
    std::vector<int> b{0, 1, 3, 2, 4, 5};  // swap positions 2 and 3
    EncodedMeans ma = encode(a, 0, 0, p);
    EncodedMeans mb = encode(b, 0, 0, p);
    // rows 0 and 5 are beyond kernel reach of the swap
    CHECK((ma.row(0) - mb.row(0)).norm() == 0.0);
    CHECK((ma.row(5) - mb.row(5)).norm() == 0.0);
    CHECK((ma.row(2) - mb.row(2)).norm() > 0.0);
}

TEST_CASE("encode: unknown ids rejected") {
    Rng rng(3);
    ModelParams p = ModelParams::init(small_dims(), rng);
    CHECK_THROWS_AS((void)encode({99}, std::nullopt, std::nullopt, p), std::invalid_argument);
    CHECK_THROWS_AS((void)encode({0}, 7, std::nullopt, p), std::invalid_argument);
    CHECK_THROWS_AS((void)encode({0}, std::nullopt, 5, p), std::invalid_argument);
}

TEST_CASE("encode: gradient of sum of squares vs finite differences") {
    Rng rng(4);
    ModelParams p = ModelParams::init(small_dims(), rng);
    std::vector<int> phonemes{1, 4, 2, 2};
    auto loss_fn = [&](const ModelParams& q) {
        return encode(phonemes, 1, 1, q).squaredNorm();
    };
    EncodeCache cache;
    EncodedMeans mu = encode(phonemes, 1, 1, p, &cache);
    ModelParams grads = ModelParams::zeros_like(p);
    encode_backward(2.0 * mu, cache, p, grads);
    GradCheckReport rep = grad_check(loss_fn, p, grads, 1e-4, 1e-4, rng);
    INFO("max rel error ", rep.max_rel_error, " at ", rep.worst_param);
    CHECK(rep.passed);
    CHECK(rep.n_checked >= 100);
}

TEST_CASE("predict_log_durations: zero weights, shape, gradient") {
    Rng rng(5);
    ModelParams p = ModelParams::init(small_dims(), rng);
    MelGrid mu = random_grid(4, p.dims.bins, rng);

    ModelParams zero = ModelParams::zeros_like(p);
    zero.dp_b2(0, 0) = 0.7;
    Eigen::VectorXd out = predict_log_durations(mu, zero);
    CHECK(out.size() == 4);
    CHECK((out.array() - 0.7).abs().maxCoeff() == 0.0);

    auto loss_fn = [&](const ModelParams& q) {
        return predict_log_durations(mu, q).squaredNorm();
    };
    DurationCache cache;
    Eigen::VectorXd pred = predict_log_durations(mu, p, &cache);
    ModelParams grads = ModelParams::zeros_like(p);
    predict_log_durations_backward(2.0 * pred, cache, p, grads);
    GradCheckReport rep = grad_check(loss_fn, p, grads, 1e-4, 1e-4, rng);
    INFO("max rel error ", rep.max_rel_error, " at ", rep.worst_param);
    CHECK(rep.passed);
}

TEST_CASE("score: zero weights give zero output, frame-wise locality") {
    Rng rng(6);
    ModelParams p = ModelParams::init(small_dims(), rng);
    MelGrid x = random_grid(5, p.dims.bins, rng);
    MelGrid mu = random_grid(5, p.dims.bins, rng);

    ModelParams zero = ModelParams::zeros_like(p);
    CHECK(score(x, mu, 0.3, zero).norm() == 0.0);

    MelGrid s1 = score(x, mu, 0.3, p);
    MelGrid x2 = x;
    x2.row(2).array() += 1.0;
    MelGrid s2 = score(x2, mu, 0.3, p);
    for (int j = 0; j < 5; ++j) {
        if (j == 2)
            CHECK((s1.row(j) - s2.row(j)).norm() > 0.0);
        else
            CHECK((s1.row(j) - s2.row(j)).norm() == 0.0);
    }
    CHECK_THROWS_AS((void)score(x, random_grid(4, p.dims.bins, rng), 0.3, p),
                    std::invalid_argument);
}

TEST_CASE("score: gradient over all weight groups") {
    Rng rng(7);
    ModelParams p = ModelParams::init(small_dims(), rng);
    MelGrid x = random_grid(3, p.dims.bins, rng);
    MelGrid mu = random_grid(3, p.dims.bins, rng);
    auto loss_fn = [&](const ModelParams& q) { return score(x, mu, 0.42, q).squaredNorm(); };
    ScoreCache cache;
    MelGrid out = score(x, mu, 0.42, p, &cache);
    ModelParams grads = ModelParams::zeros_like(p);
    (void)score_backward(2.0 * out, cache, p, grads);
    GradCheckReport rep = grad_check(loss_fn, p, grads, 1e-4, 1e-4, rng);
    INFO("max rel error ", rep.max_rel_error, " at ", rep.worst_param);
    CHECK(rep.passed);
}

TEST_CASE("score_backward: input gradients vs finite differences") {
    Rng rng(8);
    ModelParams p = ModelParams::init(small_dims(), rng);
    MelGrid x = random_grid(2, p.dims.bins, rng);
    MelGrid mu = random_grid(2, p.dims.bins, rng);
    ScoreCache cache;
    MelGrid out = score(x, mu, 0.6, p, &cache);
    ModelParams sink = ModelParams::zeros_like(p);
    ScoreInputGrads g = score_backward(2.0 * out, cache, p, sink);

    const double h = 1e-6;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < p.dims.bins; ++j) {
            MelGrid xp = x, xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            const double fd =
                (score(xp, mu, 0.6, p).squaredNorm() - score(xm, mu, 0.6, p).squaredNorm()) /
                (2 * h);
            CHECK(std::abs(fd - g.d_x(i, j)) / std::max(1.0, std::abs(fd)) < 1e-6);

            MelGrid mp = mu, mm = mu;
            mp(i, j) += h;
            mm(i, j) -= h;
            const double fdm =
                (score(x, mp, 0.6, p).squaredNorm() - score(x, mm, 0.6, p).squaredNorm()) /
                (2 * h);
            CHECK(std::abs(fdm - g.d_mu(i, j)) / std::max(1.0, std::abs(fdm)) < 1e-6);
        }
}

TEST_CASE("grad_check: quadratic loss matches exactly") {
    Rng rng(9);
    ModelParams p = ModelParams::init(small_dims(), rng);
    auto loss_fn = [](const ModelParams& q) {
        double acc = 0.0;
        q.visit([&](const char*, const Eigen::MatrixXd& m) { acc += 0.5 * m.squaredNorm(); });
        return acc;
    };
    ModelParams analytic = p;  // gradient of 0.5||w||^2 is w
    GradCheckReport rep = grad_check(loss_fn, p, analytic, 1e-4, 1e-6, rng);
    CHECK(rep.passed);
}

TEST_CASE("forward passes are pure: identical inputs, identical outputs") {
    Rng rng(10);
    ModelParams p = ModelParams::init(small_dims(), rng);
    MelGrid x = random_grid(3, p.dims.bins, rng);
    MelGrid mu = random_grid(3, p.dims.bins, rng);
    CHECK((score(x, mu, 0.5, p) - score(x, mu, 0.5, p)).norm() == 0.0);
    CHECK((encode({1, 2}, 0, 1, p) - encode({1, 2}, 0, 1, p)).norm() == 0.0);
}
