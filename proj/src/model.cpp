#include "gdsp/model.hpp"

#include <cmath>

namespace gdsp {

namespace {

Eigen::MatrixXd uniform_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                             Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

}  // namespace

ModelParams ModelParams::init(const ModelDims& dims, Rng& rng) {
    dims.validate();
    const int E = dims.embed, B = dims.bins, H = dims.hidden;
    const int sc_in = 2 * B + dims.t_embed;
    ModelParams p;
    p.dims = dims;
    p.phoneme_emb = uniform_init(dims.vocab, E, E, rng);
    p.speaker_emb = uniform_init(dims.speakers, E, E, rng);
    p.language_emb = uniform_init(dims.languages, E, E, rng);
    p.conv_w0 = uniform_init(E, E, 3 * E, rng);
    p.conv_w1 = uniform_init(E, E, 3 * E, rng);
    p.conv_w2 = uniform_init(E, E, 3 * E, rng);
    p.conv_b = Eigen::MatrixXd::Zero(E, 1);
    p.proj_w = uniform_init(B, E, E, rng);
    p.proj_b = Eigen::MatrixXd::Zero(B, 1);
    p.dp_w1 = uniform_init(E, B, B, rng);
    p.dp_b1 = Eigen::MatrixXd::Zero(E, 1);
    p.dp_w2 = uniform_init(1, E, E, rng);
    p.dp_b2 = Eigen::MatrixXd::Zero(1, 1);
    p.sc_w0 = uniform_init(H, sc_in, sc_in, rng);
    p.sc_b0 = Eigen::MatrixXd::Zero(H, 1);
    p.sc_w1 = uniform_init(H, H, H, rng);
    p.sc_b1 = Eigen::MatrixXd::Zero(H, 1);
    p.sc_w2 = uniform_init(H, H, H, rng);
    p.sc_b2 = Eigen::MatrixXd::Zero(H, 1);
    p.sc_w3 = uniform_init(B, H, H, rng);
    p.sc_b3 = Eigen::MatrixXd::Zero(B, 1);
    return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
    ModelParams z = other;
    z.visit([](const char*, Eigen::MatrixXd& m) { m.setZero(); });
    return z;
}

std::size_t ModelParams::n_weights() const {
    std::size_t n = 0;
    visit([&](const char*, const Eigen::MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
}

Eigen::VectorXd time_embedding(double t, int width) {
    require(width >= 2 && width % 2 == 0, "time_embedding: width must be even");
    Eigen::VectorXd e(width);
    for (int k = 1; k <= width / 2; ++k) {
        const double arg = 2.0 * M_PI * k * t;
        e(2 * (k - 1)) = std::sin(arg);
        e(2 * (k - 1) + 1) = std::cos(arg);
    }
    return e;
}

EncodedMeans encode(const std::vector<int>& phonemes, std::optional<int> speaker,
                    std::optional<int> language, const ModelParams& p, EncodeCache* cache) {
    const int L = static_cast<int>(phonemes.size());
    require(L >= 1, "encode: empty phoneme sequence");
    const int E = p.dims.embed;

    Eigen::MatrixXd emb(L, E);
    for (int l = 0; l < L; ++l) {
        const int id = phonemes[l];
        require(id >= 0 && id < p.dims.vocab, "encode: unknown phoneme id " + std::to_string(id));
        emb.row(l) = p.phoneme_emb.row(id);
    }
    if (speaker) {
        require(*speaker >= 0 && *speaker < p.dims.speakers,
                "encode: unknown speaker id " + std::to_string(*speaker));
        emb.rowwise() += p.speaker_emb.row(*speaker);
    }
    if (language) {
        require(*language >= 0 && *language < p.dims.languages,
                "encode: unknown language id " + std::to_string(*language));
        emb.rowwise() += p.language_emb.row(*language);
    }

    // kernel-3 convolution over the phoneme axis, zero padded
    Eigen::MatrixXd pre(L, E);
    for (int l = 0; l < L; ++l) {
        Eigen::VectorXd acc = p.conv_b.col(0) + p.conv_w1 * emb.row(l).transpose();
        if (l > 0) acc += p.conv_w0 * emb.row(l - 1).transpose();
        if (l + 1 < L) acc += p.conv_w2 * emb.row(l + 1).transpose();
        pre.row(l) = acc.transpose();
    }
    Eigen::MatrixXd h = pre.array().tanh();
    EncodedMeans mu_tilde =
        (h * p.proj_w.transpose()).rowwise() + p.proj_b.col(0).transpose();

    if (cache) {
        cache->emb = std::move(emb);
        cache->pre = std::move(pre);
        cache->h = std::move(h);
        cache->phonemes = phonemes;
        cache->speaker = speaker;
        cache->language = language;
    }
    return mu_tilde;
}

void encode_backward(const Eigen::MatrixXd& d_mu_tilde, const EncodeCache& cache,
                     const ModelParams& p, ModelParams& grads) {
    const int L = static_cast<int>(cache.phonemes.size());

    grads.proj_w += d_mu_tilde.transpose() * cache.h;
    grads.proj_b.col(0) += d_mu_tilde.colwise().sum().transpose();
    Eigen::MatrixXd dh = d_mu_tilde * p.proj_w;
    Eigen::MatrixXd dpre =
        (dh.array() * (1.0 - cache.h.array().square())).matrix();

    Eigen::MatrixXd demb = Eigen::MatrixXd::Zero(L, p.dims.embed);
    for (int l = 0; l < L; ++l) {
        grads.conv_b.col(0) += dpre.row(l).transpose();
        grads.conv_w1 += dpre.row(l).transpose() * cache.emb.row(l);
        demb.row(l) += dpre.row(l) * p.conv_w1;
        if (l > 0) {
            grads.conv_w0 += dpre.row(l).transpose() * cache.emb.row(l - 1);
            demb.row(l - 1) += dpre.row(l) * p.conv_w0;
        }
        if (l + 1 < L) {
            grads.conv_w2 += dpre.row(l).transpose() * cache.emb.row(l + 1);
            demb.row(l + 1) += dpre.row(l) * p.conv_w2;
        }
    }

    for (int l = 0; l < L; ++l) {
        grads.phoneme_emb.row(cache.phonemes[l]) += demb.row(l);
        if (cache.speaker) grads.speaker_emb.row(*cache.speaker) += demb.row(l);
        if (cache.language) grads.language_emb.row(*cache.language) += demb.row(l);
    }
}

Eigen::VectorXd predict_log_durations(const EncodedMeans& mu_tilde_detached, const ModelParams& p,
                                      DurationCache* cache) {
    require(mu_tilde_detached.cols() == p.dims.bins, "predict_log_durations: width mismatch");
    Eigen::MatrixXd z =
        ((mu_tilde_detached * p.dp_w1.transpose()).rowwise() + p.dp_b1.col(0).transpose())
            .array()
            .tanh();
    Eigen::VectorXd out =
        (z * p.dp_w2.transpose()).col(0).array() + p.dp_b2(0, 0);
    if (cache) {
        cache->input = mu_tilde_detached;
        cache->z = std::move(z);
    }
    return out;
}

void predict_log_durations_backward(const Eigen::VectorXd& d_out, const DurationCache& cache,
                                    const ModelParams& p, ModelParams& grads) {
    grads.dp_w2 += d_out.transpose() * cache.z;
    grads.dp_b2(0, 0) += d_out.sum();
    Eigen::MatrixXd dz = d_out * p.dp_w2;  // L x E
    Eigen::MatrixXd dpre = (dz.array() * (1.0 - cache.z.array().square())).matrix();
    grads.dp_w1 += dpre.transpose() * cache.input;
    grads.dp_b1.col(0) += dpre.colwise().sum().transpose();
}

MelGrid score(const MelGrid& x_t, const MelGrid& mu, double t, const ModelParams& p,
              ScoreCache* cache) {
    require(x_t.rows() == mu.rows() && x_t.cols() == mu.cols(), "score: shape mismatch");
    require(x_t.cols() == p.dims.bins, "score: bin width mismatch");
    const Eigen::Index F = x_t.rows();
    const int B = p.dims.bins;

    Eigen::MatrixXd input(F, 2 * B + p.dims.t_embed);
    input.leftCols(B) = x_t;
    input.middleCols(B, B) = mu;
    input.rightCols(p.dims.t_embed).rowwise() = time_embedding(t, p.dims.t_embed).transpose();

    Eigen::MatrixXd a0 =
        ((input * p.sc_w0.transpose()).rowwise() + p.sc_b0.col(0).transpose()).array().tanh();
    Eigen::MatrixXd a1 =
        ((a0 * p.sc_w1.transpose()).rowwise() + p.sc_b1.col(0).transpose()).array().tanh();
    Eigen::MatrixXd a2 =
        ((a1 * p.sc_w2.transpose()).rowwise() + p.sc_b2.col(0).transpose()).array().tanh();
    MelGrid out = (a2 * p.sc_w3.transpose()).rowwise() + p.sc_b3.col(0).transpose();

    if (cache) {
        cache->input = std::move(input);
        cache->a0 = std::move(a0);
        cache->a1 = std::move(a1);
        cache->a2 = std::move(a2);
    }
    return out;
}

ScoreInputGrads score_backward(const MelGrid& d_out, const ScoreCache& cache,
                               const ModelParams& p, ModelParams& grads) {
    const int B = p.dims.bins;

    grads.sc_w3 += d_out.transpose() * cache.a2;
    grads.sc_b3.col(0) += d_out.colwise().sum().transpose();
    Eigen::MatrixXd d2 = ((d_out * p.sc_w3).array() * (1.0 - cache.a2.array().square())).matrix();

    grads.sc_w2 += d2.transpose() * cache.a1;
    grads.sc_b2.col(0) += d2.colwise().sum().transpose();
    Eigen::MatrixXd d1 = ((d2 * p.sc_w2).array() * (1.0 - cache.a1.array().square())).matrix();

    grads.sc_w1 += d1.transpose() * cache.a0;
    grads.sc_b1.col(0) += d1.colwise().sum().transpose();
    Eigen::MatrixXd d0 = ((d1 * p.sc_w1).array() * (1.0 - cache.a0.array().square())).matrix();

    grads.sc_w0 += d0.transpose() * cache.input;
    grads.sc_b0.col(0) += d0.colwise().sum().transpose();
    Eigen::MatrixXd din = d0 * p.sc_w0;

    ScoreInputGrads g;
    g.d_x = din.leftCols(B);
    g.d_mu = din.middleCols(B, B);
    return g;
}

GradCheckReport grad_check(const std::function<double(const ModelParams&)>& loss_fn,
                           const ModelParams& p, const ModelParams& analytic, double h,
                           double tol, Rng& rng) {
    struct Slot {
        const char* name;
        Eigen::Index offset;
    };
    std::vector<Slot> slots;
    std::size_t total = p.n_weights();
    p.visit([&](const char* name, const Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) slots.push_back({name, i});
    });

    std::size_t n_pick = std::max<std::size_t>(100, total / 100);
    n_pick = std::min(n_pick, total);
    std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);

    GradCheckReport report;
    ModelParams work = p;
    for (std::size_t s = 0; s < n_pick; ++s) {
        const Slot slot = slots[pick(rng)];
        double* w = nullptr;
        const double* an = nullptr;
        work.visit([&](const char* name, Eigen::MatrixXd& m) {
            if (std::string(name) == slot.name) w = m.data() + slot.offset;
        });
        analytic.visit([&](const char* name, const Eigen::MatrixXd& m) {
            if (std::string(name) == slot.name) an = m.data() + slot.offset;
        });
        const double orig = *w;
        *w = orig + h;
        const double up = loss_fn(work);
        *w = orig - h;
        const double down = loss_fn(work);
        *w = orig;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(fd - *an) / std::max({1.0, std::abs(fd), std::abs(*an)});
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_param = slot.name;
        }
        ++report.n_checked;
    }
    report.passed = report.max_rel_error < tol;
    return report;
}

}  // namespace gdsp
