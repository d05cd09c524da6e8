#include "gdsp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "gdsp/checkpoint.hpp"

namespace gdsp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::vector<int> counts_from_alignment(const Alignment& a, int n_phonemes) {
    std::vector<int> counts(n_phonemes, 0);
    for (int phon : a.frame_to_phoneme) counts[phon - 1]++;
    return counts;
}

}  // namespace

double loss_enc(const MelGrid& y, const EncodedMeans& mu_tilde, const Alignment& a) {
    return -alignment_log_likelihood(y, mu_tilde, a);
}

double loss_enc_grad(const MelGrid& y, const EncodedMeans& mu_tilde, const Alignment& a,
                     Eigen::MatrixXd& d_mu_tilde) {
    const double loss = loss_enc(y, mu_tilde, a);
    d_mu_tilde = Eigen::MatrixXd::Zero(mu_tilde.rows(), mu_tilde.cols());
    for (int j = 0; j < a.frames(); ++j) {
        const int i = a.frame_to_phoneme[j] - 1;
        d_mu_tilde.row(i) += mu_tilde.row(i) - y.row(j);
    }
    return loss;
}

double loss_dp(const Eigen::VectorXd& pred_logd, const Eigen::VectorXd& target_logd) {
    require(pred_logd.size() == target_logd.size(), "loss_dp: length mismatch");
    return (pred_logd - target_logd).squaredNorm() / static_cast<double>(pred_logd.size());
}

double loss_dp_grad(const Eigen::VectorXd& pred_logd, const Eigen::VectorXd& target_logd,
                    Eigen::VectorXd& d_pred) {
    const double loss = loss_dp(pred_logd, target_logd);
    d_pred = 2.0 * (pred_logd - target_logd) / static_cast<double>(pred_logd.size());
    return loss;
}

double diff_loss_at(const MelGrid& y0, const MelGrid& mu, const ModelParams& p,
                    const NoiseSchedule& sched, double t, const MelGrid& xi) {
    require(y0.rows() == mu.rows() && y0.cols() == mu.cols(), "diff_loss_at: shape mismatch");
    const double lambda = lambda_at(sched, t);
    const double decay = std::exp(-0.5 * cum_noise(sched, t));
    MelGrid x_t = mu + (y0 - mu) * decay + std::sqrt(lambda) * xi;
    MelGrid s = score(x_t, mu, t, p);
    MelGrid resid = s + xi / std::sqrt(lambda);
    return lambda * resid.squaredNorm() / static_cast<double>(resid.size());
}

double diff_loss_at_grad(const MelGrid& y0, const MelGrid& mu, const ModelParams& p,
                         const NoiseSchedule& sched, double t, const MelGrid& xi,
                         ModelParams& grads, Eigen::MatrixXd& d_mu) {
    const double lambda = lambda_at(sched, t);
    const double decay = std::exp(-0.5 * cum_noise(sched, t));
    MelGrid x_t = mu + (y0 - mu) * decay + std::sqrt(lambda) * xi;
    ScoreCache cache;
    MelGrid s = score(x_t, mu, t, p, &cache);
    MelGrid resid = s + xi / std::sqrt(lambda);
    const double loss = lambda * resid.squaredNorm() / static_cast<double>(resid.size());

    MelGrid d_out = (2.0 * lambda / static_cast<double>(resid.size())) * resid;
    ScoreInputGrads in_grads = score_backward(d_out, cache, p, grads);
    // mu feeds both the conditioning slot and the noised sample x_t
    d_mu = in_grads.d_mu + in_grads.d_x * (1.0 - decay);
    return loss;
}

double loss_diff(const MelGrid& y0, const MelGrid& mu, const ModelParams& p,
                 const NoiseSchedule& sched, Rng& rng) {
    std::uniform_real_distribution<double> u(sched.t_min, sched.t_max);
    const double t = u(rng);
    MelGrid xi = standard_normal(y0.rows(), y0.cols(), rng);
    return diff_loss_at(y0, mu, p, sched, t, xi);
}

void adam_step(TrainState& state, const ModelParams& grads, const TrainConfig& cfg) {
    state.adam_step += 1;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.adam_step));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.adam_step));

    std::vector<Eigen::MatrixXd*> ws, ms, vs;
    std::vector<const Eigen::MatrixXd*> gs;
    state.params.visit([&](const char*, Eigen::MatrixXd& m) { ws.push_back(&m); });
    state.adam_m.visit([&](const char*, Eigen::MatrixXd& m) { ms.push_back(&m); });
    state.adam_v.visit([&](const char*, Eigen::MatrixXd& m) { vs.push_back(&m); });
    grads.visit([&](const char*, const Eigen::MatrixXd& m) { gs.push_back(&m); });

    for (std::size_t i = 0; i < ws.size(); ++i) {
        auto& m = *ms[i];
        auto& v = *vs[i];
        const auto& g = *gs[i];
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = (cfg.adam_beta2 * v.array() + (1.0 - cfg.adam_beta2) * g.array().square()).matrix();
        ws[i]->array() -= cfg.learning_rate * (m.array() / bc1) /
                          ((v.array() / bc2).sqrt() + cfg.adam_eps);
    }
}

TrainState train(const std::vector<TrainItem>& dataset, const TrainConfig& cfg,
                 const ModelParams& initial,
                 const std::function<void(int, const EpochStats&)>& on_epoch) {
    cfg.validate();
    require(!dataset.empty(), "train: empty dataset");
    TrainState state = TrainState::fresh(initial);
    Rng rng(cfg.seed);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t_start = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        EpochStats stats;

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const double inv_n = 1.0 / static_cast<double>(end - start);
            ModelParams grads = ModelParams::zeros_like(state.params);

            for (std::size_t k = start; k < end; ++k) {
                const TrainItem& item = dataset[order[k]];
                const int L = static_cast<int>(item.phonemes.size());

                // step 1: alignment at fixed params
                EncodeCache enc_cache;
                EncodedMeans mu_tilde =
                    encode(item.phonemes, item.speaker, item.language, state.params, &enc_cache);
                Alignment a = mas_search(item.y, mu_tilde);

                // step 2: one gradient step at fixed alignment
                Eigen::MatrixXd d_mu_tilde;
                const double l_enc = loss_enc_grad(item.y, mu_tilde, a, d_mu_tilde);
                d_mu_tilde *= cfg.weight_enc * inv_n;

                DurationCache dp_cache;
                Eigen::VectorXd pred = predict_log_durations(mu_tilde, state.params, &dp_cache);
                Eigen::VectorXd target = durations_from_alignment(a, L);
                Eigen::VectorXd d_pred;
                const double l_dp = loss_dp_grad(pred, target, d_pred);
                predict_log_durations_backward(cfg.weight_dp * inv_n * d_pred, dp_cache,
                                               state.params, grads);

                std::vector<int> counts = counts_from_alignment(a, L);
                MelGrid mu = expand(mu_tilde, counts);
                std::uniform_real_distribution<double> u(cfg.sched.t_min, cfg.sched.t_max);
                const double t = u(rng);
                MelGrid xi = standard_normal(item.y.rows(), item.y.cols(), rng);
                ModelParams diff_grads = ModelParams::zeros_like(state.params);
                Eigen::MatrixXd d_mu;
                const double l_diff = diff_loss_at_grad(item.y, mu, state.params, cfg.sched, t,
                                                        xi, diff_grads, d_mu);
                {
                    std::vector<Eigen::MatrixXd*> acc;
                    grads.visit([&](const char*, Eigen::MatrixXd& m) { acc.push_back(&m); });
                    std::size_t idx = 0;
                    diff_grads.visit([&](const char*, const Eigen::MatrixXd& g) {
                        *acc[idx++] += cfg.weight_diff * inv_n * g;
                    });
                }
                // pool the per-frame mu gradient back to phoneme positions
                Eigen::Index row = 0;
                for (int i = 0; i < L; ++i)
                    for (int c = 0; c < counts[i]; ++c)
                        d_mu_tilde.row(i) += cfg.weight_diff * inv_n * d_mu.row(row++);

                encode_backward(d_mu_tilde, enc_cache, state.params, grads);

                const double total = cfg.weight_enc * l_enc + cfg.weight_dp * l_dp +
                                     cfg.weight_diff * l_diff;
                if (!std::isfinite(total))
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch) + ", batch " +
                                             std::to_string(start / cfg.batch_size));
                stats.loss_enc += l_enc;
                stats.loss_dp += l_dp;
                stats.loss_diff += l_diff;
                stats.loss_total += total;
            }
            adam_step(state, grads, cfg);
        }

        const double inv = 1.0 / static_cast<double>(dataset.size());
        stats.loss_enc *= inv;
        stats.loss_dp *= inv;
        stats.loss_diff *= inv;
        stats.loss_total *= inv;
        stats.wall_ms = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                              std::chrono::steady_clock::now() - t_start)
                                              .count());
        state.epoch = epoch + 1;
        state.history.push_back(stats);
        if (on_epoch) on_epoch(epoch, stats);
    }
    return state;
}

namespace {

Record to_record(const Eigen::MatrixXd& m) {
    Record rec;
    rec.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    rec.values.resize(static_cast<std::size_t>(m.size()));
    // row-major on disk
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            rec.values[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return rec;
}

Eigen::MatrixXd from_record(const Record& rec, const std::string& name) {
    if (rec.dims.size() != 2)
        throw std::runtime_error("checkpoint: record " + name + " is not a matrix");
    Eigen::MatrixXd m(rec.dims[0], rec.dims[1]);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rec.values[static_cast<std::size_t>(i * m.cols() + j)];
    return m;
}

}  // namespace

void save_checkpoint(const TrainState& state, const std::string& path) {
    RecordMap records;
    state.params.visit([&](const char* name, const Eigen::MatrixXd& m) {
        records["param/" + std::string(name)] = to_record(m);
    });
    state.adam_m.visit([&](const char* name, const Eigen::MatrixXd& m) {
        records["adam_m/" + std::string(name)] = to_record(m);
    });
    state.adam_v.visit([&](const char* name, const Eigen::MatrixXd& m) {
        records["adam_v/" + std::string(name)] = to_record(m);
    });
    const ModelDims& d = state.params.dims;
    records["meta/dims"] = Record{{7},
                                  {double(d.vocab), double(d.speakers), double(d.languages),
                                   double(d.embed), double(d.bins), double(d.hidden),
                                   double(d.t_embed)}};
    records["meta/state"] = Record{{2}, {double(state.adam_step), double(state.epoch)}};
    write_records(records, path);
}

TrainState load_checkpoint(const std::string& path) {
    RecordMap records = read_records(path);
    auto need = [&](const std::string& name) -> const Record& {
        auto it = records.find(name);
        if (it == records.end())
            throw std::runtime_error("checkpoint: missing record " + name);
        return it->second;
    };
    const Record& dims_rec = need("meta/dims");
    if (dims_rec.values.size() != 7) throw std::runtime_error("checkpoint: bad meta/dims");
    ModelDims dims;
    dims.vocab = int(dims_rec.values[0]);
    dims.speakers = int(dims_rec.values[1]);
    dims.languages = int(dims_rec.values[2]);
    dims.embed = int(dims_rec.values[3]);
    dims.bins = int(dims_rec.values[4]);
    dims.hidden = int(dims_rec.values[5]);
    dims.t_embed = int(dims_rec.values[6]);

    TrainState state;
    state.params.dims = dims;
    state.params.visit([&](const char* name, Eigen::MatrixXd& m) {
        m = from_record(need("param/" + std::string(name)), name);
    });
    state.adam_m = state.params;
    state.adam_m.visit([&](const char* name, Eigen::MatrixXd& m) {
        m = from_record(need("adam_m/" + std::string(name)), name);
    });
    state.adam_v = state.params;
    state.adam_v.visit([&](const char* name, Eigen::MatrixXd& m) {
        m = from_record(need("adam_v/" + std::string(name)), name);
    });
    const Record& st = need("meta/state");
    if (st.values.size() != 2) throw std::runtime_error("checkpoint: bad meta/state");
    state.adam_step = std::int64_t(st.values[0]);
    state.epoch = int(st.values[1]);
    return state;
}

}  // namespace gdsp
