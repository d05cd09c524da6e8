// Command-line front end: corpus generation, training, synthesis, the S2ST
// cascade, evaluation, and the numerical verification suite.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "gdsp/cascade.hpp"
#include "gdsp/factorization.hpp"
#include "gdsp/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gdsp;

namespace {

void reject_unknown_fields(const json& j, const std::set<std::string>& allowed,
                           const std::string& what) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw std::runtime_error(what + ": unknown field '" + key + "'");
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    return json::parse(in);
}

std::string csv_num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

ModelDims dims_from_config(const json& cfg, const SyntheticSpec& spec) {
    ModelDims dims;
    dims.vocab = spec.vocab.size();
    dims.speakers = int(spec.speakers.size());
    dims.languages = 2;
    dims.embed = cfg.value("embed", 32);
    dims.bins = spec.bins;
    dims.hidden = cfg.value("hidden", 128);
    dims.t_embed = cfg.value("t_embed", 16);
    return dims;
}

int language_index(char lang) { return lang == 'A' ? 0 : 1; }

std::vector<TrainItem> load_dataset(const std::vector<ManifestEntry>& entries,
                                    const SyntheticSpec& spec, const std::string& root) {
    std::vector<TrainItem> items;
    for (const auto& e : entries) {
        TrainItem item;
        item.phonemes = spec.vocab.tokenize(e.tokens);
        item.speaker = e.speaker;
        item.language = language_index(e.language);
        item.y = load_mel((fs::path(root) / e.mel_path).string());
        items.push_back(std::move(item));
    }
    return items;
}

SamplerMode parse_mode(const std::string& mode) {
    if (mode == "ode") return SamplerMode::Ode;
    if (mode == "sde") return SamplerMode::Sde;
    throw std::runtime_error("unknown sampler mode '" + mode + "'");
}

// ---------------------------------------------------------------- verify-math

int run_factorization_sweep(const std::string& out_dir, std::uint64_t seed) {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "factorization.csv");
    csv << "seed,regime,strength,max_abs_diff\n";
    const std::array<int, 4> cards{4, 3, 3, 2};
    int failures = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(seed + s);
        DiscreteJoint ci = make_ci_joint(cards, rng);
        Rng map_rng(seed + s + 10000);
        SpeechMaps strict = SpeechMaps::strict_identity(cards);
        SpeechMaps general = SpeechMaps::random_general(cards, map_rng);
        const double d_strict = check_factorization(ci, strict).max_abs_diff;
        const double d_general = check_factorization(ci, general).max_abs_diff;
        csv << seed + s << ",strict,0," << csv_num(d_strict) << "\n";
        csv << seed + s << ",general,0," << csv_num(d_general) << "\n";
        if (d_strict >= 1e-12 || d_general >= 1e-12) ++failures;

        Rng rng2(seed + s + 20000);
        DiscreteJoint non_ci = make_non_ci_joint(cards, rng2, 0.5);
        const double d_non = check_factorization(non_ci, general).max_abs_diff;
        csv << seed + s << ",general-nonci,0.5," << csv_num(d_non) << "\n";
    }
    // the negative control must break for at least 95 of 100 seeds
    int broken = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng2(seed + s + 20000);
        DiscreteJoint non_ci = make_non_ci_joint(cards, rng2, 0.5);
        Rng map_rng(seed + s + 10000);
        SpeechMaps general = SpeechMaps::random_general(cards, map_rng);
        if (check_factorization(non_ci, general).max_abs_diff > 1e-6) ++broken;
    }
    if (broken < 95) ++failures;
    std::cout << "factorization sweep: " << (failures ? "FAIL" : "ok") << " (negative control "
              << broken << "/100 broken)\n";
    return failures ? 1 : 0;
}

int run_sde_checks(const std::string& out_dir, std::uint64_t seed) {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "sde_diagnostics.csv");
    csv << "t,analytic_mean,empirical_mean,analytic_var,empirical_var,stderr\n";
    NoiseSchedule sched;
    AnchoredGaussian anchor = AnchoredGaussian::unit(100);
    MelGrid x0 = MelGrid::Constant(100, 100, 2.0);
    int failures = 0;
    for (int k = 1; k <= 10; ++k) {
        const double t = k / 10.0;
        NoiseSchedule partial{sched.beta0, beta_at(sched, t), t, std::min(1e-3, t / 2)};
        Rng rng(seed + k);
        MelGrid xt = simulate_forward_em(anchor, x0, partial, 1000, rng);
        Marginal m = forward_marginal(anchor, x0, sched, t);
        const int n = int(x0.size());
        const double mean = xt.mean();
        const double var = (xt.array() - mean).square().sum() / n;
        const double se = std::sqrt(m.var_diag(0) / n);
        csv << t << ',' << csv_num(m.mean(0, 0)) << ',' << csv_num(mean) << ','
            << csv_num(m.var_diag(0)) << ',' << csv_num(var) << ',' << csv_num(se) << "\n";
        if (std::abs(mean - m.mean(0, 0)) > 3 * se + 5e-3 ||
            std::abs(var - m.var_diag(0)) > 3 * m.var_diag(0) * std::sqrt(2.0 / n) + 1e-2)
            ++failures;
    }
    std::cout << "forward-marginal Monte-Carlo: " << (failures ? "FAIL" : "ok") << "\n";
    return failures ? 1 : 0;
}

int run_mas_sweep(std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> n01;
    auto random_grid = [&](int r, int c) {
        MelGrid g(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) g(i, j) = n01(rng);
        return g;
    };
    int mismatches = 0;
    for (int F = 1; F <= 6; ++F)
        for (int L = 1; L <= std::min(F, 4); ++L) {
            MelGrid y = random_grid(F, 3);
            EncodedMeans mu = random_grid(L, 3);
            const double fast = alignment_log_likelihood(y, mu, mas_search(y, mu));
            const double brute = alignment_log_likelihood(y, mu, brute_force_alignment(y, mu));
            if (std::abs(fast - brute) > 1e-12) ++mismatches;
        }
    std::uniform_int_distribution<int> pick_f(1, 6);
    for (int rep = 0; rep < 1000; ++rep) {
        const int F = pick_f(rng);
        std::uniform_int_distribution<int> pick_l(1, std::min(F, 4));
        const int L = pick_l(rng);
        MelGrid y = random_grid(F, 2);
        EncodedMeans mu = random_grid(L, 2);
        const double fast = alignment_log_likelihood(y, mu, mas_search(y, mu));
        const double brute = alignment_log_likelihood(y, mu, brute_force_alignment(y, mu));
        if (std::abs(fast - brute) > 1e-12) ++mismatches;
    }
    std::cout << "MAS oracle sweep: " << (mismatches ? "FAIL" : "ok") << "\n";
    return mismatches ? 1 : 0;
}

int run_grad_checks(std::uint64_t seed) {
    Rng rng(seed);
    ModelDims dims;
    dims.vocab = 8;
    dims.speakers = 2;
    dims.embed = 6;
    dims.bins = 5;
    dims.hidden = 12;
    dims.t_embed = 8;
    ModelParams p = ModelParams::init(dims, rng);
    std::normal_distribution<double> n01;
    auto random_grid = [&](int r, int c) {
        MelGrid g(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) g(i, j) = n01(rng);
        return g;
    };

    int failures = 0;
    // L_enc through the encoder
    {
        std::vector<int> phonemes{1, 4, 2};
        MelGrid y = random_grid(6, dims.bins);
        Alignment a{{1, 1, 2, 2, 3, 3}};
        auto loss_fn = [&](const ModelParams& q) {
            return loss_enc(y, encode(phonemes, 0, 1, q), a);
        };
        EncodeCache cache;
        EncodedMeans mu = encode(phonemes, 0, 1, p, &cache);
        Eigen::MatrixXd d_mu;
        (void)loss_enc_grad(y, mu, a, d_mu);
        ModelParams grads = ModelParams::zeros_like(p);
        encode_backward(d_mu, cache, p, grads);
        GradCheckReport rep = grad_check(loss_fn, p, grads, 1e-4, 1e-4, rng);
        std::cout << "grad check L_enc: " << (rep.passed ? "ok" : "FAIL") << " (max rel "
                  << rep.max_rel_error << ")\n";
        if (!rep.passed) ++failures;
    }
    // L_dp
    {
        MelGrid mu = random_grid(4, dims.bins);
        Eigen::VectorXd target(4);
        target << 0.5, 1.0, 0.7, 1.3;
        auto loss_fn = [&](const ModelParams& q) {
            return loss_dp(predict_log_durations(mu, q), target);
        };
        DurationCache cache;
        Eigen::VectorXd pred = predict_log_durations(mu, p, &cache);
        Eigen::VectorXd d_pred;
        (void)loss_dp_grad(pred, target, d_pred);
        ModelParams grads = ModelParams::zeros_like(p);
        predict_log_durations_backward(d_pred, cache, p, grads);
        GradCheckReport rep = grad_check(loss_fn, p, grads, 1e-4, 1e-4, rng);
        std::cout << "grad check L_dp: " << (rep.passed ? "ok" : "FAIL") << " (max rel "
                  << rep.max_rel_error << ")\n";
        if (!rep.passed) ++failures;
    }
    // L_diff at frozen draws
    {
        NoiseSchedule sched;
        MelGrid y0 = random_grid(5, dims.bins);
        MelGrid mu = random_grid(5, dims.bins);
        const double t = 0.41;
        MelGrid xi = random_grid(5, dims.bins);
        auto loss_fn = [&](const ModelParams& q) {
            return diff_loss_at(y0, mu, q, sched, t, xi);
        };
        ModelParams grads = ModelParams::zeros_like(p);
        Eigen::MatrixXd d_mu;
        (void)diff_loss_at_grad(y0, mu, p, sched, t, xi, grads, d_mu);
        GradCheckReport rep = grad_check(loss_fn, p, grads, 1e-4, 1e-4, rng);
        std::cout << "grad check L_diff: " << (rep.passed ? "ok" : "FAIL") << " (max rel "
                  << rep.max_rel_error << ")\n";
        if (!rep.passed) ++failures;
    }
    return failures ? 1 : 0;
}

// ---------------------------------------------------------------- subcommands

int cmd_verify_math(std::uint64_t seed, const std::string& out_dir, bool factorization_only) {
    if (factorization_only) return run_factorization_sweep(out_dir, seed);
    int rc = 0;
    rc |= run_sde_checks(out_dir, seed);
    rc |= run_factorization_sweep(out_dir, seed);
    rc |= run_mas_sweep(seed);
    rc |= run_grad_checks(seed);
    std::cout << (rc ? "verify-math: FAIL\n" : "verify-math: all checks passed\n");
    return rc;
}

int cmd_gen_corpus(std::uint64_t seed, const std::string& config_path,
                   const std::string& out_dir) {
    json cfg = config_path.empty() ? json::object() : load_json(config_path);
    reject_unknown_fields(cfg,
                          {"bins", "symbols_per_language", "speakers", "sigma_data", "n_utts",
                           "len_min", "len_max"},
                          "gen-corpus config");
    Rng rng(seed);
    SyntheticSpec spec =
        make_default_spec(cfg.value("bins", 16), cfg.value("symbols_per_language", 12),
                          cfg.value("speakers", 2), cfg.value("sigma_data", 0.05), rng);
    fs::create_directories(out_dir);
    std::ofstream spec_out(fs::path(out_dir) / "spec.json");
    spec_out << spec.to_json() << "\n";
    auto entries = generate_corpus(spec, cfg.value("n_utts", 500), cfg.value("len_min", 3),
                                   cfg.value("len_max", 8), rng, out_dir);
    std::cout << "wrote " << entries.size() << " utterances to " << out_dir << "\n";
    return 0;
}

int cmd_train(std::uint64_t seed, const std::string& config_path, const std::string& manifest,
              const std::string& spec_path, const std::string& out_dir) {
    json cfg = config_path.empty() ? json::object() : load_json(config_path);
    reject_unknown_fields(cfg,
                          {"learning_rate", "batch_size", "epochs", "adam_beta1", "adam_beta2",
                           "adam_eps", "weight_enc", "weight_dp", "weight_diff", "embed",
                           "hidden", "t_embed", "beta0", "beta1", "t_max", "t_min"},
                          "train config");
    const std::string root = fs::path(manifest).parent_path().string();
    const std::string spec_file =
        spec_path.empty() ? (fs::path(root) / "spec.json").string() : spec_path;
    std::ifstream spec_in(spec_file);
    if (!spec_in) throw std::runtime_error("cannot open spec " + spec_file);
    SyntheticSpec spec = SyntheticSpec::from_json(
        std::string(std::istreambuf_iterator<char>(spec_in), {}));

    TrainConfig tc;
    tc.learning_rate = cfg.value("learning_rate", 1e-3);
    tc.batch_size = cfg.value("batch_size", 16);
    tc.epochs = cfg.value("epochs", 50);
    tc.adam_beta1 = cfg.value("adam_beta1", 0.9);
    tc.adam_beta2 = cfg.value("adam_beta2", 0.999);
    tc.adam_eps = cfg.value("adam_eps", 1e-8);
    tc.weight_enc = cfg.value("weight_enc", 1.0);
    tc.weight_dp = cfg.value("weight_dp", 1.0);
    tc.weight_diff = cfg.value("weight_diff", 1.0);
    tc.sched.beta0 = cfg.value("beta0", 0.05);
    tc.sched.beta1 = cfg.value("beta1", 20.0);
    tc.sched.t_max = cfg.value("t_max", 1.0);
    tc.sched.t_min = cfg.value("t_min", 1e-3);
    tc.seed = seed;

    auto entries = load_manifest(manifest);
    auto dataset = load_dataset(entries, spec, root);

    Rng init_rng(seed);
    ModelParams initial = ModelParams::init(dims_from_config(cfg, spec), init_rng);

    fs::create_directories(out_dir);
    std::ofstream log(fs::path(out_dir) / "train_log.csv");
    log << "epoch,loss_enc,loss_dp,loss_diff,loss_total,wall_ms\n";
    TrainState state = train(dataset, tc, initial, [&](int epoch, const EpochStats& s) {
        log << epoch << ',' << csv_num(s.loss_enc) << ',' << csv_num(s.loss_dp) << ','
            << csv_num(s.loss_diff) << ',' << csv_num(s.loss_total) << ',' << s.wall_ms << "\n";
        log.flush();
        std::cout << "epoch " << epoch << " total " << s.loss_total << "\n";
    });
    save_checkpoint(state, (fs::path(out_dir) / "checkpoint.gdsp").string());
    std::cout << "checkpoint written to " << out_dir << "/checkpoint.gdsp\n";
    return 0;
}

json sidecar_json(const std::string& id, const std::string& tokens, int speaker,
                  const std::string& language, const SynthConfig& cfg, std::uint64_t seed,
                  const std::vector<int>& durations) {
    json side;
    side["id"] = id;
    side["tokens"] = tokens;
    side["speaker"] = speaker;
    side["language"] = language;
    side["n_steps"] = cfg.n_steps;
    side["mode"] = cfg.mode == SamplerMode::Ode ? "ode" : "sde";
    side["temperature"] = cfg.temperature;
    side["seed"] = seed;
    side["durations"] = durations;
    return side;
}

int cmd_synth(std::uint64_t seed, const std::string& ckpt_path, const std::string& spec_path,
              const std::string& text, const std::string& manifest, int speaker,
              const std::string& language, const SynthConfig& cfg, bool translit,
              const std::string& out_dir) {
    std::ifstream spec_in(spec_path);
    if (!spec_in) throw std::runtime_error("cannot open spec " + spec_path);
    SyntheticSpec spec = SyntheticSpec::from_json(
        std::string(std::istreambuf_iterator<char>(spec_in), {}));
    TrainState state = load_checkpoint(ckpt_path);
    fs::create_directories(out_dir);

    auto synth_one = [&](const std::string& id, const std::string& tokens_text, int spk,
                         char lang, std::uint64_t item_seed) {
        std::vector<int> ids = spec.vocab.tokenize(tokens_text);
        Rng rng(item_seed);
        SynthResult res =
            translit
                ? synthesize_cross(ids, spec.vocab, spk, language_index('A'), state.params, cfg,
                                   rng)
                : synthesize(ids, spk, language_index(lang), state.params, cfg, rng);
        save_mel(res.mel, (fs::path(out_dir) / (id + ".mel")).string());
        std::ofstream side(fs::path(out_dir) / (id + ".json"));
        side << sidecar_json(id, tokens_text, spk, std::string(1, lang), cfg, item_seed,
                             res.durations)
                    .dump(2)
             << "\n";
    };

    if (!manifest.empty()) {
        auto entries = load_manifest(manifest);
        for (std::size_t i = 0; i < entries.size(); ++i)
            synth_one(entries[i].id, entries[i].tokens, entries[i].speaker,
                      entries[i].language, seed + i);
        std::cout << "synthesized " << entries.size() << " utterances into " << out_dir << "\n";
    } else {
        if (text.empty()) throw std::runtime_error("synth: need --text or --manifest");
        require(!language.empty(), "synth: --language required with --text");
        synth_one("synth", text, speaker, language[0], seed);
        std::cout << "wrote " << out_dir << "/synth.mel\n";
    }
    return 0;
}

int cmd_cascade(std::uint64_t seed, const std::string& ckpt_path, const std::string& spec_path,
                const std::string& manifest, const SynthConfig& cfg,
                const std::string& out_dir) {
    std::ifstream spec_in(spec_path);
    if (!spec_in) throw std::runtime_error("cannot open spec " + spec_path);
    SyntheticSpec spec = SyntheticSpec::from_json(
        std::string(std::istreambuf_iterator<char>(spec_in), {}));
    TrainState state = load_checkpoint(ckpt_path);
    Dictionary dict = Dictionary::from_vocab(spec.vocab);

    // a language-B speaker carries the target accent
    int speaker_b = -1;
    for (int s = 0; s < int(spec.speakers.size()); ++s)
        if (spec.speakers[s].lang_affinity == 'B') {
            speaker_b = s;
            break;
        }
    if (speaker_b < 0) throw std::runtime_error("cascade: no language-B speaker in spec");

    const std::string root = fs::path(manifest).parent_path().string();
    auto entries = load_manifest(manifest);
    fs::create_directories(fs::path(out_dir) / "results");
    std::ofstream csv(fs::path(out_dir) / "summary.csv");
    csv << "utt_id,asr_ter,e2e_ter,frames_in,frames_out\n";

    std::size_t idx = 0;
    for (const auto& e : entries) {
        if (e.language != 'A') {
            ++idx;
            continue;  // the cascade translates A -> B
        }
        MelGrid source = load_mel((fs::path(root) / e.mel_path).string());
        Rng rng(seed + idx);
        CascadeResult res =
            run_cascade(source, spec, dict, state.params, speaker_b, language_index('B'), cfg,
                        rng);
        auto ref = spec.vocab.tokenize(e.tokens);
        const double asr_ter = token_error_rate(ref, res.decoded_tokens);
        auto e2e_ref = dict.translate(ref);
        auto e2e_hyp = decode_tokens(res.output_mel, spec);
        const double e2e_ter = token_error_rate(e2e_ref, e2e_hyp);
        csv << e.id << ',' << csv_num(asr_ter) << ',' << csv_num(e2e_ter) << ','
            << source.rows() << ',' << res.output_mel.rows() << "\n";

        json r;
        r["id"] = e.id;
        r["decoded"] = spec.vocab.detokenize(res.decoded_tokens);
        r["translated"] = spec.vocab.detokenize(res.translated_tokens);
        r["e2e_decoded"] = spec.vocab.detokenize(e2e_hyp);
        r["asr_ter"] = asr_ter;
        r["e2e_ter"] = e2e_ter;
        std::ofstream rf(fs::path(out_dir) / "results" / (e.id + ".json"));
        rf << r.dump(2) << "\n";
        ++idx;
    }
    std::cout << "cascade summary written to " << out_dir << "/summary.csv\n";
    return 0;
}

int cmd_eval(const std::string& spec_path, const std::string& manifest,
             const std::string& synth_dir, const std::string& out_dir) {
    std::ifstream spec_in(spec_path);
    if (!spec_in) throw std::runtime_error("cannot open spec " + spec_path);
    SyntheticSpec spec = SyntheticSpec::from_json(
        std::string(std::istreambuf_iterator<char>(spec_in), {}));
    auto entries = load_manifest(manifest);
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "eval_report.csv");
    csv << "utt_id,token_error_rate,mel_mse\n";

    double ter_sum = 0.0, mse_sum = 0.0;
    int n = 0, exact = 0;
    for (const auto& e : entries) {
        const std::string mel_path = (fs::path(synth_dir) / (e.id + ".mel")).string();
        if (!fs::exists(mel_path)) continue;
        MelGrid mel = load_mel(mel_path);
        auto ref = spec.vocab.tokenize(e.tokens);
        auto hyp = decode_tokens(mel, spec);
        const double ter = token_error_rate(ref, hyp);

        // spectral fidelity at matched shape: re-render the reference tokens
        // with the durations the model actually emitted
        std::ifstream side_in(fs::path(synth_dir) / (e.id + ".json"));
        double mse = std::numeric_limits<double>::quiet_NaN();
        if (side_in) {
            json side = json::parse(side_in);
            auto durations = side.at("durations").get<std::vector<int>>();
            if (durations.size() == ref.size()) {
                MelGrid target = render_utterance(spec, ref, e.speaker, durations);
                mse = (mel - target).squaredNorm() / mel.size();
            }
        }
        csv << e.id << ',' << csv_num(ter) << ',' << csv_num(mse) << "\n";
        ter_sum += ter;
        if (ter == 0.0) ++exact;
        if (std::isfinite(mse)) mse_sum += mse;
        ++n;
    }
    if (n == 0) throw std::runtime_error("eval: no synthesized outputs found in " + synth_dir);
    std::cout << "evaluated " << n << " utterances: mean TER " << ter_sum / n
              << ", exact " << exact << "/" << n << ", mean mel MSE " << mse_sum / n << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phoneme-conditional diffusion speech toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string config_path, manifest, spec_path, ckpt_path, text, language = "A", mode = "ode";
    int speaker = 0, steps = 50, threads = 1;
    double temperature = 1.5;
    bool factorization_only = false, translit = false;

    auto* verify = app.add_subcommand("verify-math", "run the numerical verification suite");
    verify->add_option("--seed", seed, "rng seed")->required();
    verify->add_option("--out", out_dir, "output directory for CSV diagnostics");
    verify->add_flag("--factorization", factorization_only, "run only the factorization sweep");
    verify->add_option("--threads", threads, "worker cap");

    auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
    gen->add_option("--seed", seed, "rng seed")->required();
    gen->add_option("--config", config_path, "generation config JSON");
    gen->add_option("--out", out_dir, "corpus output directory")->required();
    gen->add_option("--threads", threads, "worker cap");

    auto* tr = app.add_subcommand("train", "train on a corpus manifest");
    tr->add_option("--seed", seed, "rng seed")->required();
    tr->add_option("--config", config_path, "train config JSON");
    tr->add_option("--manifest", manifest, "corpus manifest")->required();
    tr->add_option("--spec", spec_path, "corpus spec.json (default: next to manifest)");
    tr->add_option("--out", out_dir, "output directory")->required();
    tr->add_option("--threads", threads, "worker cap");

    auto* sy = app.add_subcommand("synth", "synthesize mel spectrograms");
    sy->add_option("--seed", seed, "rng seed")->required();
    sy->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
    sy->add_option("--spec", spec_path, "corpus spec.json")->required();
    sy->add_option("--text", text, "token string to synthesize");
    sy->add_option("--manifest", manifest, "synthesize every utterance in this manifest");
    sy->add_option("--speaker", speaker, "speaker id (with --text)");
    sy->add_option("--language", language, "language tag A or B (with --text)");
    sy->add_option("--steps", steps, "reverse diffusion steps");
    sy->add_option("--mode", mode, "ode|sde")->check(CLI::IsMember({"ode", "sde"}));
    sy->add_option("--temperature", temperature, "prior temperature");
    sy->add_flag("--translit", translit, "transliterate language-B input to language A first");
    sy->add_option("--out", out_dir, "output directory")->required();
    sy->add_option("--threads", threads, "worker cap");

    auto* ca = app.add_subcommand("cascade", "run the ASR -> MT -> TTS pipeline");
    ca->add_option("--seed", seed, "rng seed")->required();
    ca->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
    ca->add_option("--spec", spec_path, "corpus spec.json")->required();
    ca->add_option("--manifest", manifest, "source utterances")->required();
    ca->add_option("--steps", steps, "reverse diffusion steps");
    ca->add_option("--mode", mode, "ode|sde")->check(CLI::IsMember({"ode", "sde"}));
    ca->add_option("--temperature", temperature, "prior temperature");
    ca->add_option("--out", out_dir, "output directory")->required();
    ca->add_option("--threads", threads, "worker cap");

    auto* ev = app.add_subcommand("eval", "score synthesized outputs against a manifest");
    ev->add_option("--spec", spec_path, "corpus spec.json")->required();
    ev->add_option("--manifest", manifest, "reference manifest")->required();
    ev->add_option("--synth-dir", out_dir, "directory of synthesized outputs")->required();
    std::string report_dir = ".";
    ev->add_option("--out", report_dir, "report output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        SynthConfig scfg;
        scfg.n_steps = steps;
        scfg.mode = parse_mode(mode);
        scfg.temperature = temperature;

        if (verify->parsed()) return cmd_verify_math(seed, out_dir, factorization_only);
        if (gen->parsed()) return cmd_gen_corpus(seed, config_path, out_dir);
        if (tr->parsed()) return cmd_train(seed, config_path, manifest, spec_path, out_dir);
        if (sy->parsed())
            return cmd_synth(seed, ckpt_path, spec_path, text, manifest, speaker, language,
                             scfg, translit, out_dir);
        if (ca->parsed())
            return cmd_cascade(seed, ckpt_path, spec_path, manifest, scfg, out_dir);
        if (ev->parsed()) return cmd_eval(spec_path, manifest, out_dir, report_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
