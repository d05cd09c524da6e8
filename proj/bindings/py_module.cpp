#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "gdsp/cascade.hpp"
#include "gdsp/factorization.hpp"
#include "gdsp/training.hpp"

namespace py = pybind11;
using namespace gdsp;

namespace {

SyntheticSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec " + path);
    return SyntheticSpec::from_json(std::string(std::istreambuf_iterator<char>(in), {}));
}

SamplerMode mode_from(const std::string& mode) {
    if (mode == "ode") return SamplerMode::Ode;
    if (mode == "sde") return SamplerMode::Sde;
    throw std::invalid_argument("mode must be 'ode' or 'sde'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "phoneme-conditional diffusion speech toolkit";

    py::class_<NoiseSchedule>(m, "NoiseSchedule")
        .def(py::init([](double beta0, double beta1, double t_max, double t_min) {
                 NoiseSchedule s{beta0, beta1, t_max, t_min};
                 s.validate();
                 return s;
             }),
             py::arg("beta0") = 0.05, py::arg("beta1") = 20.0, py::arg("t_max") = 1.0,
             py::arg("t_min") = 1e-3)
        .def_readonly("beta0", &NoiseSchedule::beta0)
        .def_readonly("beta1", &NoiseSchedule::beta1)
        .def_readonly("t_max", &NoiseSchedule::t_max)
        .def_readonly("t_min", &NoiseSchedule::t_min);

    m.def("beta_at", &beta_at, py::arg("sched"), py::arg("t"));
    m.def("cum_noise", &cum_noise, py::arg("sched"), py::arg("t"));
    m.def("lambda_at", &lambda_at, py::arg("sched"), py::arg("t"));

    m.def(
        "forward_marginal",
        [](const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma_diag, const MelGrid& x0,
           const NoiseSchedule& sched, double t) {
            Marginal marg = forward_marginal({mu, sigma_diag}, x0, sched, t);
            return py::make_tuple(marg.mean, marg.var_diag);
        },
        py::arg("mu"), py::arg("sigma_diag"), py::arg("x0"), py::arg("sched"), py::arg("t"),
        "Closed-form mean (frames x bins) and per-bin variance at time t.");

    m.def(
        "sample_reverse",
        [](const std::function<MelGrid(const MelGrid&, double)>& score_fn,
           const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma_diag, int frames,
           int n_steps, const std::string& mode, double temperature, const NoiseSchedule& sched,
           std::uint64_t seed) {
            Rng rng(seed);
            return sample_reverse(score_fn, {mu, sigma_diag}, sched, frames, n_steps,
                                  mode_from(mode), temperature, rng);
        },
        py::arg("score_fn"), py::arg("mu"), py::arg("sigma_diag"), py::arg("frames"),
        py::arg("n_steps"), py::arg("mode") = "ode", py::arg("temperature") = 1.0,
        py::arg("sched") = NoiseSchedule{}, py::arg("seed") = 0,
        "Reverse-time sampling with a caller-provided score(x, t) callback.");

    m.def(
        "mas_search",
        [](const MelGrid& y, const MelGrid& mu) { return mas_search(y, mu).frame_to_phoneme; },
        py::arg("y"), py::arg("mu"),
        "Monotonic alignment search; 1-based phoneme index per frame.");
    m.def(
        "alignment_log_likelihood",
        [](const MelGrid& y, const MelGrid& mu, const std::vector<int>& frame_to_phoneme) {
            return alignment_log_likelihood(y, mu, Alignment{frame_to_phoneme});
        },
        py::arg("y"), py::arg("mu"), py::arg("frame_to_phoneme"));
    m.def(
        "durations_from_alignment",
        [](const std::vector<int>& frame_to_phoneme, int n_phonemes) {
            return durations_from_alignment(Alignment{frame_to_phoneme}, n_phonemes);
        },
        py::arg("frame_to_phoneme"), py::arg("n_phonemes"),
        "Per-phoneme log frame counts.");

    m.def("token_error_rate", &token_error_rate, py::arg("ref"), py::arg("hyp"));

    m.def(
        "factorization_gap",
        [](std::uint64_t seed, double non_ci_strength) {
            const std::array<int, 4> cards{4, 3, 3, 2};
            Rng rng(seed);
            DiscreteJoint j = non_ci_strength > 0.0
                                  ? make_non_ci_joint(cards, rng, non_ci_strength)
                                  : make_ci_joint(cards, rng);
            Rng map_rng(seed + 1);
            return check_factorization(j, SpeechMaps::random_general(cards, map_rng))
                .max_abs_diff;
        },
        py::arg("seed"), py::arg("non_ci_strength") = 0.0,
        "Max deviation of the speech-translation factorization identity on a random joint.");

    m.def(
        "generate_corpus",
        [](const std::string& out_dir, std::uint64_t seed, int bins, int symbols_per_language,
           int speakers, double sigma_data, int n_utts, int len_min, int len_max) {
            Rng rng(seed);
            SyntheticSpec spec =
                make_default_spec(bins, symbols_per_language, speakers, sigma_data, rng);
            std::ofstream spec_out(out_dir + "/spec.json");
            auto entries = generate_corpus(spec, n_utts, len_min, len_max, rng, out_dir);
            spec_out << spec.to_json() << "\n";
            return entries.size();
        },
        py::arg("out_dir"), py::arg("seed"), py::arg("bins") = 16,
        py::arg("symbols_per_language") = 12, py::arg("speakers") = 2,
        py::arg("sigma_data") = 0.05, py::arg("n_utts") = 500, py::arg("len_min") = 3,
        py::arg("len_max") = 8);

    m.def(
        "decode_tokens",
        [](const MelGrid& mel, const std::string& spec_path, int speaker) {
            SyntheticSpec spec = load_spec(spec_path);
            return spec.vocab.detokenize(decode_tokens(mel, spec, speaker));
        },
        py::arg("mel"), py::arg("spec_path"), py::arg("speaker") = -1);

    m.def(
        "synthesize",
        [](const std::string& checkpoint_path, const std::string& spec_path,
           const std::string& text, int speaker, const std::string& language, int n_steps,
           const std::string& mode, double temperature, std::uint64_t seed) {
            SyntheticSpec spec = load_spec(spec_path);
            TrainState state = load_checkpoint(checkpoint_path);
            SynthConfig cfg;
            cfg.n_steps = n_steps;
            cfg.mode = mode_from(mode);
            cfg.temperature = temperature;
            Rng rng(seed);
            SynthResult res = synthesize(spec.vocab.tokenize(text), speaker,
                                         language == "A" ? 0 : 1, state.params, cfg, rng);
            return py::make_tuple(res.mel, res.durations);
        },
        py::arg("checkpoint_path"), py::arg("spec_path"), py::arg("text"),
        py::arg("speaker") = 0, py::arg("language") = "A", py::arg("n_steps") = 50,
        py::arg("mode") = "ode", py::arg("temperature") = 1.5, py::arg("seed") = 0,
        "Returns (mel array, per-token frame counts).");

    m.def("load_mel", &load_mel, py::arg("path"));
    m.def("save_mel", &save_mel, py::arg("grid"), py::arg("path"));
}
