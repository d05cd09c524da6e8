#include "gdsp/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace gdsp {

namespace fs = std::filesystem;
using nlohmann::json;

int PhonemeVocab::id_of(const std::string& symbol) const {
    for (int i = 0; i < size(); ++i)
        if (symbols[i] == symbol) return i;
    throw std::invalid_argument("vocab: unknown symbol '" + symbol + "'");
}

std::vector<int> PhonemeVocab::tokenize(const std::string& text) const {
    std::vector<int> ids;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) ids.push_back(id_of(tok));
    return ids;
}

std::vector<int> PhonemeVocab::transliterate(const std::vector<int>& ids) const {
    std::vector<int> out;
    for (int id : ids) {
        require(id >= 0 && id < size(), "transliterate: id out of range");
        if (lang[id] == 'A') {
            out.push_back(id);
        } else {
            auto it = translit.find(id);
            if (it == translit.end())
                throw std::invalid_argument("transliterate: no mapping for symbol '" +
                                            symbols[id] + "'");
            out.insert(out.end(), it->second.begin(), it->second.end());
        }
    }
    return out;
}

std::string PhonemeVocab::detokenize(const std::vector<int>& ids) const {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        require(ids[i] >= 0 && ids[i] < size(), "detokenize: id out of range");
        if (i) out += ' ';
        out += symbols[ids[i]];
    }
    return out;
}

void SyntheticSpec::validate() const {
    require(bins >= 1, "SyntheticSpec: bins must be >= 1");
    require(sigma_data >= 0.0, "SyntheticSpec: sigma_data must be >= 0");
    const int n = vocab.size();
    require(static_cast<int>(templates.size()) == n, "SyntheticSpec: template count mismatch");
    require(static_cast<int>(base_duration.size()) == n, "SyntheticSpec: duration count mismatch");
    for (int d : base_duration) require(d >= 2 && d <= 6, "SyntheticSpec: base duration outside 2..6");
    const double min_sep = 4.0 * sigma_data * std::sqrt(static_cast<double>(bins));
    for (int i = 0; i < n; ++i) {
        require(templates[i].size() == bins, "SyntheticSpec: template width mismatch");
        for (int j = i + 1; j < n; ++j)
            require((templates[i] - templates[j]).norm() > min_sep,
                    "SyntheticSpec: templates " + vocab.symbols[i] + "/" + vocab.symbols[j] +
                        " too close");
    }
    for (const Speaker& s : speakers) {
        require(s.gain.size() == bins && s.contour.size() == bins,
                "SyntheticSpec: speaker transform width mismatch");
        require((s.gain.array() > 0.0).all(), "SyntheticSpec: speaker gains must be > 0");
    }
}

std::string SyntheticSpec::to_json() const {
    json j;
    j["bins"] = bins;
    j["sigma_data"] = sigma_data;
    j["symbols"] = vocab.symbols;
    std::string langs(vocab.lang.begin(), vocab.lang.end());
    j["languages"] = langs;
    json tr = json::object();
    for (const auto& [b, a_seq] : vocab.translit) tr[vocab.symbols[b]] = vocab.detokenize(a_seq);
    j["transliteration"] = tr;
    j["templates"] = json::array();
    for (const auto& t : templates)
        j["templates"].push_back(std::vector<double>(t.data(), t.data() + t.size()));
    j["base_durations"] = base_duration;
    j["speakers"] = json::array();
    for (const Speaker& s : speakers) {
        json sp;
        sp["name"] = s.name;
        sp["language"] = std::string(1, s.lang_affinity);
        sp["gain"] = std::vector<double>(s.gain.data(), s.gain.data() + s.gain.size());
        sp["contour"] = std::vector<double>(s.contour.data(), s.contour.data() + s.contour.size());
        j["speakers"].push_back(sp);
    }
    return j.dump(2);
}

SyntheticSpec SyntheticSpec::from_json(const std::string& text) {
    json j = json::parse(text);
    SyntheticSpec spec;
    spec.bins = j.at("bins").get<int>();
    spec.sigma_data = j.at("sigma_data").get<double>();
    spec.vocab.symbols = j.at("symbols").get<std::vector<std::string>>();
    const std::string langs = j.at("languages").get<std::string>();
    spec.vocab.lang.assign(langs.begin(), langs.end());
    for (const auto& [b_sym, a_text] : j.at("transliteration").items())
        spec.vocab.translit[spec.vocab.id_of(b_sym)] =
            spec.vocab.tokenize(a_text.get<std::string>());
    for (const auto& t : j.at("templates")) {
        auto v = t.get<std::vector<double>>();
        spec.templates.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), v.size()));
    }
    spec.base_duration = j.at("base_durations").get<std::vector<int>>();
    for (const auto& sp : j.at("speakers")) {
        Speaker s;
        s.name = sp.at("name").get<std::string>();
        s.lang_affinity = sp.at("language").get<std::string>().at(0);
        auto g = sp.at("gain").get<std::vector<double>>();
        auto c = sp.at("contour").get<std::vector<double>>();
        s.gain = Eigen::Map<Eigen::VectorXd>(g.data(), g.size());
        s.contour = Eigen::Map<Eigen::VectorXd>(c.data(), c.size());
        spec.speakers.push_back(std::move(s));
    }
    spec.validate();
    return spec;
}

SyntheticSpec make_default_spec(int bins, int symbols_per_language, int n_speakers,
                                double sigma_data, Rng& rng) {
    require(bins >= 1 && symbols_per_language >= 1 && n_speakers >= 1,
            "make_default_spec: bad sizes");
    SyntheticSpec spec;
    spec.bins = bins;
    spec.sigma_data = sigma_data;

    for (int i = 0; i < symbols_per_language; ++i) {
        spec.vocab.symbols.push_back("a" + std::to_string(i));
        spec.vocab.lang.push_back('A');
    }
    for (int i = 0; i < symbols_per_language; ++i) {
        spec.vocab.symbols.push_back("b" + std::to_string(i));
        spec.vocab.lang.push_back('B');
        spec.vocab.translit[symbols_per_language + i] = {i};
    }

    const double min_sep = std::max(0.5, 4.0 * sigma_data * std::sqrt(double(bins)));
    std::uniform_real_distribution<double> amp(-6.0, 6.0);
    const int n_symbols = 2 * symbols_per_language;
    while (static_cast<int>(spec.templates.size()) < n_symbols) {
        Eigen::VectorXd t(bins);
        for (int k = 0; k < bins; ++k) t(k) = amp(rng);
        bool ok = true;
        for (const auto& prev : spec.templates)
            if ((t - prev).norm() <= min_sep) {
                ok = false;
                break;
            }
        if (ok) spec.templates.push_back(std::move(t));
    }

    std::uniform_int_distribution<int> dur(2, 6);
    for (int i = 0; i < n_symbols; ++i) spec.base_duration.push_back(dur(rng));

    std::uniform_real_distribution<double> gain(0.85, 1.2);
    std::uniform_real_distribution<double> contour(-0.2, 0.2);
    for (int s = 0; s < n_speakers; ++s) {
        Speaker sp;
        sp.name = "spk" + std::to_string(s);
        sp.lang_affinity = (s % 2 == 0) ? 'A' : 'B';
        sp.gain.resize(bins);
        sp.contour.resize(bins);
        for (int k = 0; k < bins; ++k) {
            sp.gain(k) = gain(rng);
            sp.contour(k) = contour(rng);
        }
        spec.speakers.push_back(std::move(sp));
    }
    spec.validate();
    return spec;
}

MelGrid render_utterance(const SyntheticSpec& spec, const std::vector<int>& token_ids,
                         int speaker, const std::vector<int>& durations) {
    require(speaker >= 0 && speaker < static_cast<int>(spec.speakers.size()),
            "render_utterance: bad speaker");
    require(token_ids.size() == durations.size(), "render_utterance: durations length mismatch");
    const Speaker& sp = spec.speakers[speaker];
    int total = 0;
    for (int d : durations) {
        require(d >= 1, "render_utterance: durations must be >= 1");
        total += d;
    }
    MelGrid mel(total, spec.bins);
    int row = 0;
    for (std::size_t i = 0; i < token_ids.size(); ++i) {
        Eigen::VectorXd frame =
            (spec.templates[token_ids[i]].array() * sp.gain.array() + sp.contour.array()).matrix();
        for (int d = 0; d < durations[i]; ++d) mel.row(row++) = frame.transpose();
    }
    return mel;
}

std::vector<ManifestEntry> generate_corpus(const SyntheticSpec& spec, int n_utts, int len_lo,
                                           int len_hi, Rng& rng, const std::string& out_dir) {
    require(n_utts >= 1, "generate_corpus: n_utts must be >= 1");
    require(len_lo >= 1 && len_hi >= len_lo, "generate_corpus: bad length range");
    fs::create_directories(fs::path(out_dir) / "mels");

    std::vector<std::vector<int>> symbols_by_lang(2);
    for (int i = 0; i < spec.vocab.size(); ++i)
        symbols_by_lang[spec.vocab.lang[i] == 'A' ? 0 : 1].push_back(i);

    std::uniform_int_distribution<int> pick_speaker(0, int(spec.speakers.size()) - 1);
    std::uniform_int_distribution<int> pick_len(len_lo, len_hi);
    std::uniform_int_distribution<int> jitter(-1, 1);
    std::normal_distribution<double> noise(0.0, spec.sigma_data);

    std::vector<ManifestEntry> entries;
    for (int u = 0; u < n_utts; ++u) {
        ManifestEntry e;
        e.id = "utt" + std::to_string(u);
        e.speaker = pick_speaker(rng);
        e.language = spec.speakers[e.speaker].lang_affinity;
        const auto& syms = symbols_by_lang[e.language == 'A' ? 0 : 1];
        require(!syms.empty(), "generate_corpus: no symbols for language");

        const int len = pick_len(rng);
        std::vector<int> token_ids;
        std::uniform_int_distribution<int> pick_sym(0, int(syms.size()) - 1);
        for (int i = 0; i < len; ++i) {
            int sym;
            do {
                sym = syms[pick_sym(rng)];
            } while (!token_ids.empty() && sym == token_ids.back());  // no adjacent repeats
            token_ids.push_back(sym);
        }
        for (int id : token_ids)
            e.durations.push_back(std::max(2, spec.base_duration[id] + jitter(rng)));

        MelGrid mel = render_utterance(spec, token_ids, e.speaker, e.durations);
        if (spec.sigma_data > 0.0)
            for (Eigen::Index i = 0; i < mel.rows(); ++i)
                for (Eigen::Index j = 0; j < mel.cols(); ++j) mel(i, j) += noise(rng);

        e.tokens = spec.vocab.detokenize(token_ids);
        e.mel_path = (fs::path("mels") / (e.id + ".mel")).string();
        save_mel(mel, (fs::path(out_dir) / e.mel_path).string());
        entries.push_back(std::move(e));
    }
    save_manifest(entries, (fs::path(out_dir) / "manifest.txt").string());
    return entries;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("manifest: cannot open " + path + " for writing");
    for (const auto& e : entries) {
        out << e.id << '|' << e.tokens << '|' << e.speaker << '|' << e.language << '|'
            << e.mel_path << '|';
        for (std::size_t i = 0; i < e.durations.size(); ++i)
            out << (i ? "," : "") << e.durations[i];
        out << '\n';
    }
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest: cannot open " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find('|', start)) != std::string::npos; start = pos + 1)
            fields.push_back(line.substr(start, pos - start));
        fields.push_back(line.substr(start));
        if (fields.size() != 6)
            throw std::runtime_error("manifest: line " + std::to_string(line_no) +
                                     ": expected 6 fields, got " + std::to_string(fields.size()));
        ManifestEntry e;
        e.id = fields[0];
        e.tokens = fields[1];
        e.speaker = std::stoi(fields[2]);
        require(fields[3].size() == 1, "manifest: bad language field");
        e.language = fields[3][0];
        e.mel_path = fields[4];
        std::istringstream durs(fields[5]);
        std::string d;
        while (std::getline(durs, d, ',')) e.durations.push_back(std::stoi(d));
        entries.push_back(std::move(e));
    }
    return entries;
}

void save_mel(const MelGrid& grid, const std::string& path) {
    require(grid.rows() >= 1 && grid.cols() >= 1, "save_mel: empty grid");
    require_finite(grid, "save_mel");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_mel: cannot open " + path + " for writing");
    out.write("MEL1", 4);
    const std::uint32_t frames = static_cast<std::uint32_t>(grid.rows());
    const std::uint32_t bins = static_cast<std::uint32_t>(grid.cols());
    out.write(reinterpret_cast<const char*>(&frames), 4);
    out.write(reinterpret_cast<const char*>(&bins), 4);
    for (Eigen::Index i = 0; i < grid.rows(); ++i)
        for (Eigen::Index j = 0; j < grid.cols(); ++j) {
            const float v = static_cast<float>(grid(i, j));
            out.write(reinterpret_cast<const char*>(&v), 4);
        }
    if (!out) throw std::runtime_error("save_mel: write failed for " + path);
}

MelGrid load_mel(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_mel: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::string(magic, 4) != "MEL1")
        throw std::runtime_error("load_mel: bad magic in " + path);
    std::uint32_t frames = 0, bins = 0;
    in.read(reinterpret_cast<char*>(&frames), 4);
    in.read(reinterpret_cast<char*>(&bins), 4);
    if (!in) throw std::runtime_error("load_mel: truncated header in " + path);
    MelGrid grid(frames, bins);
    for (std::uint32_t i = 0; i < frames; ++i)
        for (std::uint32_t j = 0; j < bins; ++j) {
            float v;
            in.read(reinterpret_cast<char*>(&v), 4);
            if (in.gcount() != 4)
                throw std::runtime_error("load_mel: truncated values in " + path);
            grid(i, j) = v;
        }
    return grid;
}

namespace {

struct DecodeResult {
    std::vector<int> ids;
    double cost = std::numeric_limits<double>::infinity();
};

DecodeResult decode_for_speaker(const MelGrid& mel, const SyntheticSpec& spec, int speaker) {
    const int F = static_cast<int>(mel.rows());
    const int K = spec.vocab.size();
    const Speaker& sp = spec.speakers[speaker];

    // accent-normalize, then prefix sums of per-frame squared distances
    MelGrid norm(F, spec.bins);
    for (int j = 0; j < F; ++j)
        norm.row(j) =
            ((mel.row(j).transpose().array() - sp.contour.array()) / sp.gain.array()).transpose();

    Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(F + 1, K);
    for (int j = 0; j < F; ++j)
        for (int k = 0; k < K; ++k)
            prefix(j + 1, k) =
                prefix(j, k) + (norm.row(j).transpose() - spec.templates[k]).squaredNorm();

    const double inf = std::numeric_limits<double>::infinity();
    // best[j][k]: min cost covering frames < j with last segment of symbol k
    Eigen::MatrixXd best = Eigen::MatrixXd::Constant(F + 1, K, inf);
    Eigen::MatrixXi prev_cut = Eigen::MatrixXi::Constant(F + 1, K, -1);
    Eigen::MatrixXi prev_sym = Eigen::MatrixXi::Constant(F + 1, K, -1);

    for (int j = 2; j <= F; ++j)
        for (int k = 0; k < K; ++k)
            for (int m = 0; m <= j - 2; ++m) {
                double base;
                int psym = -1;
                if (m == 0) {
                    base = 0.0;
                } else {
                    base = inf;
                    for (int kp = 0; kp < K; ++kp)
                        if (kp != k && best(m, kp) < base) {
                            base = best(m, kp);
                            psym = kp;
                        }
                    if (base == inf) continue;
                }
                const double c = base + prefix(j, k) - prefix(m, k);
                if (c < best(j, k)) {
                    best(j, k) = c;
                    prev_cut(j, k) = m;
                    prev_sym(j, k) = psym;
                }
            }

    DecodeResult res;
    int k_end = -1;
    for (int k = 0; k < K; ++k)
        if (best(F, k) < res.cost) {
            res.cost = best(F, k);
            k_end = k;
        }
    if (k_end < 0) return res;  // F < 2, no valid segmentation

    int j = F, k = k_end;
    while (j > 0) {
        res.ids.push_back(k);
        const int m = prev_cut(j, k);
        k = prev_sym(j, k);
        j = m;
    }
    std::reverse(res.ids.begin(), res.ids.end());
    return res;
}

}  // namespace

std::vector<int> decode_tokens(const MelGrid& mel, const SyntheticSpec& spec, int speaker) {
    require(mel.rows() >= 2, "decode_tokens: need at least 2 frames");
    if (speaker >= 0) return decode_for_speaker(mel, spec, speaker).ids;
    DecodeResult best;
    for (int s = 0; s < static_cast<int>(spec.speakers.size()); ++s) {
        DecodeResult r = decode_for_speaker(mel, spec, s);
        if (r.cost < best.cost) best = std::move(r);
    }
    return best.ids;
}

std::vector<int> decode_tokens_brute(const MelGrid& mel, const SyntheticSpec& spec, int speaker) {
    const int F = static_cast<int>(mel.rows());
    const int K = spec.vocab.size();
    const Speaker& sp = spec.speakers[speaker];
    MelGrid norm(F, spec.bins);
    for (int j = 0; j < F; ++j)
        norm.row(j) =
            ((mel.row(j).transpose().array() - sp.contour.array()) / sp.gain.array()).transpose();

    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<int> best_ids;
    std::vector<int> cuts;  // segment boundaries
    std::vector<int> ids;

    auto seg_cost = [&](int from, int to, int k) {
        double c = 0.0;
        for (int j = from; j < to; ++j)
            c += (norm.row(j).transpose() - spec.templates[k]).squaredNorm();
        return c;
    };

    auto rec = [&](auto&& self, int pos, double cost) -> void {
        if (pos == F) {
            if (cost < best_cost) {
                best_cost = cost;
                best_ids = ids;
            }
            return;
        }
        for (int next = pos + 2; next <= F; ++next)
            for (int k = 0; k < K; ++k) {
                if (!ids.empty() && k == ids.back()) continue;
                ids.push_back(k);
                self(self, next, cost + seg_cost(pos, next, k));
                ids.pop_back();
            }
    };
    rec(rec, 0, 0.0);
    return best_ids;
}

}  // namespace gdsp
