#include "gdsp/align.hpp"

#include <cmath>
#include <limits>

namespace gdsp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

double frame_log_density(const MelGrid& y, const EncodedMeans& mu_tilde, int frame, int phon) {
    const double sq = (y.row(frame) - mu_tilde.row(phon)).squaredNorm();
    return -0.5 * static_cast<double>(y.cols()) * kLog2Pi - 0.5 * sq;
}

// C(n, k) with saturation at 2^63.
std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    if (r > 9e18L) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(r + 0.5L);
}

}  // namespace

bool Alignment::valid() const {
    if (frame_to_phoneme.empty()) return false;
    if (frame_to_phoneme.front() != 1) return false;
    for (size_t j = 1; j < frame_to_phoneme.size(); ++j) {
        const int step = frame_to_phoneme[j] - frame_to_phoneme[j - 1];
        if (step != 0 && step != 1) return false;
    }
    return true;
}

double alignment_log_likelihood(const MelGrid& y, const EncodedMeans& mu_tilde,
                                const Alignment& a) {
    require(y.rows() == a.frames(), "alignment_log_likelihood: frame count mismatch");
    require(y.cols() == mu_tilde.cols(), "alignment_log_likelihood: bin width mismatch");
    double total = 0.0;
    for (int j = 0; j < a.frames(); ++j) {
        const int i = a.frame_to_phoneme[j] - 1;
        require(i >= 0 && i < mu_tilde.rows(), "alignment_log_likelihood: phoneme index out of range");
        total += frame_log_density(y, mu_tilde, j, i);
    }
    return total;
}

Alignment mas_search(const MelGrid& y, const EncodedMeans& mu_tilde) {
    const int F = static_cast<int>(y.rows());
    const int L = static_cast<int>(mu_tilde.rows());
    require(L >= 1, "mas_search: need at least one phoneme");
    require(y.cols() == mu_tilde.cols(), "mas_search: bin width mismatch");
    if (F < L) throw std::invalid_argument("mas_search: infeasible, F < L");

    const double neg_inf = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd q = Eigen::MatrixXd::Constant(F, L, neg_inf);
    // from(j,i): 0 = stayed on i, 1 = advanced from i-1
    Eigen::MatrixXi from = Eigen::MatrixXi::Zero(F, L);

    q(0, 0) = frame_log_density(y, mu_tilde, 0, 0);
    for (int j = 1; j < F; ++j) {
        // feasibility band: i+1 phonemes need <= j+1 frames so far, and the
        // remaining L-1-i phonemes need <= F-1-j frames after this one
        const int lo = std::max(0, L - (F - j));
        const int hi = std::min(j, L - 1);
        for (int i = lo; i <= hi; ++i) {
            const double stay = q(j - 1, i);
            const double advance = (i > 0) ? q(j - 1, i - 1) : neg_inf;
            // tie-break: prefer staying on the current phoneme
            if (stay >= advance) {
                q(j, i) = stay;
                from(j, i) = 0;
            } else {
                q(j, i) = advance;
                from(j, i) = 1;
            }
            q(j, i) += frame_log_density(y, mu_tilde, j, i);
        }
    }

    Alignment a;
    a.frame_to_phoneme.assign(F, 0);
    int i = L - 1;
    for (int j = F - 1; j >= 0; --j) {
        a.frame_to_phoneme[j] = i + 1;
        if (j > 0 && from(j, i) == 1) --i;
    }
    return a;
}

Alignment brute_force_alignment(const MelGrid& y, const EncodedMeans& mu_tilde,
                                std::uint64_t* n_considered) {
    const int F = static_cast<int>(y.rows());
    const int L = static_cast<int>(mu_tilde.rows());
    require(L >= 1 && F >= L, "brute_force_alignment: infeasible instance");
    if (binomial(F - 1, L - 1) > 1000000ULL)
        throw std::invalid_argument("brute_force_alignment: instance too large");

    std::uint64_t count = 0;
    double best = -std::numeric_limits<double>::infinity();
    Alignment best_a;
    Alignment cur;
    cur.frame_to_phoneme.assign(F, 0);
    cur.frame_to_phoneme[0] = 1;

    // enumerate all monotonic surjective assignments recursively
    auto rec = [&](auto&& self, int j, int i) -> void {
        if (j == F) {
            if (i != L) return;
            ++count;
            const double ll = alignment_log_likelihood(y, mu_tilde, cur);
            if (ll > best) {
                best = ll;
                best_a = cur;
            }
            return;
        }
        // stay
        if (L - i <= F - j) {
            cur.frame_to_phoneme[j] = i;
            self(self, j + 1, i);
        }
        // advance
        if (i < L) {
            cur.frame_to_phoneme[j] = i + 1;
            self(self, j + 1, i + 1);
        }
    };
    rec(rec, 1, 1);
    if (n_considered) *n_considered = count;
    return best_a;
}

Eigen::VectorXd durations_from_alignment(const Alignment& a, int n_phonemes) {
    require(a.valid(), "durations_from_alignment: invalid alignment");
    require(a.phonemes() == n_phonemes, "durations_from_alignment: alignment is not surjective onto 1..L");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_phonemes);
    for (int phon : a.frame_to_phoneme) counts(phon - 1) += 1.0;
    return counts.array().log();
}

MelGrid expand(const EncodedMeans& mu_tilde, const std::vector<int>& counts) {
    require(static_cast<Eigen::Index>(counts.size()) == mu_tilde.rows(),
            "expand: counts length mismatch");
    Eigen::Index total = 0;
    for (int c : counts) {
        require(c >= 1, "expand: counts must be >= 1");
        total += c;
    }
    MelGrid mu(total, mu_tilde.cols());
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < mu_tilde.rows(); ++i)
        for (int c = 0; c < counts[i]; ++c) mu.row(row++) = mu_tilde.row(i);
    return mu;
}

}  // namespace gdsp
