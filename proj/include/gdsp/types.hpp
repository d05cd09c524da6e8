#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdsp {

// frames x bins, log-mel units. Rows are time frames.
using MelGrid = Eigen::MatrixXd;

using Rng = std::mt19937_64;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(const MelGrid& g, const std::string& what) {
    if (!g.allFinite()) throw std::runtime_error(what + ": non-finite values");
}

// Draws a frames x bins grid of iid N(0,1), row-major order.
inline MelGrid standard_normal(Eigen::Index frames, Eigen::Index bins, Rng& rng) {
    std::normal_distribution<double> n01;
    MelGrid z(frames, bins);
    for (Eigen::Index i = 0; i < frames; ++i)
        for (Eigen::Index j = 0; j < bins; ++j)
            z(i, j) = n01(rng);
    return z;
}

}  // namespace gdsp
