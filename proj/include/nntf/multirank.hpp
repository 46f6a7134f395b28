#pragma once

#include "nntf/nmf.hpp"
#include "nntf/tensor.hpp"

#include <vector>

namespace nntf {

struct MultirankOptions {
    // A mode unfolding is considered inside a rank-r nonnegative cone when
    // its best NMF relative error at rank r is <= epsilon. 1e-2 suits
    // noiseless data; under noise, set epsilon a little above the relative
    // noise magnitude (e.g. 5e-2 at 40 dB SNR).
    double epsilon = 1e-2;
    // Per-mode sweep ceilings; empty means min(I_n, prod of other sizes).
    std::vector<int> r_max_per_mode;
    NmfOptions nmf;
    int restarts = 5;
    int threads = 1;
};

struct MultirankEstimate {
    std::vector<int> ranks; // per-mode minimal accepted rank
    std::vector<std::vector<RankError>> curves;
    double epsilon = 0.0;
    std::vector<int> r_max;
    std::vector<char> mode_converged; // 0 when no rank met epsilon

    bool all_converged() const {
        for (char c : mode_converged)
            if (!c)
                return false;
        return true;
    }
};

// Sweeps NMF rank on every mode unfolding, ascending from 1, stopping at the
// first rank whose best restart error is <= epsilon. A mode that never meets
// epsilon gets ranks[n] = r_max and is flagged non-converged.
MultirankEstimate estimate_multirank(const DenseTensor& t, const MultirankOptions& opts);

} // namespace nntf
