#pragma once

#include "nntf/models.hpp"
#include "nntf/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nntf {

// Experimental design knobs for one synthetic instance. The planted factors
// are A_n = U_n B_n, so whenever cpd_rank exceeds some mode rank R_n the
// corresponding A_n is rank deficient by construction.
struct SynthSpec {
    std::vector<std::size_t> shape;
    std::vector<int> multirank; // R_n <= I_n
    int cpd_rank = 1;
    std::optional<double> snr_db; // empty = noiseless
    std::uint64_t seed = 0;

    bool rank_deficient() const {
        for (int r : multirank)
            if (cpd_rank > r)
                return true;
        return false;
    }
};

struct GroundTruth {
    std::vector<Matrix> u; // I_n x R_n, nonnegative, unit columns
    std::vector<Matrix> b; // R_n x R, columns aligned with model components
    CPDModel model;        // canonical composed factors A_n = U_n B_n
    DenseTensor clean;
    DenseTensor noisy; // equals clean when noiseless
    std::optional<double> realized_snr_db;
};

// Deterministic in spec.seed. U_n entries are uniform (0,1] with columns
// normalized; B_n entries uniform (0.1,1]. Noise is multiplicative:
// T ⊙ (1 + sigma Z) with Z standard normal clipped at -1, sigma solved
// from the realized perturbation so the requested SNR is met exactly.
GroundTruth generate(const SynthSpec& spec);

} // namespace nntf
