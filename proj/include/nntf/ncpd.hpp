#pragma once

#include "nntf/models.hpp"
#include "nntf/nmf.hpp"
#include "nntf/tensor.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace nntf {

struct NcpdOptions {
    int max_iters = 500;
    double tol = 1e-8;
    NmfAlgorithm algorithm = NmfAlgorithm::HALS; // MU available for monotonicity-strict runs
    std::uint64_t seed = 0;
    double epsilon_floor = 1e-16;
};

// Nonnegative CP decomposition at rank R via alternating updates on the
// matricized problems unfold(t, n) ~ A_n * khatri_rao_skip(A, n)^T. Columns
// are unit-normalized at return with magnitudes extracted into descending
// sorted weights.
std::pair<CPDModel, FitReport> ncpd(const DenseTensor& t, int rank, const NcpdOptions& opts);

struct BaselineResult {
    CPDModel model;
    FitReport report;
    std::vector<int> factor_ranks; // numerical rank of each returned factor
};

// Plain NCPD plus the per-mode numerical ranks of the fitted factors: the
// reference a compressed two-stage fit is compared against.
BaselineResult direct_baseline(const DenseTensor& t, int rank, const NcpdOptions& opts);

} // namespace nntf
