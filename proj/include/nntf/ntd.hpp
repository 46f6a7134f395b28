#pragma once

#include "nntf/models.hpp"
#include "nntf/tensor.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace nntf {

struct NtdOptions {
    int max_iters = 500;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    double epsilon_floor = 1e-16;
};

// Nonnegative Tucker decomposition at a prescribed multirank via block
// multiplicative updates: each factor is updated against its matricized
// subproblem, then the core against the full multilinear operator. The
// objective ||T - G x_n U_n||_F^2 is non-increasing across iterations.
// Factor columns are normalized to unit l2 norm at return with the scale
// absorbed into the core. R_n > I_n is allowed and flagged in the report.
std::pair<TuckerModel, FitReport> ntd(const DenseTensor& t, const std::vector<int>& multirank,
                                      const NtdOptions& opts);

} // namespace nntf
