#pragma once

#include "nntf/tensor.hpp"

#include <cstdint>
#include <vector>

namespace nntf {

enum class NmfAlgorithm { HALS, MU };

struct NmfOptions {
    int rank = 1;
    int max_iters = 500;
    double tol = 1e-8; // relative change of ||X - WH||_F^2 between iterations
    NmfAlgorithm algorithm = NmfAlgorithm::HALS;
    std::uint64_t seed = 0;
    double epsilon_floor = 1e-16;
};

struct NmfResult {
    Matrix w; // m x rank, nonnegative
    Matrix h; // rank x n, nonnegative
    std::vector<double> trace;
    double final_relative_error = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Nonnegative factorization X ~ WH. MU uses the classic multiplicative
// updates (monotone objective); HALS does closed-form column updates and is
// the faster default. Negative entries -> invalid_argument, zero matrix ->
// domain_error.
NmfResult nmf(const Matrix& x, const NmfOptions& opts);

struct RankError {
    int rank = 0;
    double error = 0.0;
};

struct SweepOptions {
    NmfOptions nmf;
    int restarts = 5;
    int threads = 1;
};

// Best relative error over restarts for each rank 1..r_max. The curve is
// made non-increasing by carrying the running minimum forward. Restart
// seeds derive from opts.nmf.seed via split_seed(split_seed(seed, rank),
// restart); the reduction keeps the lowest (error, seed) pair, so running
// restarts concurrently cannot change the result.
std::vector<RankError> nmf_error_curve(const Matrix& x, int r_max, const SweepOptions& opts);

// Best single run over restarts at a fixed rank (the curve's inner step).
NmfResult nmf_best_of(const Matrix& x, int rank, const SweepOptions& opts);

} // namespace nntf
