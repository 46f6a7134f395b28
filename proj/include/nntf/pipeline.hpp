#pragma once

#include "nntf/models.hpp"
#include "nntf/multirank.hpp"
#include "nntf/ncpd.hpp"
#include "nntf/ntd.hpp"
#include "nntf/tensor.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace nntf {

// Thrown when a fit cannot produce a usable result (e.g. no rank met the
// multirank acceptance threshold). Maps to CLI exit code 2.
class convergence_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PipelineOptions {
    MultirankOptions multirank;
    // Skips estimation and fits at the given multirank; needed to reproduce
    // controlled experiments.
    std::optional<std::vector<int>> multirank_override;
    // Proceed with ranks[n] = r_max on modes that never met epsilon instead
    // of aborting.
    bool force_multirank = false;
    NtdOptions ntd;
    NcpdOptions core_cpd;
    int stage_restarts = 5;
    int threads = 1;
    // Master seed; stage seeds derive from it via split_seed with the
    // seed_stream constants, restart seeds by a further split on the index.
    std::uint64_t seed = 0;
};

struct StageReports {
    double multirank_seconds = 0.0;
    FitReport ntd;
    FitReport core_cpd;
};

struct PipelineResult {
    MultirankEstimate multirank;
    TuckerModel tucker;
    CPDModel core_cpd; // factors are R_n x R
    CPDModel final;    // factors are I_n x R with numerical rank <= min(R_n, R)
    StageReports reports;
    std::vector<int> final_factor_ranks;
    double final_relative_error = 0.0;
    double wall_time_s = 0.0;
};

// The two-stage method end to end: estimate the multirank (unless
// overridden), fit a nonnegative Tucker model at it, fit a nonnegative CPD
// of the core at cpd_rank, and compose both factorizations. Every final
// factor U_n B_n lives in the column space of U_n, so its numerical rank is
// bounded by R_n regardless of cpd_rank.
PipelineResult fit_rank_deficient(const DenseTensor& t, int cpd_rank,
                                  const PipelineOptions& opts);

// A_n = U_n B_n with weights carried through and re-extracted after column
// normalization. For exact inputs cpd_reconstruct(compose(tucker, cpd))
// equals the Tucker reconstruction with the core replaced by its CPD.
CPDModel compose(const TuckerModel& tucker, const CPDModel& core_cpd);

struct MethodSummary {
    double error = 0.0;
    std::vector<int> factor_ranks;
    std::optional<double> fms; // only when ground truth was provided
    double wall_time_s = 0.0;
};

struct ComparisonReport {
    MethodSummary two_stage;
    MethodSummary direct;
};

// Head-to-head of the two-stage pipeline vs direct NCPD at the same rank.
// `truth` is optional; when present both methods get a factor match score.
ComparisonReport compare(const DenseTensor& t, int cpd_rank, const PipelineOptions& opts,
                         const CPDModel* truth = nullptr);

// direct_baseline over `restarts` seeded runs (seeds split from stage_seed),
// keeping the lowest (error, seed) result.
BaselineResult direct_baseline_best_of(const DenseTensor& t, int rank, const NcpdOptions& opts,
                                       int restarts, int threads, std::uint64_t stage_seed);

} // namespace nntf
