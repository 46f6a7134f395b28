#pragma once

#include "nntf/tensor.hpp"

#include <string>
#include <vector>

namespace nntf {

// CP model: per-mode factors (I_n x R, unit-norm columns) and R component
// weights sorted in descending order. Weight ties are broken by the
// lexicographic order of the first-mode columns so output is canonical.
struct CPDModel {
    std::vector<Matrix> factors;
    std::vector<double> weights;

    std::size_t order() const { return factors.size(); }
    std::size_t rank() const { return weights.size(); }
};

// Tucker model: core of shape (R_1,...,R_N) plus one I_n x R_n factor per
// mode. Everything nonnegative for the fits in this library.
struct TuckerModel {
    DenseTensor core;
    std::vector<Matrix> factors;

    std::size_t order() const { return factors.size(); }
};

// Per-fit diagnostics shared by the NMF/NTD/NCPD solvers.
struct FitReport {
    std::vector<double> trace; // objective ||T - model||_F^2 per outer iteration
    double final_relative_error = 0.0;
    int iterations = 0;
    bool converged = false;
    double wall_time_s = 0.0;
    std::vector<std::string> flags; // overcomplete modes, dead columns, ...
};

// sum_r w_r a^(1)_r o ... o a^(N)_r
DenseTensor cpd_reconstruct(const CPDModel& model);
// core x_1 U_1 x_2 ... x_N U_N
DenseTensor tucker_reconstruct(const TuckerModel& model);

// Rescales every factor column to unit l2 norm, absorbs the magnitudes into
// the weights, and sorts components by descending weight (ties broken by
// first-mode column lexicographic order). Reconstruction is unchanged.
// When perm_out is given it receives the applied permutation: output
// component r came from input component perm_out[r].
void canonicalize(CPDModel& model, std::vector<std::size_t>* perm_out = nullptr);

// Khatri-Rao product of all factors except `skip`, folded in descending mode
// order so that it matches the unfold column convention:
// unfold(cpd_reconstruct(M), n) = A_n * diag(w) * result^T.
Matrix khatri_rao_skip(const std::vector<Matrix>& factors, std::size_t skip);

} // namespace nntf
