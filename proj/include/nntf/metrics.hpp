#pragma once

#include "nntf/models.hpp"
#include "nntf/tensor.hpp"

#include <vector>

namespace nntf {

// Singular values in descending order, via one-sided Jacobi rotations.
// Accurate to high relative precision for the desk-scale matrices used here.
std::vector<double> singular_values(const Matrix& m);

// Number of singular values above rel_tol * sigma_max. Zero matrix -> 0.
int numerical_rank(const Matrix& m, double rel_tol = 1e-6);

// Permutation- and scale-invariant CP similarity in [0, 1]: the permutation
// maximizing the mean over components of the product over modes of column
// cosines. Exact assignment (exhaustive for rank <= 8, Hungarian above).
double factor_match_score(const CPDModel& est, const CPDModel& truth);

// Exact maximum-total-score assignment on a square score matrix; returns the
// column assigned to each row. Exposed for the benchmark harness and tests.
std::vector<std::size_t> max_assignment(const Matrix& scores);

} // namespace nntf
