#include "nntf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nntf {

namespace {

// One-sided Jacobi on the columns of a; on return the singular values are
// the column norms. Works on the tall orientation for stability.
std::vector<double> jacobi_column_norms(Matrix a) {
    const std::size_t n = a.cols();
    const std::size_t m = a.rows();
    const double tol = 1e-15;
    const int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = a(i, p);
                    const double y = a(i, q);
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq))
                    continue;
                rotated = true;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = a(i, p);
                    const double y = a(i, q);
                    a(i, p) = c * x - s * y;
                    a(i, q) = s * x + c * y;
                }
            }
        }
        if (!rotated)
            break;
    }

    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            norm += a(i, j) * a(i, j);
        sv[j] = std::sqrt(norm);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

double column_cosine(const Matrix& a, std::size_t ca, const Matrix& b, std::size_t cb) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        dot += a(i, ca) * b(i, cb);
        na += a(i, ca) * a(i, ca);
        nb += b(i, cb) * b(i, cb);
    }
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double best_exhaustive(const Matrix& scores) {
    const std::size_t n = scores.rows();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            total += scores(r, perm[r]);
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

std::vector<double> singular_values(const Matrix& m) {
    if (m.rows() >= m.cols())
        return jacobi_column_norms(m);
    return jacobi_column_norms(transpose(m));
}

int numerical_rank(const Matrix& m, double rel_tol) {
    if (rel_tol <= 0.0)
        throw std::invalid_argument("numerical_rank: rel_tol must be positive");
    const std::vector<double> sv = singular_values(m);
    if (sv.empty() || sv[0] == 0.0)
        return 0;
    const double cutoff = rel_tol * sv[0];
    int rank = 0;
    for (double s : sv)
        if (s > cutoff)
            ++rank;
    return rank;
}

// Shortest-augmenting-path assignment (Jonker/Volgenant style) minimizing
// total cost; runs in O(n^3).
std::vector<std::size_t> max_assignment(const Matrix& scores) {
    if (scores.rows() != scores.cols())
        throw std::invalid_argument("max_assignment: score matrix must be square");
    const std::size_t n = scores.rows();
    const double inf = std::numeric_limits<double>::infinity();

    // Minimize negated scores; 1-based helper arrays per the classic scheme.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> way(n + 1, 0), match(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                const double cur = -scores(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> row_to_col(n, 0);
    for (std::size_t j = 1; j <= n; ++j)
        if (match[j] != 0)
            row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

double factor_match_score(const CPDModel& est, const CPDModel& truth) {
    if (est.order() != truth.order())
        throw std::invalid_argument("factor_match_score: mode counts differ");
    if (est.rank() != truth.rank())
        throw std::invalid_argument("factor_match_score: ranks differ");
    const std::size_t order = est.order();
    const std::size_t rank = est.rank();
    for (std::size_t n = 0; n < order; ++n)
        if (est.factors[n].rows() != truth.factors[n].rows())
            throw std::invalid_argument("factor_match_score: mode sizes differ");

    Matrix congruence(rank, rank, 1.0);
    for (std::size_t n = 0; n < order; ++n)
        for (std::size_t r = 0; r < rank; ++r)
            for (std::size_t s = 0; s < rank; ++s)
                congruence(r, s) *= column_cosine(est.factors[n], r, truth.factors[n], s);

    double total;
    if (rank <= 8) {
        total = best_exhaustive(congruence);
    } else {
        const std::vector<std::size_t> assign = max_assignment(congruence);
        total = 0.0;
        for (std::size_t r = 0; r < rank; ++r)
            total += congruence(r, assign[r]);
    }
    return total / static_cast<double>(rank);
}

} // namespace nntf
