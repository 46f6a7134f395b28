#include "nntf/nmf.hpp"

#include "nntf/parallel.hpp"
#include "nntf/rng.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nntf {

namespace {

void check_options(const NmfOptions& opts) {
    if (opts.rank < 1)
        throw std::invalid_argument("nmf: rank must be >= 1");
    if (opts.max_iters < 1)
        throw std::invalid_argument("nmf: max_iters must be >= 1");
    if (opts.tol <= 0.0)
        throw std::invalid_argument("nmf: tol must be positive");
    if (opts.epsilon_floor <= 0.0)
        throw std::invalid_argument("nmf: epsilon_floor must be positive");
}

double objective(const Matrix& x, const Matrix& w, const Matrix& h) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) {
            double wh = 0.0;
            for (std::size_t r = 0; r < w.cols(); ++r)
                wh += w(i, r) * h(r, j);
            const double d = x(i, j) - wh;
            sum += d * d;
        }
    return sum;
}

void fill_uniform(Matrix& m, Rng& rng) {
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i)
        p[i] = rng.uniform();
}

// W <- W .* (X H^T) ./ (W H H^T + eps), entries floored at eps.
void mu_update_w(const Matrix& x, Matrix& w, const Matrix& h, double eps) {
    const Matrix num = matmul_nt(x, h);
    const Matrix hht = matmul_nt(h, h);
    const Matrix den = matmul(w, hht);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double updated = w.data()[i] * num.data()[i] / (den.data()[i] + eps);
        w.data()[i] = std::max(updated, eps);
        assert(w.data()[i] >= 0.0);
    }
}

void mu_update_h(const Matrix& x, const Matrix& w, Matrix& h, double eps) {
    const Matrix num = matmul_tn(w, x);
    const Matrix wtw = gram(w);
    const Matrix den = matmul(wtw, h);
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double updated = h.data()[i] * num.data()[i] / (den.data()[i] + eps);
        h.data()[i] = std::max(updated, eps);
        assert(h.data()[i] >= 0.0);
    }
}

// HALS column updates for W in X ~ WH: w_r gets the nonnegative part of its
// exact least-squares update; columns that collapse to zero are refilled
// from uniform noise.
void hals_update_w(const Matrix& x, Matrix& w, const Matrix& h, Rng& rng) {
    const std::size_t rank = w.cols();
    const Matrix p = matmul_nt(x, h);  // m x rank
    const Matrix g = matmul_nt(h, h);  // rank x rank
    for (std::size_t r = 0; r < rank; ++r) {
        const double grr = g(r, r);
        if (grr <= std::numeric_limits<double>::min()) {
            for (std::size_t i = 0; i < w.rows(); ++i)
                w(i, r) = rng.uniform();
            continue;
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < w.rows(); ++i) {
            double wg = 0.0;
            for (std::size_t k = 0; k < rank; ++k)
                wg += w(i, k) * g(k, r);
            const double updated = w(i, r) + (p(i, r) - wg) / grr;
            w(i, r) = updated > 0.0 ? updated : 0.0;
            norm += w(i, r);
        }
        if (norm == 0.0)
            for (std::size_t i = 0; i < w.rows(); ++i)
                w(i, r) = rng.uniform();
    }
}

void hals_update_h(const Matrix& x, const Matrix& w, Matrix& h, Rng& rng) {
    const std::size_t rank = h.rows();
    const Matrix q = matmul_tn(w, x); // rank x n
    const Matrix g = gram(w);         // rank x rank
    for (std::size_t r = 0; r < rank; ++r) {
        const double grr = g(r, r);
        if (grr <= std::numeric_limits<double>::min()) {
            for (std::size_t j = 0; j < h.cols(); ++j)
                h(r, j) = rng.uniform();
            continue;
        }
        double norm = 0.0;
        for (std::size_t j = 0; j < h.cols(); ++j) {
            double gh = 0.0;
            for (std::size_t k = 0; k < rank; ++k)
                gh += g(r, k) * h(k, j);
            const double updated = h(r, j) + (q(r, j) - gh) / grr;
            h(r, j) = updated > 0.0 ? updated : 0.0;
            norm += h(r, j);
        }
        if (norm == 0.0)
            for (std::size_t j = 0; j < h.cols(); ++j)
                h(r, j) = rng.uniform();
    }
}

} // namespace

NmfResult nmf(const Matrix& x, const NmfOptions& opts) {
    check_options(opts);
    require_nonnegative(x, "nmf input");
    const double x_norm = frobenius_norm(x);
    if (x_norm == 0.0)
        throw std::domain_error("nmf: input matrix has zero norm");

    const std::size_t rank = static_cast<std::size_t>(opts.rank);
    Rng rng(opts.seed);
    Matrix w(x.rows(), rank);
    Matrix h(rank, x.cols());
    fill_uniform(w, rng);
    fill_uniform(h, rng);
    // Scale W so the initial model matches the data magnitude; a wildly
    // off-scale start distorts the first multiplicative steps.
    double wh_norm = 0.0;
    {
        const Matrix wh = matmul(w, h);
        wh_norm = frobenius_norm(wh);
    }
    if (wh_norm > 0.0) {
        const double scale = x_norm / wh_norm;
        for (std::size_t i = 0; i < w.size(); ++i)
            w.data()[i] *= scale;
    }

    NmfResult result;
    result.trace.reserve(static_cast<std::size_t>(opts.max_iters));
    double prev = objective(x, w, h);
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (opts.algorithm == NmfAlgorithm::MU) {
            mu_update_w(x, w, h, opts.epsilon_floor);
            mu_update_h(x, w, h, opts.epsilon_floor);
        } else {
            hals_update_w(x, w, h, rng);
            hals_update_h(x, w, h, rng);
        }
        const double f = objective(x, w, h);
        result.trace.push_back(f);
        result.iterations = iter + 1;
        const double denom = prev > std::numeric_limits<double>::min()
                                 ? prev
                                 : std::numeric_limits<double>::min();
        if (std::abs(prev - f) / denom < opts.tol || prev == 0.0) {
            result.converged = true;
            prev = f;
            break;
        }
        prev = f;
    }

    result.w = std::move(w);
    result.h = std::move(h);
    result.final_relative_error = std::sqrt(prev) / x_norm;
    return result;
}

NmfResult nmf_best_of(const Matrix& x, int rank, const SweepOptions& opts) {
    if (opts.restarts < 1)
        throw std::invalid_argument("nmf_best_of: restarts must be >= 1");
    const std::uint64_t rank_seed =
        split_seed(opts.nmf.seed, static_cast<std::uint64_t>(rank));

    struct Slot {
        NmfResult result;
        std::uint64_t seed = 0;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(opts.restarts));
    parallel_for_index(slots.size(), opts.threads, [&](std::size_t i) {
        NmfOptions run = opts.nmf;
        run.rank = rank;
        run.seed = split_seed(rank_seed, i);
        slots[i].result = nmf(x, run);
        slots[i].seed = run.seed;
    });

    // Lowest (error, seed) wins; the seed tiebreak keeps the reduction
    // independent of completion order.
    std::size_t best = 0;
    for (std::size_t i = 1; i < slots.size(); ++i) {
        const double e = slots[i].result.final_relative_error;
        const double b = slots[best].result.final_relative_error;
        if (e < b || (e == b && slots[i].seed < slots[best].seed))
            best = i;
    }
    return std::move(slots[best].result);
}

std::vector<RankError> nmf_error_curve(const Matrix& x, int r_max, const SweepOptions& opts) {
    if (r_max < 1)
        throw std::invalid_argument("nmf_error_curve: r_max must be >= 1");
    std::vector<RankError> curve(static_cast<std::size_t>(r_max));
    // Ranks are independent here (no early stop), so flatten (rank, restart)
    // into one job list for the thread pool.
    std::vector<double> errors(static_cast<std::size_t>(r_max) *
                                   static_cast<std::size_t>(opts.restarts),
                               0.0);
    std::vector<std::uint64_t> seeds(errors.size(), 0);
    parallel_for_index(errors.size(), opts.threads, [&](std::size_t job) {
        const int rank = static_cast<int>(job / static_cast<std::size_t>(opts.restarts)) + 1;
        const std::size_t restart = job % static_cast<std::size_t>(opts.restarts);
        NmfOptions run = opts.nmf;
        run.rank = rank;
        run.seed = split_seed(split_seed(opts.nmf.seed, static_cast<std::uint64_t>(rank)), restart);
        errors[job] = nmf(x, run).final_relative_error;
        seeds[job] = run.seed;
    });

    double running_min = std::numeric_limits<double>::infinity();
    for (int rank = 1; rank <= r_max; ++rank) {
        double best = std::numeric_limits<double>::infinity();
        std::uint64_t best_seed = 0;
        for (int i = 0; i < opts.restarts; ++i) {
            const std::size_t job = static_cast<std::size_t>(rank - 1) *
                                        static_cast<std::size_t>(opts.restarts) +
                                    static_cast<std::size_t>(i);
            if (errors[job] < best || (errors[job] == best && seeds[job] < best_seed)) {
                best = errors[job];
                best_seed = seeds[job];
            }
        }
        running_min = std::min(running_min, best);
        curve[static_cast<std::size_t>(rank - 1)] = {rank, running_min};
    }
    return curve;
}

} // namespace nntf
