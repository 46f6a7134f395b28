#include "nntf/ncpd.hpp"

#include "nntf/metrics.hpp"
#include "nntf/rng.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nntf {

namespace {

// Hadamard product of the grams of all factors except `skip`; the normal
// matrix of the mode-n least-squares subproblem.
Matrix gram_product_skip(const std::vector<Matrix>& factors, std::size_t skip) {
    const std::size_t rank = factors[0].cols();
    Matrix g(rank, rank, 1.0);
    for (std::size_t k = 0; k < factors.size(); ++k) {
        if (k == skip)
            continue;
        const Matrix gk = gram(factors[k]);
        for (std::size_t i = 0; i < g.size(); ++i)
            g.data()[i] *= gk.data()[i];
    }
    return g;
}

} // namespace

std::pair<CPDModel, FitReport> ncpd(const DenseTensor& t, int rank, const NcpdOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    if (rank < 1)
        throw std::invalid_argument("ncpd: rank must be >= 1");
    if (opts.max_iters < 1 || opts.tol <= 0.0 || opts.epsilon_floor <= 0.0)
        throw std::invalid_argument("ncpd: invalid solver options");
    require_nonnegative(t, "ncpd input");
    const double t_norm = frobenius_norm(t);
    if (t_norm == 0.0)
        throw std::domain_error("ncpd: input tensor has zero norm");

    const std::size_t order = t.order();
    const std::size_t r = static_cast<std::size_t>(rank);
    Rng rng(opts.seed);

    CPDModel model;
    model.weights.assign(r, 1.0);
    model.factors.reserve(order);
    for (std::size_t n = 0; n < order; ++n) {
        Matrix a(t.shape()[n], r);
        for (std::size_t i = 0; i < a.size(); ++i)
            a.data()[i] = rng.uniform();
        model.factors.push_back(std::move(a));
    }
    {
        const double recon_norm = frobenius_norm(cpd_reconstruct(model));
        if (recon_norm > 0.0) {
            const double scale = t_norm / recon_norm;
            Matrix& a0 = model.factors[0];
            for (std::size_t i = 0; i < a0.size(); ++i)
                a0.data()[i] *= scale;
        }
    }

    std::vector<Matrix> unfoldings(order);
    for (std::size_t n = 0; n < order; ++n)
        unfoldings[n] = unfold(t, n);

    FitReport report;
    report.trace.reserve(static_cast<std::size_t>(opts.max_iters));
    const double eps = opts.epsilon_floor;
    double prev = std::pow(relative_error(t, cpd_reconstruct(model)) * t_norm, 2);
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        for (std::size_t n = 0; n < order; ++n) {
            Matrix& a = model.factors[n];
            // Khatri-Rao materialized once per mode update and reused for
            // the MTTKRP; memory is (prod of other mode sizes) x rank.
            const Matrix kr = khatri_rao_skip(model.factors, n);
            const Matrix mttkrp = matmul(unfoldings[n], kr);
            const Matrix g = gram_product_skip(model.factors, n);

            if (opts.algorithm == NmfAlgorithm::MU) {
                const Matrix den = matmul(a, g);
                for (std::size_t i = 0; i < a.size(); ++i) {
                    const double updated =
                        a.data()[i] * mttkrp.data()[i] / (den.data()[i] + eps);
                    a.data()[i] = std::max(updated, eps);
                    assert(a.data()[i] >= 0.0);
                }
            } else {
                for (std::size_t col = 0; col < r; ++col) {
                    const double gcc = g(col, col);
                    if (gcc <= std::numeric_limits<double>::min()) {
                        for (std::size_t i = 0; i < a.rows(); ++i)
                            a(i, col) = rng.uniform();
                        continue;
                    }
                    double colsum = 0.0;
                    for (std::size_t i = 0; i < a.rows(); ++i) {
                        double ag = 0.0;
                        for (std::size_t k = 0; k < r; ++k)
                            ag += a(i, k) * g(k, col);
                        const double updated = a(i, col) + (mttkrp(i, col) - ag) / gcc;
                        a(i, col) = updated > 0.0 ? updated : 0.0;
                        colsum += a(i, col);
                    }
                    if (colsum == 0.0)
                        for (std::size_t i = 0; i < a.rows(); ++i)
                            a(i, col) = rng.uniform();
                }
            }
        }

        const DenseTensor recon = cpd_reconstruct(model);
        double f = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double d = t[i] - recon[i];
            f += d * d;
        }
        report.trace.push_back(f);
        report.iterations = iter + 1;
        const double denom =
            prev > std::numeric_limits<double>::min() ? prev : std::numeric_limits<double>::min();
        if (std::abs(prev - f) / denom < opts.tol || prev == 0.0) {
            report.converged = true;
            prev = f;
            break;
        }
        prev = f;
    }

    canonicalize(model);
    report.final_relative_error = relative_error(t, cpd_reconstruct(model));
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(model), std::move(report)};
}

BaselineResult direct_baseline(const DenseTensor& t, int rank, const NcpdOptions& opts) {
    BaselineResult result;
    auto [model, report] = ncpd(t, rank, opts);
    result.model = std::move(model);
    result.report = std::move(report);
    result.factor_ranks.reserve(result.model.order());
    for (const Matrix& f : result.model.factors)
        result.factor_ranks.push_back(numerical_rank(f));
    return result;
}

} // namespace nntf
