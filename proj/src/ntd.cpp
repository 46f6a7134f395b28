#include "nntf/ntd.hpp"

#include "nntf/rng.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nntf {

namespace {

constexpr double kDeadColumnNorm = 1e-12;

double column_norm(const Matrix& m, std::size_t col) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        sum += m(i, col) * m(i, col);
    return std::sqrt(sum);
}

// Contract every mode except `skip` (all modes when skip == npos) of t with
// the per-mode matrices in ms.
DenseTensor contract_all_but(const DenseTensor& t, const std::vector<Matrix>& ms,
                             std::size_t skip) {
    DenseTensor out = t;
    for (std::size_t k = 0; k < ms.size(); ++k)
        if (k != skip)
            out = mode_n_product(out, ms[k], k);
    return out;
}

} // namespace

std::pair<TuckerModel, FitReport> ntd(const DenseTensor& t, const std::vector<int>& multirank,
                                      const NtdOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    if (opts.max_iters < 1 || opts.tol <= 0.0 || opts.epsilon_floor <= 0.0)
        throw std::invalid_argument("ntd: invalid solver options");
    require_nonnegative(t, "ntd input");
    const double t_norm = frobenius_norm(t);
    if (t_norm == 0.0)
        throw std::domain_error("ntd: input tensor has zero norm");
    const std::size_t order = t.order();
    if (multirank.size() != order)
        throw std::invalid_argument("ntd: multirank size does not match tensor order");
    for (int r : multirank)
        if (r < 1)
            throw std::invalid_argument("ntd: multirank entries must be >= 1");

    FitReport report;
    std::vector<std::size_t> core_shape(order);
    for (std::size_t n = 0; n < order; ++n) {
        core_shape[n] = static_cast<std::size_t>(multirank[n]);
        if (core_shape[n] > t.shape()[n])
            report.flags.push_back("overcomplete mode " + std::to_string(n));
    }

    Rng rng(opts.seed);
    TuckerModel model;
    model.factors.reserve(order);
    for (std::size_t n = 0; n < order; ++n) {
        Matrix u(t.shape()[n], core_shape[n]);
        for (std::size_t i = 0; i < u.size(); ++i)
            u.data()[i] = rng.uniform();
        model.factors.push_back(std::move(u));
    }
    model.core = DenseTensor(core_shape);
    for (std::size_t i = 0; i < model.core.size(); ++i)
        model.core[i] = rng.uniform();
    {
        const double recon_norm = frobenius_norm(tucker_reconstruct(model));
        if (recon_norm > 0.0) {
            const double scale = t_norm / recon_norm;
            for (std::size_t i = 0; i < model.core.size(); ++i)
                model.core[i] *= scale;
        }
    }

    const double eps = opts.epsilon_floor;
    std::vector<std::vector<char>> reinit_used(order);
    for (std::size_t n = 0; n < order; ++n)
        reinit_used[n].assign(core_shape[n], 0);

    std::vector<Matrix> factor_transposes(order);
    std::vector<Matrix> factor_grams(order);
    auto refresh_mode = [&](std::size_t n) {
        factor_transposes[n] = transpose(model.factors[n]);
        factor_grams[n] = gram(model.factors[n]);
    };
    for (std::size_t n = 0; n < order; ++n)
        refresh_mode(n);

    double prev = std::pow(relative_error(t, tucker_reconstruct(model)) * t_norm, 2);
    report.trace.reserve(static_cast<std::size_t>(opts.max_iters));
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        for (std::size_t n = 0; n < order; ++n) {
            Matrix& u = model.factors[n];
            // Numerator X_(n) M = [T x_{k!=n} U_k^T]_(n) G_(n)^T.
            const DenseTensor projected = contract_all_but(t, factor_transposes, n);
            const Matrix core_unfold = unfold(model.core, n);
            const Matrix num = matmul_nt(unfold(projected, n), core_unfold);
            // Denominator U (M^T M) with M^T M = G_(n) [G x_{k!=n} U_k^T U_k]_(n)^T.
            const DenseTensor core_gram = contract_all_but(model.core, factor_grams, n);
            const Matrix mtm = matmul_nt(core_unfold, unfold(core_gram, n));
            const Matrix den = matmul(u, mtm);
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double updated = u.data()[i] * num.data()[i] / (den.data()[i] + eps);
                u.data()[i] = std::max(updated, eps);
                assert(u.data()[i] >= 0.0);
            }
            // Dead-column rule: one reinit from noise, then leave at floor.
            for (std::size_t r = 0; r < u.cols(); ++r) {
                if (column_norm(u, r) >= kDeadColumnNorm)
                    continue;
                if (!reinit_used[n][r]) {
                    reinit_used[n][r] = 1;
                    for (std::size_t i = 0; i < u.rows(); ++i)
                        u(i, r) = rng.uniform();
                } else {
                    for (std::size_t i = 0; i < u.rows(); ++i)
                        u(i, r) = eps;
                    report.flags.push_back("dead column: mode " + std::to_string(n) +
                                           " column " + std::to_string(r));
                }
            }
            refresh_mode(n);
        }

        {
            const DenseTensor num = contract_all_but(t, factor_transposes, order);
            const DenseTensor den = contract_all_but(model.core, factor_grams, order);
            for (std::size_t i = 0; i < model.core.size(); ++i) {
                const double updated = model.core[i] * num[i] / (den[i] + eps);
                model.core[i] = std::max(updated, eps);
            }
        }

        const DenseTensor recon = tucker_reconstruct(model);
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

    // Unit-normalize factor columns; absorb scales into the core. Exact
    // algebra, so the reconstruction (and objective) is unchanged.
    std::vector<std::vector<double>> scales(order);
    for (std::size_t n = 0; n < order; ++n) {
        Matrix& u = model.factors[n];
        scales[n].assign(u.cols(), 1.0);
        for (std::size_t r = 0; r < u.cols(); ++r) {
            const double norm = column_norm(u, r);
            if (norm < kDeadColumnNorm)
                continue; // dead column, already flagged
            scales[n][r] = norm;
            for (std::size_t i = 0; i < u.rows(); ++i)
                u(i, r) /= norm;
        }
    }
    {
        std::vector<std::size_t> idx(order, 0);
        for (std::size_t flat = 0; flat < model.core.size(); ++flat) {
            double s = 1.0;
            for (std::size_t n = 0; n < order; ++n)
                s *= scales[n][idx[n]];
            model.core[flat] *= s;
            for (std::size_t k = order; k-- > 0;) {
                if (++idx[k] < core_shape[k])
                    break;
                idx[k] = 0;
            }
        }
    }

    report.final_relative_error = relative_error(t, tucker_reconstruct(model));
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(model), std::move(report)};
}

} // namespace nntf
