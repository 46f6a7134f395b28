#include "nntf/synth.hpp"

#include "nntf/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nntf {

GroundTruth generate(const SynthSpec& spec) {
    if (spec.shape.empty())
        throw std::invalid_argument("generate: shape must have at least one mode");
    if (spec.multirank.size() != spec.shape.size())
        throw std::invalid_argument("generate: multirank size does not match shape");
    if (spec.cpd_rank < 1)
        throw std::invalid_argument("generate: cpd_rank must be >= 1");
    const std::size_t order = spec.shape.size();
    for (std::size_t n = 0; n < order; ++n) {
        if (spec.multirank[n] < 1)
            throw std::invalid_argument("generate: multirank entries must be >= 1");
        if (static_cast<std::size_t>(spec.multirank[n]) > spec.shape[n])
            throw std::invalid_argument("generate: multirank entry exceeds mode size");
    }

    Rng rng(split_seed(spec.seed, seed_stream::kSynth));
    const std::size_t rank = static_cast<std::size_t>(spec.cpd_rank);

    GroundTruth truth;
    truth.u.reserve(order);
    truth.b.reserve(order);
    for (std::size_t n = 0; n < order; ++n) {
        Matrix u(spec.shape[n], static_cast<std::size_t>(spec.multirank[n]));
        for (std::size_t i = 0; i < u.size(); ++i)
            u.data()[i] = rng.uniform();
        for (std::size_t r = 0; r < u.cols(); ++r) {
            double norm = 0.0;
            for (std::size_t i = 0; i < u.rows(); ++i)
                norm += u(i, r) * u(i, r);
            norm = std::sqrt(norm);
            for (std::size_t i = 0; i < u.rows(); ++i)
                u(i, r) /= norm;
        }
        truth.u.push_back(std::move(u));
    }
    for (std::size_t n = 0; n < order; ++n) {
        // The first R_n components use the pure generators (identity
        // columns); extras are mixtures bounded away from zero. Pure
        // generators keep the planted multirank detectable: with mixture-only
        // columns the mode cones routinely collapse to near rank one.
        const std::size_t rn = static_cast<std::size_t>(spec.multirank[n]);
        Matrix b(rn, rank);
        for (std::size_t r = 0; r < rank; ++r) {
            if (r < rn) {
                b(r, r) = 1.0;
            } else {
                for (std::size_t i = 0; i < rn; ++i)
                    b(i, r) = rng.uniform(0.1, 1.0);
            }
        }
        truth.b.push_back(std::move(b));
    }

    truth.model.weights.assign(rank, 1.0);
    truth.model.factors.reserve(order);
    for (std::size_t n = 0; n < order; ++n)
        truth.model.factors.push_back(matmul(truth.u[n], truth.b[n]));
    // Mirror the canonical component permutation onto the B_n so that
    // model.factors[n] stays parallel to the U_n * B_n column, column for
    // column. Components get equal unit weights: with the raw product
    // weights one component usually dominates (the per-mode scales compound
    // multiplicatively) and the planted multirank becomes undetectable.
    {
        std::vector<std::size_t> perm;
        canonicalize(truth.model, &perm);
        truth.model.weights.assign(rank, 1.0);
        for (std::size_t n = 0; n < order; ++n) {
            const Matrix& src = truth.b[n];
            Matrix dst(src.rows(), src.cols());
            for (std::size_t r = 0; r < rank; ++r)
                for (std::size_t i = 0; i < src.rows(); ++i)
                    dst(i, r) = src(i, perm[r]);
            truth.b[n] = std::move(dst);
        }
    }

    truth.clean = cpd_reconstruct(truth.model);

    if (!spec.snr_db.has_value()) {
        truth.noisy = truth.clean;
        return truth;
    }

    // Multiplicative clipped-Gaussian noise. sigma is solved against the
    // realized perturbation norm, so the requested SNR holds exactly as long
    // as sigma <= 1 (which the Z >= -1 clip needs for nonnegativity).
    std::vector<double> z(truth.clean.size());
    double perturb_sq = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = std::max(rng.normal(), -1.0);
        const double tz = truth.clean[i] * z[i];
        perturb_sq += tz * tz;
    }
    const double clean_norm = frobenius_norm(truth.clean);
    if (perturb_sq == 0.0)
        throw std::domain_error("generate: degenerate noise draw");
    const double sigma = std::pow(10.0, -*spec.snr_db / 20.0) * clean_norm / std::sqrt(perturb_sq);
    if (sigma > 1.0)
        throw std::domain_error(
            "generate: requested SNR too low for nonnegativity-preserving multiplicative noise");
    truth.noisy = truth.clean;
    double noise_sq = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        truth.noisy[i] = truth.clean[i] * (1.0 + sigma * z[i]);
        const double d = truth.noisy[i] - truth.clean[i];
        noise_sq += d * d;
    }
    truth.realized_snr_db = 10.0 * std::log10(clean_norm * clean_norm / noise_sq);
    return truth;
}

} // namespace nntf
