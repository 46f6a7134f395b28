#include "nntf/multirank.hpp"

#include "nntf/rng.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace nntf {

MultirankEstimate estimate_multirank(const DenseTensor& t, const MultirankOptions& opts) {
    if (opts.epsilon <= 0.0 || opts.epsilon >= 1.0)
        throw std::invalid_argument("estimate_multirank: epsilon must be in (0, 1)");
    if (opts.restarts < 1)
        throw std::invalid_argument("estimate_multirank: restarts must be >= 1");
    require_nonnegative(t, "estimate_multirank input");
    if (frobenius_norm(t) == 0.0)
        throw std::domain_error("estimate_multirank: input tensor has zero norm");

    const std::size_t order = t.order();
    if (!opts.r_max_per_mode.empty() && opts.r_max_per_mode.size() != order)
        throw std::invalid_argument("estimate_multirank: r_max_per_mode size does not match order");

    MultirankEstimate est;
    est.epsilon = opts.epsilon;
    est.ranks.resize(order);
    est.curves.resize(order);
    est.r_max.resize(order);
    est.mode_converged.assign(order, 0);

    for (std::size_t n = 0; n < order; ++n) {
        const std::size_t other = t.size() / t.shape()[n];
        int r_cap = static_cast<int>(std::min<std::size_t>(t.shape()[n], other));
        if (!opts.r_max_per_mode.empty()) {
            if (opts.r_max_per_mode[n] < 1)
                throw std::invalid_argument("estimate_multirank: r_max entries must be >= 1");
            r_cap = opts.r_max_per_mode[n];
        }
        est.r_max[n] = r_cap;

        const Matrix x = unfold(t, n);
        SweepOptions sweep;
        sweep.nmf = opts.nmf;
        // Independent stream per mode; the rank/restart split happens inside
        // nmf_best_of.
        sweep.nmf.seed = split_seed(opts.nmf.seed, seed_stream::kMultirank + 16 * n);
        sweep.restarts = opts.restarts;
        sweep.threads = opts.threads;

        double running_min = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int rank = 1; rank <= r_cap; ++rank) {
            const NmfResult best = nmf_best_of(x, rank, sweep);
            running_min = std::min(running_min, best.final_relative_error);
            est.curves[n].push_back({rank, running_min});
            if (running_min <= opts.epsilon) {
                est.ranks[n] = rank;
                est.mode_converged[n] = 1;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            est.ranks[n] = r_cap;
    }
    return est;
}

} // namespace nntf
