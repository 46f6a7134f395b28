#include "doctest.h"

#include "nntf/multirank.hpp"
#include "nntf/rng.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace nntf;

namespace {

// Tucker fixture with well-separated mode cones: each factor column is
// strong on its own index block, and the core is sharpened so no mode
// collapses toward rank one.
Matrix blocky_factor(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix u(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t r = 0; r < cols; ++r)
            u(i, r) = (i % cols == r) ? rng.uniform(0.5, 1.0) : 0.02 * rng.uniform();
    return u;
}

DenseTensor tucker_fixture(std::uint64_t seed) {
    Rng rng(split_seed(seed, 201));
    TuckerModel model;
    model.core = DenseTensor({3, 2, 4});
    for (std::size_t i = 0; i < model.core.size(); ++i) {
        const double x = rng.uniform();
        model.core[i] = x * x * x;
    }
    model.factors = {blocky_factor(9, 3, rng), blocky_factor(8, 2, rng),
                     blocky_factor(10, 4, rng)};
    return tucker_reconstruct(model);
}

DenseTensor rank1_tensor(std::uint64_t seed) {
    Rng rng(seed);
    CPDModel model;
    model.weights = {1.0};
    model.factors = {oracle::random_matrix(5, 1, rng), oracle::random_matrix(4, 1, rng),
                     oracle::random_matrix(3, 1, rng)};
    return cpd_reconstruct(model);
}

// Reverses the mode order of a tensor (a full mode permutation).
DenseTensor reverse_modes(const DenseTensor& t) {
    std::vector<std::size_t> rshape(t.shape().rbegin(), t.shape().rend());
    DenseTensor out(rshape);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        auto idx = oracle::index_of(flat, t.shape());
        std::reverse(idx.begin(), idx.end());
        out[oracle::flat_of(idx, rshape)] = t[flat];
    }
    return out;
}

} // namespace

TEST_CASE("estimate_multirank validates inputs") {
    const DenseTensor t = rank1_tensor(3);
    MultirankOptions opts;
    opts.epsilon = 0.0;
    CHECK_THROWS_AS(estimate_multirank(t, opts), std::invalid_argument);
    opts.epsilon = 1.5;
    CHECK_THROWS_AS(estimate_multirank(t, opts), std::invalid_argument);

    opts.epsilon = 1e-2;
    DenseTensor negative = t;
    negative[0] = -1.0;
    CHECK_THROWS_AS(estimate_multirank(negative, opts), std::invalid_argument);
    CHECK_THROWS_AS(estimate_multirank(DenseTensor({2, 2, 2}), opts), std::domain_error);

    opts.r_max_per_mode = {2, 2};
    CHECK_THROWS_AS(estimate_multirank(t, opts), std::invalid_argument);
}

TEST_CASE("rank-1 tensor has multirank (1,1,1)") {
    MultirankOptions opts;
    opts.nmf.seed = 11;
    const MultirankEstimate est = estimate_multirank(rank1_tensor(5), opts);
    CHECK(est.ranks == std::vector<int>{1, 1, 1});
    CHECK(est.all_converged());
    for (const auto& curve : est.curves) {
        REQUIRE(curve.size() == 1);
        CHECK(curve[0].error <= 1e-2);
    }
}

TEST_CASE("noiseless Tucker fixture recovers (3,2,4) on every seed") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        MultirankOptions opts;
        opts.nmf.seed = split_seed(seed, 202);
        const MultirankEstimate est = estimate_multirank(tucker_fixture(seed), opts);
        CHECK(est.ranks == std::vector<int>{3, 2, 4});
    }
}

TEST_CASE("1% multiplicative noise still recovers (3,2,4) on >=90% of seeds") {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        DenseTensor t = tucker_fixture(seed);
        Rng noise(split_seed(seed, 203));
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] *= 1.0 + 0.01 * std::max(noise.normal(), -1.0);
        MultirankOptions opts;
        opts.epsilon = 5e-2;
        opts.nmf.seed = split_seed(seed, 204);
        if (estimate_multirank(t, opts).ranks == std::vector<int>{3, 2, 4})
            ++good;
    }
    CHECK(good >= 9);
}

TEST_CASE("loosening epsilon never increases a mode rank") {
    const DenseTensor t = tucker_fixture(4);
    MultirankOptions tight;
    tight.epsilon = 1e-2;
    tight.nmf.seed = 9;
    MultirankOptions loose = tight;
    loose.epsilon = 2e-1;
    const auto tight_est = estimate_multirank(t, tight);
    const auto loose_est = estimate_multirank(t, loose);
    for (std::size_t n = 0; n < 3; ++n)
        CHECK(loose_est.ranks[n] <= tight_est.ranks[n]);
}

TEST_CASE("mode permutation permutes the estimated ranks") {
    const DenseTensor t = tucker_fixture(6);
    MultirankOptions opts;
    opts.nmf.seed = 21;
    const auto est = estimate_multirank(t, opts);
    const auto rev = estimate_multirank(reverse_modes(t), opts);
    std::vector<int> expected(est.ranks.rbegin(), est.ranks.rend());
    CHECK(rev.ranks == expected);
}

TEST_CASE("positive scaling leaves the estimate unchanged") {
    DenseTensor t = tucker_fixture(8);
    MultirankOptions opts;
    opts.nmf.seed = 33;
    const auto base = estimate_multirank(t, opts);
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] *= 1713.25;
    const auto scaled = estimate_multirank(t, opts);
    CHECK(scaled.ranks == base.ranks);
}

TEST_CASE("automatic sweep ceiling is min(I_n, prod of others)") {
    Rng rng(53);
    const DenseTensor t = oracle::random_tensor({6, 2, 3}, rng);
    MultirankOptions opts;
    opts.nmf.seed = 3;
    const auto est = estimate_multirank(t, opts);
    CHECK(est.r_max == std::vector<int>{6, 2, 3});
    for (std::size_t n = 0; n < 3; ++n)
        CHECK(est.ranks[n] <= est.r_max[n]);
}

TEST_CASE("modes that never meet epsilon are flagged with ranks at r_max") {
    Rng rng(59);
    DenseTensor t = oracle::random_tensor({5, 4, 4}, rng);
    MultirankOptions opts;
    opts.epsilon = 1e-13; // unreachable for a generic tensor at capped rank
    opts.r_max_per_mode = {2, 2, 2};
    opts.nmf.seed = 13;
    const auto est = estimate_multirank(t, opts);
    CHECK_FALSE(est.all_converged());
    for (std::size_t n = 0; n < 3; ++n) {
        CHECK_FALSE(static_cast<bool>(est.mode_converged[n]));
        CHECK(est.ranks[n] == 2);
        CHECK(est.curves[n].size() == 2);
    }
}
