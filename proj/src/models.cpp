#include "nntf/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nntf {

namespace {

void check_cpd(const CPDModel& model) {
    if (model.factors.empty())
        throw std::invalid_argument("cpd model has no factors");
    const std::size_t rank = model.weights.size();
    if (rank == 0)
        throw std::invalid_argument("cpd model has no components");
    for (const Matrix& f : model.factors)
        if (f.cols() != rank)
            throw std::invalid_argument("cpd factor column count does not match weight count");
}

} // namespace

DenseTensor cpd_reconstruct(const CPDModel& model) {
    check_cpd(model);
    const std::size_t order = model.order();
    const std::size_t rank = model.rank();
    std::vector<std::size_t> shape(order);
    for (std::size_t n = 0; n < order; ++n)
        shape[n] = model.factors[n].rows();

    DenseTensor t(shape);
    std::vector<std::size_t> idx(order, 0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        double value = 0.0;
        for (std::size_t r = 0; r < rank; ++r) {
            double prod = model.weights[r];
            for (std::size_t n = 0; n < order; ++n)
                prod *= model.factors[n](idx[n], r);
            value += prod;
        }
        t[flat] = value;
        for (std::size_t k = order; k-- > 0;) {
            if (++idx[k] < shape[k])
                break;
            idx[k] = 0;
        }
    }
    return t;
}

DenseTensor tucker_reconstruct(const TuckerModel& model) {
    if (model.factors.size() != model.core.order())
        throw std::invalid_argument("tucker model factor count does not match core order");
    for (std::size_t n = 0; n < model.factors.size(); ++n)
        if (model.factors[n].cols() != model.core.shape()[n])
            throw std::invalid_argument("tucker factor columns do not match core mode size");
    DenseTensor t = model.core;
    for (std::size_t n = 0; n < model.factors.size(); ++n)
        t = mode_n_product(t, model.factors[n], n);
    return t;
}

void canonicalize(CPDModel& model, std::vector<std::size_t>* perm_out) {
    check_cpd(model);
    const std::size_t order = model.order();
    const std::size_t rank = model.rank();

    for (std::size_t n = 0; n < order; ++n) {
        Matrix& f = model.factors[n];
        for (std::size_t r = 0; r < rank; ++r) {
            double norm = 0.0;
            for (std::size_t i = 0; i < f.rows(); ++i)
                norm += f(i, r) * f(i, r);
            norm = std::sqrt(norm);
            model.weights[r] *= norm;
            if (norm > 0.0)
                for (std::size_t i = 0; i < f.rows(); ++i)
                    f(i, r) /= norm;
        }
    }

    std::vector<std::size_t> perm(rank);
    std::iota(perm.begin(), perm.end(), 0);
    const Matrix& lead = model.factors[0];
    auto lex_less = [&](std::size_t a, std::size_t b) {
        for (std::size_t i = 0; i < lead.rows(); ++i) {
            if (lead(i, a) != lead(i, b))
                return lead(i, a) < lead(i, b);
        }
        return false;
    };
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        if (model.weights[a] != model.weights[b])
            return model.weights[a] > model.weights[b];
        return lex_less(a, b);
    });

    std::vector<double> weights(rank);
    for (std::size_t r = 0; r < rank; ++r)
        weights[r] = model.weights[perm[r]];
    model.weights = std::move(weights);
    if (perm_out)
        *perm_out = perm;
    for (std::size_t n = 0; n < order; ++n) {
        const Matrix& src = model.factors[n];
        Matrix dst(src.rows(), src.cols());
        for (std::size_t r = 0; r < rank; ++r)
            for (std::size_t i = 0; i < src.rows(); ++i)
                dst(i, r) = src(i, perm[r]);
        model.factors[n] = std::move(dst);
    }
}

Matrix khatri_rao_skip(const std::vector<Matrix>& factors, std::size_t skip) {
    if (skip >= factors.size())
        throw std::invalid_argument("khatri_rao_skip: mode out of range");
    if (factors.size() == 1)
        return Matrix(1, factors[0].cols(), 1.0);
    // Fold from the highest mode downwards; each newly folded (lower) mode
    // becomes the fastest-varying row index, matching unfold's columns.
    Matrix result;
    bool first = true;
    for (std::size_t k = factors.size(); k-- > 0;) {
        if (k == skip)
            continue;
        if (first) {
            result = factors[k];
            first = false;
        } else {
            result = khatri_rao(result, factors[k]);
        }
    }
    return result;
}

} // namespace nntf
