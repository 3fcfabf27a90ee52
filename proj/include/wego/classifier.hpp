#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "wego/core_types.hpp"

namespace wego {

// Linear head over the concatenated pair representation [e1; e2].
struct PairClassifierParams {
    std::vector<double> weight; // length 2d
    double bias = 0.0;

    std::size_t param_count() const { return weight.size() + 1; }
    PairClassifierParams zeros_like() const {
        return PairClassifierParams{std::vector<double>(weight.size(), 0.0), 0.0};
    }
};

PairClassifierParams init_classifier(std::size_t d, std::uint64_t seed);

// Logit that element 1 precedes element 2. No antisymmetry is imposed;
// both directions are computed independently.
double pair_logit(const Embedding& e1, const Embedding& e2,
                  const PairClassifierParams& params);

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Entry (k,l) = sigmoid(pair_logit(e_k, e_l)), diagonal 0. Requires n >= 2.
OrderScoreMatrix order_matrix(const std::vector<Embedding>& encoded,
                              const PairClassifierParams& params);

// Two-way cross-entropy over each ordered pair: for gold pair (k before l),
// -log softmax((m_kl, m_lk))_0, normalized by P = n(n-1). Returns the loss
// and d(loss)/d(m) for every off-diagonal entry.
std::pair<double, Matrix> pairwise_loss(const OrderScoreMatrix& matrix,
                                        const Permutation& gold_order);

} // namespace wego
