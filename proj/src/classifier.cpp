#include "wego/classifier.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace wego {

PairClassifierParams init_classifier(std::size_t d, std::uint64_t seed) {
    PairClassifierParams p;
    p.weight.assign(2 * d, 0.0);
    std::mt19937_64 rng(seed);
    const double s = 1.0 / std::sqrt(static_cast<double>(2 * d));
    std::uniform_real_distribution<double> dist(-s, s);
    for (double& w : p.weight) w = dist(rng);
    p.bias = 0.0;
    return p;
}

double pair_logit(const Embedding& e1, const Embedding& e2,
                  const PairClassifierParams& params) {
    const std::size_t d = params.weight.size() / 2;
    if (e1.size() != d || e2.size() != d)
        throw std::invalid_argument("pair_logit: embedding width mismatch");
    double s = params.bias;
    for (std::size_t i = 0; i < d; ++i) {
        s += params.weight[i] * e1[i];
        s += params.weight[d + i] * e2[i];
    }
    return s;
}

OrderScoreMatrix order_matrix(const std::vector<Embedding>& encoded,
                              const PairClassifierParams& params) {
    const std::size_t n = encoded.size();
    if (n < 2)
        throw std::invalid_argument("order_matrix: need at least 2 elements");
    OrderScoreMatrix m(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            if (k == l) continue;
            m(k, l) = sigmoid(pair_logit(encoded[k], encoded[l], params));
        }
    return m;
}

std::pair<double, Matrix> pairwise_loss(const OrderScoreMatrix& matrix,
                                        const Permutation& gold_order) {
    const std::size_t n = matrix.rows();
    if (matrix.cols() != n || gold_order.size() != n)
        throw std::invalid_argument("pairwise_loss: size mismatch");
    const auto pos = gold_order.positions();
    const double inv_p = 1.0 / static_cast<double>(n * (n - 1));

    double loss = 0.0;
    Matrix grad(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            if (k == l || pos[k] >= pos[l]) continue;
            // Each unordered pair appears as two ordered-pair CE terms with
            // mirrored labels, hence the factor 2.
            const double diff = matrix(k, l) - matrix(l, k);
            // -log softmax((m_kl, m_lk))_0 = softplus(-diff)
            const double softplus = diff >= 0.0 ? std::log1p(std::exp(-diff))
                                                : -diff + std::log1p(std::exp(diff));
            loss += 2.0 * softplus;
            const double p = sigmoid(diff);
            grad(k, l) += -2.0 * (1.0 - p) * inv_p;
            grad(l, k) += 2.0 * (1.0 - p) * inv_p;
        }
    return {loss * inv_p, grad};
}

} // namespace wego
