#include "wego/decoder.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace wego {

Permutation decode_order(const OrderScoreMatrix& matrix) {
    const std::size_t n = matrix.rows();
    if (n == 0 || matrix.cols() != n)
        throw std::invalid_argument("decode_order: matrix must be square, n >= 1");
    std::vector<double> score(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            if (k == l) continue;
            score[k] += matrix(k, l) - matrix(l, k);
        }
    Permutation perm;
    perm.order.resize(n);
    std::iota(perm.order.begin(), perm.order.end(), 0);
    std::stable_sort(perm.order.begin(), perm.order.end(),
                     [&](int a, int b) { return score[static_cast<std::size_t>(a)] >
                                                score[static_cast<std::size_t>(b)]; });
    return perm;
}

Permutation brute_force_decode(const OrderScoreMatrix& matrix) {
    const std::size_t n = matrix.rows();
    if (n == 0 || matrix.cols() != n)
        throw std::invalid_argument("brute_force_decode: matrix must be square");
    if (n > 8)
        throw std::invalid_argument("set too large for oracle");

    std::vector<int> cand(n);
    std::iota(cand.begin(), cand.end(), 0);
    std::vector<int> best;
    double best_score = 0.0;
    do {
        double s = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                s += matrix(static_cast<std::size_t>(cand[a]),
                            static_cast<std::size_t>(cand[b]));
        // Strict improvement keeps the lexicographically smallest optimum,
        // since next_permutation enumerates in lexicographic order.
        if (best.empty() || s > best_score) {
            best = cand;
            best_score = s;
        }
    } while (std::next_permutation(cand.begin(), cand.end()));
    return Permutation{best};
}

} // namespace wego
