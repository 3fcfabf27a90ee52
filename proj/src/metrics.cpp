#include "wego/metrics.hpp"

#include <stdexcept>

namespace wego {

double accuracy(const Permutation& pred, const Permutation& gold) {
    if (pred.size() != gold.size())
        throw std::invalid_argument("accuracy: length mismatch");
    std::size_t hits = 0;
    for (std::size_t p = 0; p < pred.size(); ++p)
        if (pred.order[p] == gold.order[p]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double pmr(const std::vector<Permutation>& preds, const std::vector<Permutation>& golds) {
    if (preds.size() != golds.size())
        throw std::invalid_argument("pmr: misaligned lists");
    if (preds.empty())
        throw std::invalid_argument("pmr: empty corpus");
    std::size_t exact = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == golds[i]) ++exact;
    return static_cast<double>(exact) / static_cast<double>(preds.size());
}

double kendall_tau(const Permutation& pred, const Permutation& gold) {
    const std::size_t n = pred.size();
    if (gold.size() != n)
        throw std::invalid_argument("kendall_tau: length mismatch");
    if (n < 2)
        throw std::invalid_argument("kendall_tau: need n >= 2");
    const auto pp = pred.positions();
    const auto gp = gold.positions();
    std::size_t inversions = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const bool pred_before = pp[a] < pp[b];
            const bool gold_before = gp[a] < gp[b];
            if (pred_before != gold_before) ++inversions;
        }
    const double pairs = static_cast<double>(n * (n - 1)) / 2.0;
    return 1.0 - 2.0 * static_cast<double>(inversions) / pairs;
}

CorpusReport corpus_report(const std::vector<Permutation>& preds,
                           const std::vector<Permutation>& golds) {
    if (preds.size() != golds.size())
        throw std::invalid_argument("corpus_report: misaligned lists");
    if (preds.empty())
        throw std::invalid_argument("corpus_report: empty corpus");
    CorpusReport r;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        r.acc += accuracy(preds[i], golds[i]);
        r.tau += kendall_tau(preds[i], golds[i]);
    }
    r.acc /= static_cast<double>(preds.size());
    r.tau /= static_cast<double>(preds.size());
    r.pmr = pmr(preds, golds);
    return r;
}

} // namespace wego
