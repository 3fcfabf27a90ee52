#pragma once

#include "wego/core_types.hpp"

namespace wego {

struct CorpusReport {
    double acc = 0.0;
    double pmr = 0.0;
    double tau = 0.0;
};

// Fraction of positions holding the same element in both orders.
double accuracy(const Permutation& pred, const Permutation& gold);

// Fraction of sets predicted exactly.
double pmr(const std::vector<Permutation>& preds, const std::vector<Permutation>& golds);

// 1 - 2 * inversions / C(n,2). Requires n >= 2.
double kendall_tau(const Permutation& pred, const Permutation& gold);

// Unweighted per-set means of acc and tau, plus pmr.
CorpusReport corpus_report(const std::vector<Permutation>& preds,
                           const std::vector<Permutation>& golds);

} // namespace wego
