#pragma once

#include "wego/core_types.hpp"

namespace wego {

// Orders elements by descending node score, where score(k) is the sum of
// outgoing minus incoming pairwise scores. Ties break to the smaller index.
Permutation decode_order(const OrderScoreMatrix& matrix);

// Exhaustive oracle: the permutation maximizing the total score of all
// pairs placed in agreement, lexicographically smallest on ties. n <= 8.
Permutation brute_force_decode(const OrderScoreMatrix& matrix);

} // namespace wego
