#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wego/matrix.hpp"

namespace wego {

// One element's feature vector. Fixed width d within a corpus.
using Embedding = std::vector<double>;

enum class Modality { Text, Image };

// Directed pairwise order scores for one set. Entry (k,l) scores
// "element k precedes element l". Diagonal fixed at 0.
using OrderScoreMatrix = Matrix;

// M x N semantic affinity between sentence indices (rows) and image
// indices (columns).
using CrossModalSimilarity = Matrix;

// An ordering: order[0] is the element placed first.
struct Permutation {
    std::vector<int> order;

    std::size_t size() const { return order.size(); }
    bool operator==(const Permutation& o) const = default;

    // positions[e] = position of element e.
    std::vector<int> positions() const;
};

// Inverse view: build a Permutation from per-element gold positions.
Permutation permutation_from_positions(const std::vector<int>& positions);

bool is_valid_permutation(const std::vector<int>& p);

// One modality's unordered element set plus its gold order.
struct ElementSet {
    std::vector<Embedding> elements;
    std::vector<int> gold_order; // gold_order[i] = gold position of element i
    Modality modality = Modality::Text;

    std::size_t size() const { return elements.size(); }
    Permutation gold_permutation() const { return permutation_from_positions(gold_order); }
};

// An aligned (text set, image set) pair.
struct StoryPair {
    std::string id;
    ElementSet text;  // size M
    ElementSet image; // size N
    std::optional<CrossModalSimilarity> cross_sim; // M x N
};

// Returns human-readable invariant violations; empty means well-formed.
std::vector<std::string> validate_story(const StoryPair& pair);

// Checks OrderScoreMatrix invariants (square, zero diagonal, finite,
// non-negative). Returns violations.
std::vector<std::string> validate_order_matrix(const Matrix& m);

} // namespace wego
