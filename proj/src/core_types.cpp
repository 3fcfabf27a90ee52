#include "wego/core_types.hpp"

#include <algorithm>
#include <cmath>

namespace wego {

std::vector<int> Permutation::positions() const {
    std::vector<int> pos(order.size(), -1);
    for (std::size_t p = 0; p < order.size(); ++p)
        pos[static_cast<std::size_t>(order[p])] = static_cast<int>(p);
    return pos;
}

Permutation permutation_from_positions(const std::vector<int>& positions) {
    Permutation perm;
    perm.order.assign(positions.size(), -1);
    for (std::size_t e = 0; e < positions.size(); ++e)
        perm.order[static_cast<std::size_t>(positions[e])] = static_cast<int>(e);
    return perm;
}

bool is_valid_permutation(const std::vector<int>& p) {
    std::vector<bool> seen(p.size(), false);
    for (int v : p) {
        if (v < 0 || static_cast<std::size_t>(v) >= p.size() || seen[static_cast<std::size_t>(v)])
            return false;
        seen[static_cast<std::size_t>(v)] = true;
    }
    return true;
}

namespace {

void validate_element_set(const ElementSet& set, const std::string& label,
                          std::vector<std::string>& out) {
    if (set.elements.size() < 2)
        out.push_back(label + ": fewer than 2 elements");
    if (set.gold_order.size() != set.elements.size())
        out.push_back(label + ": gold_order length mismatch");
    else if (!is_valid_permutation(set.gold_order))
        out.push_back(label + ": gold_order not a permutation");
    if (!set.elements.empty()) {
        const std::size_t d = set.elements.front().size();
        for (const auto& e : set.elements) {
            if (e.size() != d) {
                out.push_back(label + ": inconsistent embedding width");
                break;
            }
        }
        for (const auto& e : set.elements) {
            if (std::any_of(e.begin(), e.end(), [](double v) { return !std::isfinite(v); })) {
                out.push_back(label + ": non-finite embedding entry");
                break;
            }
        }
    }
}

} // namespace

std::vector<std::string> validate_story(const StoryPair& pair) {
    std::vector<std::string> out;
    validate_element_set(pair.text, "text", out);
    validate_element_set(pair.image, "image", out);
    if (pair.cross_sim) {
        const auto& c = *pair.cross_sim;
        if (c.rows() != pair.text.size() || c.cols() != pair.image.size())
            out.push_back("similarity shape mismatch");
        for (double v : c.data()) {
            if (!std::isfinite(v)) {
                out.push_back("non-finite similarity entry");
                break;
            }
        }
    }
    return out;
}

std::vector<std::string> validate_order_matrix(const Matrix& m) {
    std::vector<std::string> out;
    if (m.rows() != m.cols())
        out.push_back("order matrix not square");
    for (std::size_t i = 0; i < m.rows() && i < m.cols(); ++i)
        if (m(i, i) != 0.0) {
            out.push_back("nonzero diagonal entry");
            break;
        }
    for (double v : m.data()) {
        if (!std::isfinite(v)) {
            out.push_back("non-finite score");
            break;
        }
        if (v < 0.0) {
            out.push_back("negative score");
            break;
        }
    }
    return out;
}

} // namespace wego
