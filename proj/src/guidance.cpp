#include "wego/guidance.hpp"

#include <stdexcept>

namespace wego {

OrderScoreMatrix mask_matrix(const OrderScoreMatrix& source, double theta) {
    OrderScoreMatrix out(source.rows(), source.cols());
    for (std::size_t i = 0; i < source.rows(); ++i)
        for (std::size_t j = 0; j < source.cols(); ++j) {
            if (i == j) continue;
            if (source(i, j) > theta) out(i, j) = source(i, j);
        }
    return out;
}

std::size_t align_argmax(const CrossModalSimilarity& c, std::size_t source_index,
                         SimAxis axis) {
    if (axis == SimAxis::Row) {
        if (source_index >= c.rows())
            throw std::out_of_range("align_argmax: row index out of range");
        std::size_t best = 0;
        for (std::size_t j = 1; j < c.cols(); ++j)
            if (c(source_index, j) > c(source_index, best)) best = j;
        return best;
    }
    if (source_index >= c.cols())
        throw std::out_of_range("align_argmax: column index out of range");
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.rows(); ++i)
        if (c(i, source_index) > c(best, source_index)) best = i;
    return best;
}

OrderScoreMatrix cgo_mu(const OrderScoreMatrix& target,
                        const OrderScoreMatrix& source,
                        const CrossModalSimilarity& c, double theta,
                        GuidanceDirection direction, const GuidanceConfig& cfg) {
    if (cfg.mode == GuidanceMode::Off) return target;

    const SimAxis axis =
        direction == GuidanceDirection::TextToImage ? SimAxis::Row : SimAxis::Column;
    const std::size_t src_n = source.rows();
    if (source.cols() != src_n || target.cols() != target.rows())
        throw std::invalid_argument("cgo_mu: order matrices must be square");
    if (direction == GuidanceDirection::TextToImage) {
        if (c.rows() != src_n || c.cols() != target.rows())
            throw std::invalid_argument("cgo_mu: similarity shape mismatch");
    } else {
        if (c.cols() != src_n || c.rows() != target.rows())
            throw std::invalid_argument("cgo_mu: similarity shape mismatch");
    }

    OrderScoreMatrix masked = mask_matrix(source, theta);
    OrderScoreMatrix refined = target;
    for (std::size_t p = 0; p < src_n; ++p)
        for (std::size_t q = 0; q < src_n; ++q) {
            if (p == q || masked(p, q) == 0.0) continue;
            const std::size_t i = align_argmax(c, p, axis);
            const std::size_t j = align_argmax(c, q, axis);
            if (i == j) continue; // both endpoints map to one target element
            refined(i, j) += source(p, q);
        }

    if (cfg.renormalize) {
        const std::size_t n = refined.rows();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double sum = refined(i, j) + refined(j, i);
                if (sum > 0.0) {
                    refined(i, j) /= sum;
                    refined(j, i) /= sum;
                }
            }
    }
    return refined;
}

} // namespace wego
