#pragma once

#include "wego/core_types.hpp"

namespace wego {

enum class GuidanceMode { Off, RelativeOrder };

// Which modality provides the source matrix. Determines whether the
// similarity matrix is read by rows (text source) or columns (image source).
enum class GuidanceDirection { TextToImage, ImageToText };

struct GuidanceConfig {
    double theta_text_source = 0.9;  // text guides image
    double theta_image_source = 0.8; // image guides text
    bool renormalize = false;
    GuidanceMode mode = GuidanceMode::RelativeOrder;
};

// Keeps entries strictly greater than theta, zeroes the rest.
OrderScoreMatrix mask_matrix(const OrderScoreMatrix& source, double theta);

enum class SimAxis { Row, Column };

// Most similar counterpart index for one source element. Row axis scans
// C(source_index, :), Column axis scans C(:, source_index). Ties break to
// the smallest index.
std::size_t align_argmax(const CrossModalSimilarity& c, std::size_t source_index,
                         SimAxis axis);

// Cross-modal guided order matrix update: for every confident source pair
// (p,q), adds source(p,q) onto the target entry addressed via similarity
// argmax. Collisions (both endpoints mapping to the same target) are
// skipped; the diagonal stays 0. With cfg.renormalize, each off-diagonal
// unordered pair is rescaled to sum to 1 preserving the ratio.
OrderScoreMatrix cgo_mu(const OrderScoreMatrix& target,
                        const OrderScoreMatrix& source,
                        const CrossModalSimilarity& c, double theta,
                        GuidanceDirection direction, const GuidanceConfig& cfg);

} // namespace wego
