#pragma once

#include <vector>

#include "wego/core_types.hpp"
#include "wego/guidance.hpp"
#include "wego/metrics.hpp"
#include "wego/trainer.hpp"

namespace wego {

struct InferConfig {
    int steps = 10;
    GuidanceConfig guidance{0.9, 0.8, /*renormalize=*/true, GuidanceMode::RelativeOrder};
    bool early_stop = true;
};

struct StepState {
    OrderScoreMatrix text_scores;
    OrderScoreMatrix image_scores;
    Permutation text_perm;
    Permutation image_perm;
};

struct InferResult {
    Permutation text_perm;
    Permutation image_perm;
    std::vector<StepState> trace; // executed steps + 1 entries, index 0 = uni-modal
};

// Multi-step iterative cross-modal boosting. Step t refines both matrices
// simultaneously from step t-1 values and decodes each.
InferResult iterative_infer(const StoryPair& story, const ModelParams& text_model,
                            const ModelParams& image_model, const InferConfig& cfg);

struct StepReport {
    CorpusReport text;
    CorpusReport image;
};

// Corpus metrics after every boost step 0..steps. Runs with early stopping
// disabled so each step's metrics cover every story.
std::vector<StepReport> evaluate_corpus(const std::vector<StoryPair>& corpus,
                                        const ModelParams& text_model,
                                        const ModelParams& image_model,
                                        const InferConfig& cfg);

} // namespace wego
