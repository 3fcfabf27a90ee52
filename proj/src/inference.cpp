#include "wego/inference.hpp"

#include <stdexcept>

#include "wego/decoder.hpp"
#include "wego/errors.hpp"

namespace wego {

InferResult iterative_infer(const StoryPair& story, const ModelParams& text_model,
                            const ModelParams& image_model, const InferConfig& cfg) {
    if (cfg.steps < 0)
        throw std::invalid_argument("iterative_infer: negative step count");
    const bool guided = cfg.guidance.mode != GuidanceMode::Off;
    if (guided && cfg.steps > 0 && !story.cross_sim)
        throw DataError("story '" + story.id + "': missing similarity matrix");

    StepState state;
    state.text_scores =
        order_matrix(encode_set(story.text.elements, text_model.encoder), text_model.classifier);
    state.image_scores =
        order_matrix(encode_set(story.image.elements, image_model.encoder),
                     image_model.classifier);
    state.text_perm = decode_order(state.text_scores);
    state.image_perm = decode_order(state.image_scores);

    InferResult result;
    result.trace.push_back(state);

    for (int t = 1; t <= cfg.steps; ++t) {
        const StepState& prev = result.trace.back();
        StepState next;
        if (guided) {
            // Jacobi-style: both refinements read step t-1 matrices.
            next.text_scores = cgo_mu(prev.text_scores, prev.image_scores, *story.cross_sim,
                                      cfg.guidance.theta_image_source,
                                      GuidanceDirection::ImageToText, cfg.guidance);
            next.image_scores = cgo_mu(prev.image_scores, prev.text_scores, *story.cross_sim,
                                       cfg.guidance.theta_text_source,
                                       GuidanceDirection::TextToImage, cfg.guidance);
        } else {
            next.text_scores = prev.text_scores;
            next.image_scores = prev.image_scores;
        }
        next.text_perm = decode_order(next.text_scores);
        next.image_perm = decode_order(next.image_scores);
        const bool stable =
            next.text_perm == prev.text_perm && next.image_perm == prev.image_perm;
        result.trace.push_back(std::move(next));
        if (cfg.early_stop && stable) break;
    }

    result.text_perm = result.trace.back().text_perm;
    result.image_perm = result.trace.back().image_perm;
    return result;
}

std::vector<StepReport> evaluate_corpus(const std::vector<StoryPair>& corpus,
                                        const ModelParams& text_model,
                                        const ModelParams& image_model,
                                        const InferConfig& cfg) {
    if (corpus.empty())
        throw DataError("evaluate_corpus: empty corpus");

    InferConfig full = cfg;
    full.early_stop = false;

    const std::size_t steps = static_cast<std::size_t>(cfg.steps);
    std::vector<std::vector<Permutation>> text_preds(steps + 1), image_preds(steps + 1);
    std::vector<Permutation> text_golds, image_golds;
    for (const auto& story : corpus) {
        auto res = iterative_infer(story, text_model, image_model, full);
        for (std::size_t s = 0; s <= steps; ++s) {
            text_preds[s].push_back(res.trace[s].text_perm);
            image_preds[s].push_back(res.trace[s].image_perm);
        }
        text_golds.push_back(story.text.gold_permutation());
        image_golds.push_back(story.image.gold_permutation());
    }

    std::vector<StepReport> reports(steps + 1);
    for (std::size_t s = 0; s <= steps; ++s) {
        reports[s].text = corpus_report(text_preds[s], text_golds);
        reports[s].image = corpus_report(image_preds[s], image_golds);
    }
    return reports;
}

} // namespace wego
