#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wego/classifier.hpp"
#include "wego/core_types.hpp"
#include "wego/encoder.hpp"
#include "wego/guidance.hpp"

namespace wego {

// One modality's trainable state: context encoder + pairwise classifier.
struct ModelParams {
    EncoderParams encoder;
    PairClassifierParams classifier;

    std::size_t param_count() const {
        return encoder.param_count() + classifier.param_count();
    }
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);
    ModelParams zeros_like() const {
        return ModelParams{encoder.zeros_like(), classifier.zeros_like()};
    }
};

ModelParams init_model(std::size_t d, std::size_t h, std::uint64_t seed,
                       std::size_t num_blocks = 1);

enum class Alternation { PerBatch, PerEpoch };

struct TrainConfig {
    double learning_rate = 2e-4;
    int batch_size = 64;
    int epochs = 20;
    std::uint64_t seed = 0;
    GuidanceConfig guidance;
    bool ib_in_training = true;
    Alternation alternation = Alternation::PerBatch;
    std::size_t d = 32;
    std::size_t heads = 8;
    std::size_t blocks = 1;
};

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    static AdamState for_size(std::size_t n) {
        return AdamState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    }
};

// Standard bias-corrected Adam update. A non-finite gradient skips the
// update (step counter still advances) and reports via the return value.
// Returns false iff the step was skipped.
bool adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, double lr);

struct EpochStats {
    double text_loss = 0.0;
    double image_loss = 0.0;
    std::size_t skipped_steps = 0;
};

// Per-story loss + gradient for one modality's model, with the counterpart
// frozen. Guidance contributions are constants (stop-gradient).
struct StoryGrad {
    double loss = 0.0;
    ModelParams grad; // same shapes as the trained model
};

StoryGrad story_gradient(const StoryPair& story, Modality trained,
                         const ModelParams& trained_model,
                         const ModelParams& frozen_model, const TrainConfig& cfg);

// One epoch of alternating updates: image model trained against the frozen
// text model's guidance, then the text model symmetrically.
EpochStats train_epoch(const std::vector<StoryPair>& corpus, ModelParams& text_model,
                       ModelParams& image_model, const TrainConfig& cfg,
                       AdamState& text_opt, AdamState& image_opt);

struct Checkpoint {
    TrainConfig cfg;
    ModelParams text_model;
    ModelParams image_model;
    AdamState text_opt;
    AdamState image_opt;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace wego
