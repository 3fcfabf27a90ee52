#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wego/core_types.hpp"

namespace wego {

struct SynthConfig {
    std::size_t stories = 200;
    std::size_t set_size_min = 5;
    std::size_t set_size_max = 5;
    std::size_t dim = 32;
    double order_signal = 1.0;
    double noise_text = 0.0;
    double noise_image = 0.0;
    double align_noise = 0.0;
    std::uint64_t seed = 1;
};

enum class Regime { CleanBoth, StrongTextWeakImage, WeakBoth, NoisyAlignment };

// Fixed documented config per named experimental regime.
SynthConfig regime(Regime name);
SynthConfig regime_by_name(const std::string& name); // kebab-case names

// Deterministic paired-story corpus. Each story shares one latent order
// across modalities; element features carry a linear position signal plus
// per-modality noise; cross_sim is the identity alignment on the latent
// correspondence plus optional perturbation, row-scaled to [0,1].
std::vector<StoryPair> generate_corpus(const SynthConfig& cfg);

} // namespace wego
