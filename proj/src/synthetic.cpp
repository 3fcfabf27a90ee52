#include "wego/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "wego/errors.hpp"

namespace wego {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Corpus files store 32-bit features; quantize at generation time so the
// in-memory corpus round-trips through serialization unchanged.
double quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

Embedding unit_direction(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Embedding u(d);
    double norm = 0.0;
    for (double& v : u) {
        v = normal(rng);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
    return u;
}

ElementSet make_set(Modality modality, const std::vector<int>& latent,
                    const Embedding& direction, double order_signal, double noise,
                    std::mt19937_64& rng) {
    const std::size_t n = latent.size();
    const std::size_t d = direction.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    ElementSet set;
    set.modality = modality;
    set.gold_order = latent;
    set.elements.resize(n, Embedding(d));
    const double center = static_cast<double>(n - 1) / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = static_cast<double>(latent[i]) - center;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = order_signal * pos * direction[j] + noise * normal(rng);
            set.elements[i][j] = quantize(v);
        }
    }
    return set;
}

} // namespace

SynthConfig regime(Regime name) {
    SynthConfig cfg; // stories=200, sizes 5..5, d=32, signal 1.0, seed 1
    switch (name) {
        case Regime::CleanBoth:
            break;
        case Regime::StrongTextWeakImage:
            cfg.noise_text = 0.02;
            cfg.noise_image = 0.8;
            break;
        case Regime::WeakBoth:
            cfg.noise_text = 0.8;
            cfg.noise_image = 0.8;
            break;
        case Regime::NoisyAlignment:
            cfg.noise_text = 0.3;
            cfg.noise_image = 0.3;
            cfg.align_noise = 1.2;
            break;
    }
    return cfg;
}

SynthConfig regime_by_name(const std::string& name) {
    if (name == "clean-both") return regime(Regime::CleanBoth);
    if (name == "strong-text-weak-image") return regime(Regime::StrongTextWeakImage);
    if (name == "weak-both") return regime(Regime::WeakBoth);
    if (name == "noisy-alignment") return regime(Regime::NoisyAlignment);
    throw DataError("unknown regime: " + name);
}

std::vector<StoryPair> generate_corpus(const SynthConfig& cfg) {
    if (cfg.set_size_min < 2 || cfg.set_size_max < cfg.set_size_min)
        throw std::invalid_argument("generate_corpus: invalid set size range");
    if (cfg.order_signal < 0.0 || cfg.noise_text < 0.0 || cfg.noise_image < 0.0 ||
        cfg.align_noise < 0.0)
        throw std::invalid_argument("generate_corpus: negative noise or signal");

    std::mt19937_64 master(cfg.seed);
    const Embedding u_text = unit_direction(master, cfg.dim);
    const Embedding u_image = unit_direction(master, cfg.dim);

    std::vector<StoryPair> corpus;
    corpus.reserve(cfg.stories);
    for (std::size_t s = 0; s < cfg.stories; ++s) {
        std::mt19937_64 rng(splitmix64(cfg.seed ^ (0xabcdef12ull + s)));
        std::uniform_int_distribution<std::size_t> size_dist(cfg.set_size_min,
                                                            cfg.set_size_max);
        const std::size_t n = size_dist(rng);

        // latent[i] = latent position of element i after shuffling
        std::vector<int> latent_text(n), latent_image(n);
        std::iota(latent_text.begin(), latent_text.end(), 0);
        std::iota(latent_image.begin(), latent_image.end(), 0);
        std::shuffle(latent_text.begin(), latent_text.end(), rng);
        std::shuffle(latent_image.begin(), latent_image.end(), rng);

        StoryPair story;
        story.id = "synth-" + std::to_string(s);
        story.text = make_set(Modality::Text, latent_text, u_text, cfg.order_signal,
                              cfg.noise_text, rng);
        story.image = make_set(Modality::Image, latent_image, u_image, cfg.order_signal,
                               cfg.noise_image, rng);

        std::uniform_real_distribution<double> unif(0.0, 1.0);
        CrossModalSimilarity sim(n, n);
        for (std::size_t m = 0; m < n; ++m)
            for (std::size_t k = 0; k < n; ++k) {
                const double base = latent_text[m] == latent_image[k] ? 1.0 : 0.0;
                sim(m, k) = base + cfg.align_noise * unif(rng);
            }
        for (std::size_t m = 0; m < n; ++m) {
            double lo = sim(m, 0), hi = sim(m, 0);
            for (std::size_t k = 1; k < n; ++k) {
                lo = std::min(lo, sim(m, k));
                hi = std::max(hi, sim(m, k));
            }
            for (std::size_t k = 0; k < n; ++k)
                sim(m, k) = hi > lo ? quantize((sim(m, k) - lo) / (hi - lo)) : 0.0;
        }
        story.cross_sim = std::move(sim);
        corpus.push_back(std::move(story));
    }
    return corpus;
}

} // namespace wego
