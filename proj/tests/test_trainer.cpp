#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "wego/errors.hpp"
#include "wego/synthetic.hpp"
#include "wego/trainer.hpp"

using namespace wego;

namespace {

std::vector<StoryPair> tiny_corpus(std::uint64_t seed, double noise = 0.2) {
    SynthConfig cfg;
    cfg.stories = 8;
    cfg.set_size_min = 4;
    cfg.set_size_max = 4;
    cfg.dim = 8;
    cfg.noise_text = noise;
    cfg.noise_image = noise;
    cfg.seed = seed;
    return generate_corpus(cfg);
}

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.batch_size = 4;
    cfg.learning_rate = 1e-3;
    return cfg;
}

} // namespace

TEST_CASE("adam_step hand examples") {
    AdamState st = AdamState::for_size(1);
    std::vector<double> params = {0.0};

    SUBCASE("zero gradient leaves parameters, advances step") {
        CHECK(adam_step(params, {0.0}, st, 0.001));
        CHECK(params[0] == 0.0);
        CHECK(st.step == 1);
    }
    SUBCASE("first step moves by about lr") {
        CHECK(adam_step(params, {1.0}, st, 0.001));
        // bias-corrected first step: -lr * g / (|g| + eps)
        CHECK(params[0] == doctest::Approx(-0.001).epsilon(1e-6));
    }
    SUBCASE("NaN gradient skips the update") {
        CHECK_FALSE(adam_step(params, {std::nan("")}, st, 0.001));
        CHECK(params[0] == 0.0);
    }
    SUBCASE("shape mismatch throws") {
        std::vector<double> grads = {1.0, 2.0};
        CHECK_THROWS(adam_step(params, grads, st, 0.001));
    }
}

TEST_CASE("story gradient matches finite differences end to end") {
    auto corpus = tiny_corpus(7);
    auto cfg = tiny_config();
    auto text_model = init_model(8, 2, 1);
    auto image_model = init_model(8, 2, 2);

    std::mt19937_64 rng(3);
    for (bool guided : {false, true}) {
        cfg.ib_in_training = guided;
        auto base = story_gradient(corpus[0], Modality::Image, image_model, text_model, cfg);
        auto flat = image_model.flatten();
        const auto gflat = base.grad.flatten();
        const double h = 1e-5;
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t idx = rng() % flat.size();
            auto probe = image_model;
            auto pf = flat;
            pf[idx] += h;
            probe.unflatten(pf);
            const double lp =
                story_gradient(corpus[0], Modality::Image, probe, text_model, cfg).loss;
            pf[idx] -= 2 * h;
            probe.unflatten(pf);
            const double lm =
                story_gradient(corpus[0], Modality::Image, probe, text_model, cfg).loss;
            const double fd = (lp - lm) / (2 * h);
            CHECK(std::abs(gflat[idx] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("training is deterministic") {
    auto corpus = tiny_corpus(11);
    auto cfg = tiny_config();
    EpochStats first_a, first_b;
    for (EpochStats* out : {&first_a, &first_b}) {
        auto text_model = init_model(8, 2, 5);
        auto image_model = init_model(8, 2, 6);
        auto topt = AdamState::for_size(text_model.param_count());
        auto iopt = AdamState::for_size(image_model.param_count());
        EpochStats stats;
        for (int e = 0; e < 3; ++e)
            stats = train_epoch(corpus, text_model, image_model, cfg, topt, iopt);
        *out = stats;
    }
    CHECK(first_a.text_loss == first_b.text_loss);
    CHECK(first_a.image_loss == first_b.image_loss);
}

TEST_CASE("a step never touches the frozen counterpart") {
    auto corpus = tiny_corpus(13);
    auto cfg = tiny_config();
    auto text_model = init_model(8, 2, 5);
    auto image_model = init_model(8, 2, 6);
    const auto text_before = text_model.flatten();
    auto topt = AdamState::for_size(text_model.param_count());
    auto iopt = AdamState::for_size(image_model.param_count());

    // Image-only pass via PerEpoch alternation keeps passes separable; run a
    // full epoch and verify losses stay finite instead.
    auto stats = train_epoch(corpus, text_model, image_model, cfg, topt, iopt);
    CHECK(std::isfinite(stats.text_loss));
    CHECK(std::isfinite(stats.image_loss));
    CHECK(text_model.flatten() != text_before); // text pass did run

    // story_gradient itself must not mutate either model.
    const auto ib = image_model.flatten();
    const auto tb = text_model.flatten();
    (void)story_gradient(corpus[0], Modality::Image, image_model, text_model, cfg);
    CHECK(image_model.flatten() == ib);
    CHECK(text_model.flatten() == tb);
}

TEST_CASE("with guidance off the text model ignores image data") {
    auto corpus_a = tiny_corpus(17);
    auto corpus_b = corpus_a;
    // Distort the image side only.
    for (auto& story : corpus_b)
        for (auto& e : story.image.elements)
            for (double& v : e) v = -v * 2.0;

    auto cfg = tiny_config();
    cfg.guidance.mode = GuidanceMode::Off;

    std::vector<double> text_a, text_b;
    for (const auto* corpus : {&corpus_a, &corpus_b}) {
        auto text_model = init_model(8, 2, 5);
        auto image_model = init_model(8, 2, 6);
        auto topt = AdamState::for_size(text_model.param_count());
        auto iopt = AdamState::for_size(image_model.param_count());
        for (int e = 0; e < 2; ++e)
            train_epoch(*corpus, text_model, image_model, cfg, topt, iopt);
        auto flat = text_model.flatten();
        (corpus == &corpus_a ? text_a : text_b) = flat;
    }
    CHECK(text_a == text_b);
}

TEST_CASE("loss decreases on an easy corpus") {
    SynthConfig scfg;
    scfg.stories = 16;
    scfg.set_size_min = 4;
    scfg.set_size_max = 4;
    scfg.dim = 8;
    scfg.seed = 5;
    auto corpus = generate_corpus(scfg);
    auto cfg = tiny_config();
    cfg.learning_rate = 5e-3;
    auto text_model = init_model(8, 2, 5);
    auto image_model = init_model(8, 2, 6);
    auto topt = AdamState::for_size(text_model.param_count());
    auto iopt = AdamState::for_size(image_model.param_count());
    EpochStats first = train_epoch(corpus, text_model, image_model, cfg, topt, iopt);
    EpochStats last;
    for (int e = 0; e < 19; ++e)
        last = train_epoch(corpus, text_model, image_model, cfg, topt, iopt);
    CHECK(last.text_loss < 0.5 * first.text_loss);
    CHECK(last.image_loss < 0.5 * first.image_loss);
}

TEST_CASE("checkpoint round trip and format guards") {
    auto cfg = tiny_config();
    Checkpoint ckpt;
    ckpt.cfg = cfg;
    ckpt.text_model = init_model(8, 2, 21);
    ckpt.image_model = init_model(8, 2, 22);
    ckpt.text_opt = AdamState::for_size(ckpt.text_model.param_count());
    ckpt.image_opt = AdamState::for_size(ckpt.image_model.param_count());
    ckpt.text_opt.step = 7;
    ckpt.text_opt.m[3] = 0.5;

    const std::string path = "test_ckpt.bin";
    save_checkpoint(ckpt, path);
    auto loaded = load_checkpoint(path);
    CHECK(loaded.text_model.flatten() == ckpt.text_model.flatten());
    CHECK(loaded.image_model.flatten() == ckpt.image_model.flatten());
    CHECK(loaded.text_opt.m == ckpt.text_opt.m);
    CHECK(loaded.text_opt.step == 7);
    CHECK(loaded.cfg.learning_rate == cfg.learning_rate);

    // wrong magic
    {
        std::FILE* f = std::fopen(path.c_str(), "r+b");
        std::fputs("BOGUS!!!", f);
        std::fclose(f);
        CHECK_THROWS_AS(load_checkpoint(path), DataError);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_checkpoint("no_such_file.bin"), DataError);
}

TEST_CASE("empty corpus is rejected") {
    auto cfg = tiny_config();
    auto text_model = init_model(8, 2, 1);
    auto image_model = init_model(8, 2, 2);
    auto topt = AdamState::for_size(text_model.param_count());
    auto iopt = AdamState::for_size(image_model.param_count());
    CHECK_THROWS_AS(train_epoch({}, text_model, image_model, cfg, topt, iopt), DataError);
}
