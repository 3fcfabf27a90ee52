#include "wego/trainer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "wego/errors.hpp"

namespace wego {

std::vector<double> ModelParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    encoder.flatten_into(flat);
    flat.insert(flat.end(), classifier.weight.begin(), classifier.weight.end());
    flat.push_back(classifier.bias);
    return flat;
}

void ModelParams::unflatten(const std::vector<double>& flat) {
    std::size_t off = encoder.unflatten_from(flat, 0);
    for (double& w : classifier.weight) w = flat[off++];
    classifier.bias = flat[off++];
}

ModelParams init_model(std::size_t d, std::size_t h, std::uint64_t seed,
                       std::size_t num_blocks) {
    ModelParams m;
    m.encoder = init_encoder(d, h, seed, num_blocks);
    m.classifier = init_classifier(d, seed ^ 0x9e3779b97f4a7c15ull);
    return m;
}

bool adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, double lr) {
    if (params.size() != grads.size() || state.m.size() != params.size() ||
        state.v.size() != params.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) {
            ++state.step;
            return false;
        }
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    return true;
}

StoryGrad story_gradient(const StoryPair& story, Modality trained,
                         const ModelParams& trained_model,
                         const ModelParams& frozen_model, const TrainConfig& cfg) {
    const ElementSet& own = trained == Modality::Image ? story.image : story.text;
    const ElementSet& other = trained == Modality::Image ? story.text : story.image;

    auto encoded = encode_set(own.elements, trained_model.encoder);
    const std::size_t n = encoded.size();

    Matrix logits(n, n);
    OrderScoreMatrix scores(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            if (k == l) continue;
            logits(k, l) = pair_logit(encoded[k], encoded[l], trained_model.classifier);
            scores(k, l) = sigmoid(logits(k, l));
        }

    OrderScoreMatrix refined = scores;
    const bool guided = cfg.ib_in_training && cfg.guidance.mode != GuidanceMode::Off;
    if (guided) {
        if (!story.cross_sim)
            throw DataError("story '" + story.id + "': missing similarity matrix");
        auto frozen_enc = encode_set(other.elements, frozen_model.encoder);
        OrderScoreMatrix source = order_matrix(frozen_enc, frozen_model.classifier);
        GuidanceConfig gcfg = cfg.guidance;
        gcfg.renormalize = false; // single application in training, no accumulation
        if (trained == Modality::Image)
            refined = cgo_mu(scores, source, *story.cross_sim,
                             cfg.guidance.theta_text_source,
                             GuidanceDirection::TextToImage, gcfg);
        else
            refined = cgo_mu(scores, source, *story.cross_sim,
                             cfg.guidance.theta_image_source,
                             GuidanceDirection::ImageToText, gcfg);
    }

    auto [loss, dmatrix] = pairwise_loss(refined, own.gold_permutation());

    // Guidance additions are constants, so d(loss)/d(scores) == d(loss)/d(refined).
    StoryGrad out;
    out.loss = loss;
    out.grad = trained_model.zeros_like();

    const std::size_t d = trained_model.encoder.d;
    std::vector<Embedding> upstream(n, Embedding(d, 0.0));
    const auto& w = trained_model.classifier.weight;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            if (k == l) continue;
            const double s = scores(k, l);
            const double dlogit = dmatrix(k, l) * s * (1.0 - s);
            if (dlogit == 0.0) continue;
            for (std::size_t i = 0; i < d; ++i) {
                out.grad.classifier.weight[i] += dlogit * encoded[k][i];
                out.grad.classifier.weight[d + i] += dlogit * encoded[l][i];
                upstream[k][i] += dlogit * w[i];
                upstream[l][i] += dlogit * w[d + i];
            }
            out.grad.classifier.bias += dlogit;
        }

    auto enc_grads = encode_set_backward(own.elements, trained_model.encoder, upstream);
    out.grad.encoder = std::move(enc_grads.params);
    return out;
}

namespace {

// Mean gradient over a batch; deterministic left-to-right reduction.
std::pair<double, std::vector<double>> batch_gradient(
    const std::vector<StoryPair>& corpus, std::size_t begin, std::size_t end,
    Modality trained, const ModelParams& trained_model,
    const ModelParams& frozen_model, const TrainConfig& cfg) {
    double loss = 0.0;
    std::vector<double> grad(trained_model.param_count(), 0.0);
    for (std::size_t s = begin; s < end; ++s) {
        StoryGrad g = story_gradient(corpus[s], trained, trained_model, frozen_model, cfg);
        loss += g.loss;
        const auto flat = g.grad.flatten();
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += flat[i];
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    loss *= inv;
    for (double& g : grad) g *= inv;
    return {loss, grad};
}

void apply_update(ModelParams& model, const std::vector<double>& grad, AdamState& opt,
                  const TrainConfig& cfg, EpochStats& stats) {
    auto flat = model.flatten();
    if (!adam_step(flat, grad, opt, cfg.learning_rate)) {
        ++stats.skipped_steps;
        return;
    }
    model.unflatten(flat);
}

} // namespace

EpochStats train_epoch(const std::vector<StoryPair>& corpus, ModelParams& text_model,
                       ModelParams& image_model, const TrainConfig& cfg,
                       AdamState& text_opt, AdamState& image_opt) {
    if (corpus.empty())
        throw DataError("train_epoch: empty corpus");
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

    EpochStats stats;
    std::size_t batches = 0;

    auto run_pass = [&](Modality trained) {
        double loss_sum = 0.0;
        std::size_t count = 0;
        for (std::size_t begin = 0; begin < corpus.size(); begin += bs) {
            const std::size_t end = std::min(begin + bs, corpus.size());
            ModelParams& model = trained == Modality::Image ? image_model : text_model;
            ModelParams& frozen = trained == Modality::Image ? text_model : image_model;
            AdamState& opt = trained == Modality::Image ? image_opt : text_opt;
            auto [loss, grad] = batch_gradient(corpus, begin, end, trained, model, frozen, cfg);
            loss_sum += loss * static_cast<double>(end - begin);
            count += end - begin;
            apply_update(model, grad, opt, cfg, stats);
        }
        return loss_sum / static_cast<double>(count);
    };

    if (cfg.alternation == Alternation::PerEpoch) {
        stats.image_loss = run_pass(Modality::Image);
        stats.text_loss = run_pass(Modality::Text);
        return stats;
    }

    // PerBatch: image then text update on each batch in turn.
    double text_loss = 0.0, image_loss = 0.0;
    std::size_t count = 0;
    for (std::size_t begin = 0; begin < corpus.size(); begin += bs) {
        const std::size_t end = std::min(begin + bs, corpus.size());
        {
            auto [loss, grad] =
                batch_gradient(corpus, begin, end, Modality::Image, image_model, text_model, cfg);
            image_loss += loss * static_cast<double>(end - begin);
            apply_update(image_model, grad, image_opt, cfg, stats);
        }
        {
            auto [loss, grad] =
                batch_gradient(corpus, begin, end, Modality::Text, text_model, image_model, cfg);
            text_loss += loss * static_cast<double>(end - begin);
            apply_update(text_model, grad, text_opt, cfg, stats);
        }
        count += end - begin;
        ++batches;
    }
    stats.image_loss = image_loss / static_cast<double>(count);
    stats.text_loss = text_loss / static_cast<double>(count);
    return stats;
}

namespace {

constexpr char kMagic[8] = {'W', 'G', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_vec(std::ostream& os, const std::vector<double>& v) {
    write_u64(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

std::vector<double> read_vec(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw DataError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof kMagic);
    write_u64(os, ckpt.cfg.d);
    write_u64(os, ckpt.cfg.heads);
    write_u64(os, ckpt.cfg.blocks);
    write_f64(os, ckpt.cfg.learning_rate);
    write_u64(os, static_cast<std::uint64_t>(ckpt.cfg.batch_size));
    write_u64(os, static_cast<std::uint64_t>(ckpt.cfg.epochs));
    write_u64(os, ckpt.cfg.seed);
    write_f64(os, ckpt.cfg.guidance.theta_text_source);
    write_f64(os, ckpt.cfg.guidance.theta_image_source);
    write_u64(os, ckpt.cfg.guidance.renormalize ? 1 : 0);
    write_u64(os, ckpt.cfg.guidance.mode == GuidanceMode::RelativeOrder ? 1 : 0);
    write_u64(os, ckpt.cfg.ib_in_training ? 1 : 0);
    write_u64(os, ckpt.cfg.alternation == Alternation::PerBatch ? 0 : 1);
    write_vec(os, ckpt.text_model.flatten());
    write_vec(os, ckpt.image_model.flatten());
    for (const AdamState* st : {&ckpt.text_opt, &ckpt.image_opt}) {
        write_vec(os, st->m);
        write_vec(os, st->v);
        write_u64(os, static_cast<std::uint64_t>(st->step));
    }
    if (!os)
        throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw DataError("bad checkpoint magic: " + path);

    Checkpoint ckpt;
    ckpt.cfg.d = read_u64(is);
    ckpt.cfg.heads = read_u64(is);
    ckpt.cfg.blocks = read_u64(is);
    ckpt.cfg.learning_rate = read_f64(is);
    ckpt.cfg.batch_size = static_cast<int>(read_u64(is));
    ckpt.cfg.epochs = static_cast<int>(read_u64(is));
    ckpt.cfg.seed = read_u64(is);
    ckpt.cfg.guidance.theta_text_source = read_f64(is);
    ckpt.cfg.guidance.theta_image_source = read_f64(is);
    ckpt.cfg.guidance.renormalize = read_u64(is) != 0;
    ckpt.cfg.guidance.mode = read_u64(is) != 0 ? GuidanceMode::RelativeOrder : GuidanceMode::Off;
    ckpt.cfg.ib_in_training = read_u64(is) != 0;
    ckpt.cfg.alternation = read_u64(is) == 0 ? Alternation::PerBatch : Alternation::PerEpoch;

    ckpt.text_model = init_model(ckpt.cfg.d, ckpt.cfg.heads, 0, ckpt.cfg.blocks);
    ckpt.image_model = init_model(ckpt.cfg.d, ckpt.cfg.heads, 0, ckpt.cfg.blocks);
    const auto text_flat = read_vec(is);
    const auto image_flat = read_vec(is);
    if (text_flat.size() != ckpt.text_model.param_count() ||
        image_flat.size() != ckpt.image_model.param_count())
        throw DataError("checkpoint parameter count mismatch: " + path);
    ckpt.text_model.unflatten(text_flat);
    ckpt.image_model.unflatten(image_flat);
    for (AdamState* st : {&ckpt.text_opt, &ckpt.image_opt}) {
        st->m = read_vec(is);
        st->v = read_vec(is);
        st->step = static_cast<long>(read_u64(is));
        if (st->m.size() != text_flat.size() || st->v.size() != text_flat.size())
            throw DataError("checkpoint optimizer state mismatch: " + path);
    }
    if (!is)
        throw DataError("truncated checkpoint: " + path);
    return ckpt;
}

} // namespace wego
