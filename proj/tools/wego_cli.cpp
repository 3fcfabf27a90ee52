#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wego/dataset.hpp"
#include "wego/errors.hpp"
#include "wego/inference.hpp"
#include "wego/synthetic.hpp"
#include "wego/trainer.hpp"

namespace {

bool log_enabled() {
    const char* v = std::getenv("WEGO_LOG");
    return v != nullptr && std::string(v) != "" && std::string(v) != "off";
}

void log_line(const std::string& msg) {
    if (log_enabled()) std::cerr << "[wego] " << msg << '\n';
}

bool parse_on_off(const std::string& v, const std::string& flag) {
    if (v == "on") return true;
    if (v == "off") return false;
    throw CLI::ValidationError(flag + " must be 'on' or 'off'");
}

std::size_t corpus_width(const std::vector<wego::StoryPair>& corpus) {
    for (const auto& s : corpus)
        if (!s.text.elements.empty()) return s.text.elements.front().size();
    throw wego::DataError("corpus has no stories");
}

void check_width(const wego::Checkpoint& ckpt, const std::vector<wego::StoryPair>& corpus) {
    const std::size_t w = corpus_width(corpus);
    if (w != ckpt.cfg.d)
        throw wego::DataError("width mismatch: checkpoint d=" + std::to_string(ckpt.cfg.d) +
                              ", data d=" + std::to_string(w));
}

struct SynthFlags {
    std::string regime_name;
    std::string output;
    wego::SynthConfig cfg;
};

void run_synth(CLI::App* cmd, SynthFlags& f) {
    wego::SynthConfig cfg = f.cfg;
    if (!f.regime_name.empty()) {
        cfg = wego::regime_by_name(f.regime_name);
        // Explicit flags override the regime preset.
        if (cmd->count("--stories")) cfg.stories = f.cfg.stories;
        if (cmd->count("--set_size_min")) cfg.set_size_min = f.cfg.set_size_min;
        if (cmd->count("--set_size_max")) cfg.set_size_max = f.cfg.set_size_max;
        if (cmd->count("--dim")) cfg.dim = f.cfg.dim;
        if (cmd->count("--order_signal")) cfg.order_signal = f.cfg.order_signal;
        if (cmd->count("--noise_text")) cfg.noise_text = f.cfg.noise_text;
        if (cmd->count("--noise_image")) cfg.noise_image = f.cfg.noise_image;
        if (cmd->count("--align_noise")) cfg.align_noise = f.cfg.align_noise;
        if (cmd->count("--seed")) cfg.seed = f.cfg.seed;
    }
    auto corpus = wego::generate_corpus(cfg);
    wego::write_corpus(corpus, f.output);
    log_line("wrote " + std::to_string(corpus.size()) + " stories to " + f.output);
}

struct TrainFlags {
    std::string data;
    std::string output;
    std::string log_path;
    std::string ib = "on";
    std::string guidance = "on";
    std::string alternation = "per-batch";
    wego::TrainConfig cfg;
};

void run_train(const TrainFlags& f) {
    wego::TrainConfig cfg = f.cfg;
    cfg.ib_in_training = parse_on_off(f.ib, "--ib-training");
    cfg.guidance.mode = parse_on_off(f.guidance, "--guidance")
                            ? wego::GuidanceMode::RelativeOrder
                            : wego::GuidanceMode::Off;
    if (f.alternation == "per-batch")
        cfg.alternation = wego::Alternation::PerBatch;
    else if (f.alternation == "per-epoch")
        cfg.alternation = wego::Alternation::PerEpoch;
    else
        throw CLI::ValidationError("--alternation must be 'per-batch' or 'per-epoch'");

    auto corpus = wego::read_corpus(f.data);
    if (corpus.empty())
        throw wego::DataError("empty dataset: " + f.data);
    for (const auto& story : corpus) {
        const auto violations = wego::validate_story(story);
        if (!violations.empty())
            throw wego::DataError("story '" + story.id + "': " + violations.front());
    }
    cfg.d = corpus_width(corpus);

    auto text_model = wego::init_model(cfg.d, cfg.heads, cfg.seed, cfg.blocks);
    auto image_model = wego::init_model(cfg.d, cfg.heads, cfg.seed + 1, cfg.blocks);
    auto text_opt = wego::AdamState::for_size(text_model.param_count());
    auto image_opt = wego::AdamState::for_size(image_model.param_count());

    std::ofstream log_file;
    if (!f.log_path.empty()) {
        log_file.open(f.log_path);
        if (!log_file)
            throw wego::DataError("cannot open log file: " + f.log_path);
    }
    for (int e = 1; e <= cfg.epochs; ++e) {
        auto stats = wego::train_epoch(corpus, text_model, image_model, cfg, text_opt, image_opt);
        char line[128];
        std::snprintf(line, sizeof line, "epoch=%d text_loss=%.6f image_loss=%.6f", e,
                      stats.text_loss, stats.image_loss);
        std::cout << line << '\n';
        if (log_file) log_file << line << '\n';
    }

    wego::save_checkpoint({cfg, text_model, image_model, text_opt, image_opt}, f.output);
    log_line("checkpoint saved to " + f.output);
}

struct EvalFlags {
    std::string ckpt;
    std::string data;
    std::string output;
    std::string guidance = "on";
    int steps = 10;
    double theta_text = -1.0;
    double theta_image = -1.0;
};

wego::InferConfig infer_config_from(const wego::Checkpoint& ckpt, int steps,
                                    const std::string& guidance, double theta_text,
                                    double theta_image) {
    wego::InferConfig cfg;
    cfg.steps = steps;
    cfg.guidance = ckpt.cfg.guidance;
    cfg.guidance.renormalize = true; // bounded accumulation across boost steps
    cfg.guidance.mode = parse_on_off(guidance, "--guidance")
                            ? wego::GuidanceMode::RelativeOrder
                            : wego::GuidanceMode::Off;
    if (theta_text >= 0.0) cfg.guidance.theta_text_source = theta_text;
    if (theta_image >= 0.0) cfg.guidance.theta_image_source = theta_image;
    return cfg;
}

void run_eval(const EvalFlags& f) {
    auto ckpt = wego::load_checkpoint(f.ckpt);
    auto corpus = wego::read_corpus(f.data);
    check_width(ckpt, corpus);
    auto cfg = infer_config_from(ckpt, f.steps, f.guidance, f.theta_text, f.theta_image);
    auto reports = wego::evaluate_corpus(corpus, ckpt.text_model, ckpt.image_model, cfg);
    for (std::size_t s = 0; s < reports.size(); ++s) {
        for (const char* modality : {"text", "image"}) {
            const auto& r = std::string(modality) == "text" ? reports[s].text : reports[s].image;
            char line[160];
            std::snprintf(line, sizeof line, "step=%zu modality=%s acc=%.4f pmr=%.4f tau=%.4f",
                          s, modality, r.acc, r.pmr, r.tau);
            std::cout << line << '\n';
        }
    }
    if (!f.output.empty()) wego::write_report(reports, f.output);
}

struct OrderFlags {
    std::string ckpt;
    std::string data;
    std::string trace_path;
    std::string guidance = "on";
    int steps = 10;
    double theta_text = -1.0;
    double theta_image = -1.0;
};

void run_order(const OrderFlags& f) {
    auto ckpt = wego::load_checkpoint(f.ckpt);
    auto corpus = wego::read_corpus(f.data);
    check_width(ckpt, corpus);
    auto cfg = infer_config_from(ckpt, f.steps, f.guidance, f.theta_text, f.theta_image);
    cfg.early_stop = false; // keep trace length == steps + 1

    std::string traces = "[";
    bool first = true;
    for (const auto& story : corpus) {
        auto res = wego::iterative_infer(story, ckpt.text_model, ckpt.image_model, cfg);
        std::cout << "id=" << story.id << " text:";
        for (int v : res.text_perm.order) std::cout << ' ' << v;
        std::cout << "\nid=" << story.id << " image:";
        for (int v : res.image_perm.order) std::cout << ' ' << v;
        std::cout << '\n';
        if (!f.trace_path.empty()) {
            if (!first) traces += ",\n";
            traces += wego::trace_to_json(story.id, res);
            first = false;
        }
    }
    traces += "]";
    if (!f.trace_path.empty()) {
        std::ofstream os(f.trace_path);
        if (!os)
            throw wego::DataError("cannot open trace file: " + f.trace_path);
        os << traces << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weak cross-modal guided ordering pipeline"};
    app.require_subcommand(1);
    app.set_config("--config");

    SynthFlags sf;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic paired-story corpus");
    synth->add_option("--regime", sf.regime_name,
                      "clean-both | strong-text-weak-image | weak-both | noisy-alignment");
    synth->add_option("--stories", sf.cfg.stories, "Number of stories");
    synth->add_option("--set_size_min,--min-size", sf.cfg.set_size_min, "Minimum set size");
    synth->add_option("--set_size_max,--max-size", sf.cfg.set_size_max, "Maximum set size");
    synth->add_option("--dim", sf.cfg.dim, "Embedding width");
    synth->add_option("--order_signal", sf.cfg.order_signal, "Position signal strength");
    synth->add_option("--noise_text", sf.cfg.noise_text, "Text feature noise");
    synth->add_option("--noise_image", sf.cfg.noise_image, "Image feature noise");
    synth->add_option("--align_noise", sf.cfg.align_noise, "Similarity perturbation");
    synth->add_option("--seed", sf.cfg.seed, "RNG seed");
    synth->add_option("-o,--output", sf.output, "Output dataset path")->required();

    TrainFlags tf;
    auto* train = app.add_subcommand("train", "Train both modality models");
    train->add_option("--data", tf.data, "Dataset path")->required();
    train->add_option("--epochs", tf.cfg.epochs, "Training epochs");
    train->add_option("--learning_rate,--lr", tf.cfg.learning_rate, "Adam learning rate");
    train->add_option("--batch_size", tf.cfg.batch_size, "Batch size");
    train->add_option("--seed", tf.cfg.seed, "Init seed");
    train->add_option("--heads", tf.cfg.heads, "Attention heads");
    train->add_option("--blocks", tf.cfg.blocks, "Encoder blocks");
    train->add_option("--ib-training,--ib_in_training", tf.ib, "on | off");
    train->add_option("--guidance", tf.guidance, "on | off");
    train->add_option("--theta_text_source", tf.cfg.guidance.theta_text_source,
                      "Threshold when text guides image");
    train->add_option("--theta_image_source", tf.cfg.guidance.theta_image_source,
                      "Threshold when image guides text");
    train->add_option("--alternation", tf.alternation, "per-batch | per-epoch");
    train->add_option("--log", tf.log_path, "Per-epoch log file");
    train->add_option("-o,--output", tf.output, "Checkpoint path")->required();

    EvalFlags ef;
    auto* eval = app.add_subcommand("eval", "Evaluate per boost step");
    eval->add_option("--ckpt", ef.ckpt, "Checkpoint path")->required();
    eval->add_option("--data", ef.data, "Dataset path")->required();
    eval->add_option("--steps", ef.steps, "Boost steps");
    eval->add_option("--guidance", ef.guidance, "on | off");
    eval->add_option("--theta_text_source", ef.theta_text, "Override threshold");
    eval->add_option("--theta_image_source", ef.theta_image, "Override threshold");
    eval->add_option("-o,--output", ef.output, "Report JSON path");

    OrderFlags of;
    auto* order = app.add_subcommand("order", "Predict orders for stories");
    order->add_option("--ckpt", of.ckpt, "Checkpoint path")->required();
    order->add_option("--data", of.data, "Dataset path")->required();
    order->add_option("--steps", of.steps, "Boost steps");
    order->add_option("--guidance", of.guidance, "on | off");
    order->add_option("--theta_text_source", of.theta_text, "Override threshold");
    order->add_option("--theta_image_source", of.theta_image, "Override threshold");
    order->add_option("--trace", of.trace_path, "Per-step trace JSON path");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) run_synth(synth, sf);
        if (train->parsed()) run_train(tf);
        if (eval->parsed()) run_eval(ef);
        if (order->parsed()) run_order(of);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    } catch (const wego::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const wego::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
