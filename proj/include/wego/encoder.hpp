#pragma once

#include <cstdint>
#include <vector>

#include "wego/core_types.hpp"
#include "wego/matrix.hpp"

namespace wego {

// One pre-norm transformer block: x + Attn(LN(x)), then x + FFN(LN(x)).
// Layer norm carries no learnable affine.
struct EncoderBlock {
    Matrix wq, wk, wv, wo;               // d x d
    std::vector<double> bq, bk, bv, bo;  // d
    Matrix w1;                           // d x ff
    std::vector<double> b1;              // ff
    Matrix w2;                           // ff x d
    std::vector<double> b2;              // d
};

struct EncoderParams {
    std::size_t d = 32; // model width
    std::size_t h = 8;  // attention heads
    std::size_t ff = 64; // feed-forward hidden width
    std::vector<EncoderBlock> blocks;

    std::size_t param_count() const;
    // Zero-valued copy with identical shapes, used as a gradient holder.
    EncoderParams zeros_like() const;
    void flatten_into(std::vector<double>& out) const;
    // Reads param_count() values starting at offset, returns new offset.
    std::size_t unflatten_from(const std::vector<double>& flat, std::size_t offset);
};

// Deterministic init: projection weights uniform in (-1/sqrt(d), 1/sqrt(d)),
// biases zero. Throws std::invalid_argument if d % h != 0.
EncoderParams init_encoder(std::size_t d, std::size_t h, std::uint64_t seed,
                           std::size_t num_blocks = 1);

// Maps a set of embeddings to context-aware embeddings. Permutation
// equivariant: no positional information is used.
std::vector<Embedding> encode_set(const std::vector<Embedding>& inputs,
                                  const EncoderParams& params);

// Per-block, per-head attention weight matrices, for inspection.
std::vector<std::vector<Matrix>> attention_maps(const std::vector<Embedding>& inputs,
                                                const EncoderParams& params);

struct EncoderGradients {
    EncoderParams params;              // same shapes, gradient values
    std::vector<Embedding> inputs;     // gradient w.r.t. each input
};

// Analytic gradients of a scalar loss through the encoder given
// upstream d(loss)/d(output).
EncoderGradients encode_set_backward(const std::vector<Embedding>& inputs,
                                     const EncoderParams& params,
                                     const std::vector<Embedding>& upstream);

} // namespace wego
