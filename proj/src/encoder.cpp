#include "wego/encoder.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace wego {

namespace {

constexpr double kLnEps = 1e-6;

Matrix rows_to_matrix(const std::vector<Embedding>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(i, j) = rows[i][j];
    return m;
}

std::vector<Embedding> matrix_to_rows(const Matrix& m) {
    std::vector<Embedding> rows(m.rows(), Embedding(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            rows[i][j] = m(i, j);
    return rows;
}

// Row-wise layer norm, no affine. Fills inv_std per row.
Matrix layer_norm(const Matrix& x, std::vector<double>& inv_std) {
    Matrix y(x.rows(), x.cols());
    inv_std.assign(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) mean += x(i, j);
        mean /= static_cast<double>(x.cols());
        double var = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double c = x(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(x.cols());
        const double is = 1.0 / std::sqrt(var + kLnEps);
        inv_std[i] = is;
        for (std::size_t j = 0; j < x.cols(); ++j)
            y(i, j) = (x(i, j) - mean) * is;
    }
    return y;
}

// dX for y = (x - mean)/sqrt(var + eps):
// dx = is * (dy - mean(dy) - y * mean(dy * y))
Matrix layer_norm_backward(const Matrix& dy, const Matrix& y,
                           const std::vector<double>& inv_std) {
    Matrix dx(dy.rows(), dy.cols());
    const double inv_d = 1.0 / static_cast<double>(dy.cols());
    for (std::size_t i = 0; i < dy.rows(); ++i) {
        double mean_dy = 0.0, mean_dyy = 0.0;
        for (std::size_t j = 0; j < dy.cols(); ++j) {
            mean_dy += dy(i, j);
            mean_dyy += dy(i, j) * y(i, j);
        }
        mean_dy *= inv_d;
        mean_dyy *= inv_d;
        for (std::size_t j = 0; j < dy.cols(); ++j)
            dx(i, j) = inv_std[i] * (dy(i, j) - mean_dy - y(i, j) * mean_dyy);
    }
    return dx;
}

Matrix linear(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix y = matmul(x, w);
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j)
            y(i, j) += b[j];
    return y;
}

struct BlockCache {
    Matrix x_in;                 // block input
    Matrix xn;                   // LN(x_in)
    std::vector<double> xn_inv_std;
    Matrix q, k, v;
    std::vector<Matrix> attn;    // per-head softmax weights, n x n
    Matrix concat;               // concatenated head outputs
    Matrix x1;                   // after attention residual
    Matrix x1n;                  // LN(x1)
    std::vector<double> x1n_inv_std;
    Matrix pre_act;              // x1n * w1 + b1
    Matrix act;                  // relu(pre_act)
};

Matrix block_forward(const Matrix& x, const EncoderBlock& blk, std::size_t heads,
                     BlockCache* cache) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t dk = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    std::vector<double> xn_is;
    Matrix xn = layer_norm(x, xn_is);
    Matrix q = linear(xn, blk.wq, blk.bq);
    Matrix k = linear(xn, blk.wk, blk.bk);
    Matrix v = linear(xn, blk.wv, blk.bv);

    Matrix concat(n, d);
    std::vector<Matrix> attn(heads);
    for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::size_t off = hd * dk;
        Matrix p(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            double row_max = -1e300;
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < dk; ++c)
                    s += q(i, off + c) * k(j, off + c);
                s *= scale;
                p(i, j) = s;
                row_max = std::max(row_max, s);
            }
            double denom = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                p(i, j) = std::exp(p(i, j) - row_max);
                denom += p(i, j);
            }
            for (std::size_t j = 0; j < n; ++j) p(i, j) /= denom;
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < dk; ++c) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    s += p(i, j) * v(j, off + c);
                concat(i, off + c) = s;
            }
        attn[hd] = std::move(p);
    }

    Matrix x1 = linear(concat, blk.wo, blk.bo);
    add_inplace(x1, x);

    std::vector<double> x1n_is;
    Matrix x1n = layer_norm(x1, x1n_is);
    Matrix pre = linear(x1n, blk.w1, blk.b1);
    Matrix act = pre;
    for (double& a : act.data()) a = a > 0.0 ? a : 0.0;
    Matrix y = linear(act, blk.w2, blk.b2);
    add_inplace(y, x1);

    if (cache) {
        cache->x_in = x;
        cache->xn = std::move(xn);
        cache->xn_inv_std = std::move(xn_is);
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->attn = std::move(attn);
        cache->concat = std::move(concat);
        cache->x1 = std::move(x1);
        cache->x1n = std::move(x1n);
        cache->x1n_inv_std = std::move(x1n_is);
        cache->pre_act = std::move(pre);
        cache->act = std::move(act);
    }
    return y;
}

// Returns dX; accumulates parameter gradients into grad.
Matrix block_backward(const Matrix& dy, const BlockCache& c, const EncoderBlock& blk,
                      std::size_t heads, EncoderBlock& grad) {
    const std::size_t n = dy.rows();
    const std::size_t d = dy.cols();
    const std::size_t dk = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    // Feed-forward sublayer.
    Matrix dx1 = dy;
    add_inplace(grad.w2, matmul_at(c.act, dy));
    {
        auto cs = column_sums(dy);
        for (std::size_t j = 0; j < d; ++j) grad.b2[j] += cs[j];
    }
    Matrix dact = matmul_bt(dy, blk.w2);
    for (std::size_t i = 0; i < dact.data().size(); ++i)
        if (c.pre_act.data()[i] <= 0.0) dact.data()[i] = 0.0;
    add_inplace(grad.w1, matmul_at(c.x1n, dact));
    {
        auto cs = column_sums(dact);
        for (std::size_t j = 0; j < blk.b1.size(); ++j) grad.b1[j] += cs[j];
    }
    Matrix dx1n = matmul_bt(dact, blk.w1);
    add_inplace(dx1, layer_norm_backward(dx1n, c.x1n, c.x1n_inv_std));

    // Attention sublayer.
    Matrix dx = dx1; // residual branch
    add_inplace(grad.wo, matmul_at(c.concat, dx1));
    {
        auto cs = column_sums(dx1);
        for (std::size_t j = 0; j < d; ++j) grad.bo[j] += cs[j];
    }
    Matrix dconcat = matmul_bt(dx1, blk.wo);

    Matrix dq(n, d), dkm(n, d), dv(n, d);
    for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::size_t off = hd * dk;
        const Matrix& p = c.attn[hd];
        // dP = dOh * Vh^T ; dVh = P^T * dOh
        Matrix dp(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t cc = 0; cc < dk; ++cc)
                    s += dconcat(i, off + cc) * c.v(j, off + cc);
                dp(i, j) = s;
            }
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t cc = 0; cc < dk; ++cc) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    s += p(i, j) * dconcat(i, off + cc);
                dv(j, off + cc) += s;
            }
        // Softmax backward per row: dS = P .* (dP - rowdot(dP, P))
        Matrix ds(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += dp(i, j) * p(i, j);
            for (std::size_t j = 0; j < n; ++j)
                ds(i, j) = p(i, j) * (dp(i, j) - dot);
        }
        // S = scale * Qh Kh^T
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t cc = 0; cc < dk; ++cc) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    s += ds(i, j) * c.k(j, off + cc);
                dq(i, off + cc) += scale * s;
            }
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t cc = 0; cc < dk; ++cc) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    s += ds(i, j) * c.q(i, off + cc);
                dkm(j, off + cc) += scale * s;
            }
    }

    add_inplace(grad.wq, matmul_at(c.xn, dq));
    add_inplace(grad.wk, matmul_at(c.xn, dkm));
    add_inplace(grad.wv, matmul_at(c.xn, dv));
    {
        auto cq = column_sums(dq);
        auto ck = column_sums(dkm);
        auto cv = column_sums(dv);
        for (std::size_t j = 0; j < d; ++j) {
            grad.bq[j] += cq[j];
            grad.bk[j] += ck[j];
            grad.bv[j] += cv[j];
        }
    }
    Matrix dxn = matmul_bt(dq, blk.wq);
    add_inplace(dxn, matmul_bt(dkm, blk.wk));
    add_inplace(dxn, matmul_bt(dv, blk.wv));
    add_inplace(dx, layer_norm_backward(dxn, c.xn, c.xn_inv_std));
    return dx;
}

void check_inputs(const std::vector<Embedding>& inputs, const EncoderParams& params) {
    if (inputs.empty())
        throw std::invalid_argument("encode_set: empty input set");
    for (const auto& e : inputs)
        if (e.size() != params.d)
            throw std::invalid_argument("encode_set: embedding width mismatch");
}

EncoderBlock zero_block(std::size_t d, std::size_t ff) {
    EncoderBlock b;
    b.wq = Matrix(d, d);
    b.wk = Matrix(d, d);
    b.wv = Matrix(d, d);
    b.wo = Matrix(d, d);
    b.bq.assign(d, 0.0);
    b.bk.assign(d, 0.0);
    b.bv.assign(d, 0.0);
    b.bo.assign(d, 0.0);
    b.w1 = Matrix(d, ff);
    b.b1.assign(ff, 0.0);
    b.w2 = Matrix(ff, d);
    b.b2.assign(d, 0.0);
    return b;
}

void flatten_matrix(const Matrix& m, std::vector<double>& out) {
    out.insert(out.end(), m.data().begin(), m.data().end());
}

std::size_t read_matrix(Matrix& m, const std::vector<double>& flat, std::size_t off) {
    for (double& v : m.data()) v = flat[off++];
    return off;
}

std::size_t read_vector(std::vector<double>& v, const std::vector<double>& flat,
                        std::size_t off) {
    for (double& x : v) x = flat[off++];
    return off;
}

} // namespace

std::size_t EncoderParams::param_count() const {
    const std::size_t per_block = 4 * d * d + 4 * d + d * ff + ff + ff * d + d;
    return blocks.size() * per_block;
}

EncoderParams EncoderParams::zeros_like() const {
    EncoderParams g;
    g.d = d;
    g.h = h;
    g.ff = ff;
    g.blocks.assign(blocks.size(), zero_block(d, ff));
    return g;
}

void EncoderParams::flatten_into(std::vector<double>& out) const {
    for (const auto& b : blocks) {
        flatten_matrix(b.wq, out);
        flatten_matrix(b.wk, out);
        flatten_matrix(b.wv, out);
        flatten_matrix(b.wo, out);
        out.insert(out.end(), b.bq.begin(), b.bq.end());
        out.insert(out.end(), b.bk.begin(), b.bk.end());
        out.insert(out.end(), b.bv.begin(), b.bv.end());
        out.insert(out.end(), b.bo.begin(), b.bo.end());
        flatten_matrix(b.w1, out);
        out.insert(out.end(), b.b1.begin(), b.b1.end());
        flatten_matrix(b.w2, out);
        out.insert(out.end(), b.b2.begin(), b.b2.end());
    }
}

std::size_t EncoderParams::unflatten_from(const std::vector<double>& flat,
                                          std::size_t offset) {
    for (auto& b : blocks) {
        offset = read_matrix(b.wq, flat, offset);
        offset = read_matrix(b.wk, flat, offset);
        offset = read_matrix(b.wv, flat, offset);
        offset = read_matrix(b.wo, flat, offset);
        offset = read_vector(b.bq, flat, offset);
        offset = read_vector(b.bk, flat, offset);
        offset = read_vector(b.bv, flat, offset);
        offset = read_vector(b.bo, flat, offset);
        offset = read_matrix(b.w1, flat, offset);
        offset = read_vector(b.b1, flat, offset);
        offset = read_matrix(b.w2, flat, offset);
        offset = read_vector(b.b2, flat, offset);
    }
    return offset;
}

EncoderParams init_encoder(std::size_t d, std::size_t h, std::uint64_t seed,
                           std::size_t num_blocks) {
    if (h == 0 || d % h != 0)
        throw std::invalid_argument("width not divisible by heads");
    EncoderParams p;
    p.d = d;
    p.h = h;
    p.ff = 2 * d;
    std::mt19937_64 rng(seed);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    std::uniform_real_distribution<double> dist(-s, s);
    for (std::size_t b = 0; b < num_blocks; ++b) {
        EncoderBlock blk = zero_block(d, p.ff);
        for (Matrix* w : {&blk.wq, &blk.wk, &blk.wv, &blk.wo, &blk.w1, &blk.w2})
            for (double& v : w->data()) v = dist(rng);
        p.blocks.push_back(std::move(blk));
    }
    return p;
}

std::vector<Embedding> encode_set(const std::vector<Embedding>& inputs,
                                  const EncoderParams& params) {
    check_inputs(inputs, params);
    Matrix x = rows_to_matrix(inputs);
    for (const auto& blk : params.blocks)
        x = block_forward(x, blk, params.h, nullptr);
    return matrix_to_rows(x);
}

std::vector<std::vector<Matrix>> attention_maps(const std::vector<Embedding>& inputs,
                                                const EncoderParams& params) {
    check_inputs(inputs, params);
    std::vector<std::vector<Matrix>> maps;
    Matrix x = rows_to_matrix(inputs);
    for (const auto& blk : params.blocks) {
        BlockCache cache;
        x = block_forward(x, blk, params.h, &cache);
        maps.push_back(std::move(cache.attn));
    }
    return maps;
}

EncoderGradients encode_set_backward(const std::vector<Embedding>& inputs,
                                     const EncoderParams& params,
                                     const std::vector<Embedding>& upstream) {
    check_inputs(inputs, params);
    if (upstream.size() != inputs.size())
        throw std::invalid_argument("encode_set_backward: upstream size mismatch");
    for (const auto& g : upstream)
        if (g.size() != params.d)
            throw std::invalid_argument("encode_set_backward: upstream width mismatch");

    std::vector<BlockCache> caches(params.blocks.size());
    Matrix x = rows_to_matrix(inputs);
    for (std::size_t b = 0; b < params.blocks.size(); ++b)
        x = block_forward(x, params.blocks[b], params.h, &caches[b]);

    EncoderGradients out;
    out.params = params.zeros_like();
    Matrix dx = rows_to_matrix(upstream);
    for (std::size_t b = params.blocks.size(); b-- > 0;)
        dx = block_backward(dx, caches[b], params.blocks[b], params.h,
                            out.params.blocks[b]);
    out.inputs = matrix_to_rows(dx);
    return out;
}

} // namespace wego
