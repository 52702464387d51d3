#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "revsent/embeddings.hpp"
#include "revsent/tensor.hpp"
#include "revsent/text.hpp"

namespace revsent {

// Attention weights and embedded inputs retained from a forward pass, for
// attribution and attention extraction.
struct EncoderTrace {
    std::vector<std::vector<real>> word_attention;  // per sentence, sums to 1
    std::vector<real> sentence_attention;           // sums to 1
    std::vector<std::vector<int>> token_ids;        // per sentence (CNN: one flat row)
    std::vector<Tensor> embedded;                   // matching [n_i, D] tensors
    bool has_attention = false;
};

// ---- LSTM ----------------------------------------------------------------

// Single-direction cell; gate layout along the 4H axis is [i, f, g, o].
struct LstmCell {
    int input_dim = 0;
    int hidden = 0;
    Tensor W;  // [input_dim + hidden, 4*hidden]
    Tensor b;  // [4*hidden]

    static LstmCell make(int input_dim, int hidden, Rng& rng) {
        LstmCell c;
        c.input_dim = input_dim;
        c.hidden = hidden;
        const real bound = real(1) / std::sqrt(real(hidden));
        c.W = Tensor::uniform({input_dim + hidden, 4 * hidden}, bound, rng, true);
        c.b = Tensor::zeros({4 * hidden}, true);
        for (int j = hidden; j < 2 * hidden; ++j) c.b.data()[std::size_t(j)] = real(1);  // forget bias
        return c;
    }

    // (x [1,input], h [1,H], c [1,H]) -> (h', c')
    std::pair<Tensor, Tensor> step(const Tensor& x, const Tensor& h, const Tensor& c) const {
        Tensor z = add(matmul(concat({x, h}, 1), W), b);
        Tensor i = sigmoid(slice(z, 1, 0, hidden));
        Tensor f = sigmoid(slice(z, 1, hidden, 2 * hidden));
        Tensor g = tanh_op(slice(z, 1, 2 * hidden, 3 * hidden));
        Tensor o = sigmoid(slice(z, 1, 3 * hidden, 4 * hidden));
        Tensor c2 = add(mul(f, c), mul(i, g));
        Tensor h2 = mul(o, tanh_op(c2));
        return {h2, c2};
    }
};

// Runs both directions over the rows of [T, D]; returns [T, 2*hidden].
inline Tensor bilstm_forward(const Tensor& inputs, const LstmCell& fwd, const LstmCell& bwd) {
    if (inputs.ndim() != 2 || inputs.dim(0) < 1)
        throw ShapeError("bilstm_forward: expects non-empty [T,D] input, got " + shape_str(inputs.shape()));
    const int T = inputs.dim(0);
    std::vector<Tensor> fh(static_cast<std::size_t>(T));
    std::vector<Tensor> bh(static_cast<std::size_t>(T));
    Tensor h = Tensor::zeros({1, fwd.hidden});
    Tensor c = Tensor::zeros({1, fwd.hidden});
    for (int t = 0; t < T; ++t) {
        auto [h2, c2] = fwd.step(slice(inputs, 0, t, t + 1), h, c);
        fh[std::size_t(t)] = h = h2;
        c = c2;
    }
    h = Tensor::zeros({1, bwd.hidden});
    c = Tensor::zeros({1, bwd.hidden});
    for (int t = T - 1; t >= 0; --t) {
        auto [h2, c2] = bwd.step(slice(inputs, 0, t, t + 1), h, c);
        bh[std::size_t(t)] = h = h2;
        c = c2;
    }
    std::vector<Tensor> rows;
    rows.reserve(std::size_t(T));
    for (int t = 0; t < T; ++t) rows.push_back(concat({fh[std::size_t(t)], bh[std::size_t(t)]}, 1));
    return concat(rows, 0);
}

// Score each row of states [T, H] against the context vector u [H, 1],
// softmax-normalize, and return the weighted sum [1, H] plus the weights.
inline std::pair<Tensor, std::vector<real>> attention_pool(const Tensor& states, const Tensor& u) {
    Tensor scores = reshape(matmul(states, u), {1, states.dim(0)});
    Tensor w = softmax(scores);
    Tensor pooled = matmul(w, states);
    return {pooled, w.data()};
}

// ---- CNN encoder ---------------------------------------------------------

// embed -> conv1d -> relu -> max-over-time; output dim = num_filters.
class CnnEncoder {
public:
    CnnEncoder() = default;
    CnnEncoder(EmbeddingTable embedding, int num_filters, int window, Rng& rng,
               bool train_embeddings = true)
        : embedding_(std::move(embedding)), num_filters_(num_filters), window_(window) {
        embedding_.vectors.impl()->requires_grad = embedding_.vectors.impl()->needs_grad =
            train_embeddings;
        const real bound = real(1) / std::sqrt(real(window * embedding_.dim));
        conv_w_ = Tensor::uniform({num_filters, window * embedding_.dim}, bound, rng, true);
        conv_b_ = Tensor::zeros({num_filters}, true);
    }

    int output_dim() const { return num_filters_; }

    Tensor encode(const TokenizedReview& review, EncoderTrace* trace = nullptr) const {
        std::vector<int> ids = review.flat_tokens;
        while (int(ids.size()) < window_) ids.push_back(Vocab::kPad);
        Tensor x = embedding_lookup(embedding_.vectors, ids);
        if (trace) {
            trace->token_ids = {ids};
            trace->embedded = {x};
            trace->has_attention = false;
        }
        Tensor conv = add(conv1d(x, conv_w_, window_), conv_b_);
        Tensor drr = max_over_time(relu(conv));
        return reshape(drr, {1, num_filters_});
    }

    NamedParams named_params() {
        NamedParams p{{"cnn.conv_w", conv_w_}, {"cnn.conv_b", conv_b_}};
        if (embedding_.vectors.requires_grad()) p.emplace_back("cnn.embedding", embedding_.vectors);
        return p;
    }

    EmbeddingTable& embedding() { return embedding_; }
    int window() const { return window_; }

private:
    EmbeddingTable embedding_;
    int num_filters_ = 256;
    int window_ = 3;
    Tensor conv_w_, conv_b_;
};

// ---- HAN encoder ---------------------------------------------------------

// Word BiLSTM + attention pooling into sentence vectors, then sentence
// BiLSTM + attention pooling into the review vector. Output dim =
// 2 * sentence_hidden.
class HanEncoder {
public:
    HanEncoder() = default;
    HanEncoder(EmbeddingTable embedding, int word_hidden, int sentence_hidden, Rng& rng,
               bool train_embeddings = true)
        : embedding_(std::move(embedding)), word_hidden_(word_hidden), sentence_hidden_(sentence_hidden) {
        embedding_.vectors.impl()->requires_grad = embedding_.vectors.impl()->needs_grad =
            train_embeddings;
        word_fwd_ = LstmCell::make(embedding_.dim, word_hidden, rng);
        word_bwd_ = LstmCell::make(embedding_.dim, word_hidden, rng);
        sent_fwd_ = LstmCell::make(2 * word_hidden, sentence_hidden, rng);
        sent_bwd_ = LstmCell::make(2 * word_hidden, sentence_hidden, rng);
        const real wb = real(1) / std::sqrt(real(2 * word_hidden));
        const real sb = real(1) / std::sqrt(real(2 * sentence_hidden));
        u_word_ = Tensor::uniform({2 * word_hidden, 1}, wb, rng, true);
        u_sent_ = Tensor::uniform({2 * sentence_hidden, 1}, sb, rng, true);
    }

    int output_dim() const { return 2 * sentence_hidden_; }

    Tensor encode(const TokenizedReview& review, EncoderTrace* trace = nullptr) const {
        if (review.sentences.empty()) throw RevsentError("han: empty review");
        if (trace) {
            trace->word_attention.clear();
            trace->sentence_attention.clear();
            trace->token_ids.clear();
            trace->embedded.clear();
            trace->has_attention = true;
        }
        std::vector<Tensor> sentence_vecs;
        for (const auto& ids : review.sentences) {
            Tensor x = embedding_lookup(embedding_.vectors, ids);
            Tensor states = bilstm_forward(x, word_fwd_, word_bwd_);
            auto [pooled, weights] = attention_pool(states, u_word_);
            sentence_vecs.push_back(pooled);
            if (trace) {
                trace->word_attention.push_back(weights);
                trace->token_ids.push_back(ids);
                trace->embedded.push_back(x);
            }
        }
        Tensor sent_matrix = concat(sentence_vecs, 0);
        Tensor states = bilstm_forward(sent_matrix, sent_fwd_, sent_bwd_);
        auto [drr, weights] = attention_pool(states, u_sent_);
        if (trace) trace->sentence_attention = weights;
        return drr;  // [1, 2*sentence_hidden]
    }

    NamedParams named_params() {
        NamedParams p{{"han.word_fwd.W", word_fwd_.W}, {"han.word_fwd.b", word_fwd_.b},
                      {"han.word_bwd.W", word_bwd_.W}, {"han.word_bwd.b", word_bwd_.b},
                      {"han.sent_fwd.W", sent_fwd_.W}, {"han.sent_fwd.b", sent_fwd_.b},
                      {"han.sent_bwd.W", sent_bwd_.W}, {"han.sent_bwd.b", sent_bwd_.b},
                      {"han.u_word", u_word_},         {"han.u_sent", u_sent_}};
        if (embedding_.vectors.requires_grad()) p.emplace_back("han.embedding", embedding_.vectors);
        return p;
    }

    EmbeddingTable& embedding() { return embedding_; }
    int word_hidden() const { return word_hidden_; }
    int sentence_hidden() const { return sentence_hidden_; }

private:
    EmbeddingTable embedding_;
    int word_hidden_ = 50;
    int sentence_hidden_ = 50;
    LstmCell word_fwd_, word_bwd_, sent_fwd_, sent_bwd_;
    Tensor u_word_, u_sent_;
};

// ---- meta encoder --------------------------------------------------------

// relu(W m + b) with train-time dropout.
class MetaEncoder {
public:
    MetaEncoder() = default;
    MetaEncoder(int input_dim, int hidden, real dropout_p, Rng& rng)
        : input_dim_(input_dim), hidden_(hidden), dropout_p_(dropout_p) {
        const real bound = real(1) / std::sqrt(real(input_dim));
        W_ = Tensor::uniform({input_dim, hidden}, bound, rng, true);
        b_ = Tensor::zeros({hidden}, true);
    }

    int output_dim() const { return hidden_; }
    int input_dim() const { return input_dim_; }

    Tensor encode(const std::vector<double>& meta, bool train, Rng& rng) const {
        if (int(meta.size()) != input_dim_)
            throw ShapeError("meta encoder: input dim " + std::to_string(meta.size()) +
                             " != trained dim " + std::to_string(input_dim_));
        std::vector<real> vals(meta.begin(), meta.end());
        Tensor m = Tensor::from(std::move(vals), {1, input_dim_});
        Tensor h = relu(add(matmul(m, W_), b_));
        if (train && dropout_p_ > 0) h = dropout(h, dropout_p_, rng);
        return h;
    }

    NamedParams named_params() { return {{"meta.W", W_}, {"meta.b", b_}}; }

private:
    int input_dim_ = 0;
    int hidden_ = 512;
    real dropout_p_ = real(0.1);
    Tensor W_, b_;
};

}  // namespace revsent
