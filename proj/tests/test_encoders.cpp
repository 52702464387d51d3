#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "revsent/encoders.hpp"

using namespace revsent;
using Catch::Approx;

namespace {

void set_data(Tensor t, std::initializer_list<double> vals) {
    REQUIRE(t.size() == vals.size());
    std::size_t i = 0;
    for (double v : vals) t.data()[i++] = real(v);
}

Tensor find_param(NamedParams params, const std::string& name) {
    for (auto& [n, t] : params)
        if (n == name) return t;
    FAIL("missing param " + name);
    return Tensor();
}

}  // namespace

TEST_CASE("lstm step matches a hand-computed cell update") {
    Rng rng(0);
    LstmCell cell = LstmCell::make(1, 1, rng);
    // x-row drives only the candidate gate; zero recurrent weights and biases
    set_data(cell.W, {0, 0, 2, 0, 0, 0, 0, 0});
    set_data(cell.b, {0, 0, 0, 0});
    Tensor x = Tensor::from({1}, {1, 1});
    Tensor h0 = Tensor::zeros({1, 1});
    Tensor c0 = Tensor::zeros({1, 1});
    auto [h1, c1] = cell.step(x, h0, c0);
    const double g = std::tanh(2.0);
    const double c_want = 0.5 * g;              // i=sigmoid(0)=0.5, f*c0=0
    const double h_want = 0.5 * std::tanh(c_want);  // o=0.5
    CHECK(double(c1.item()) == Approx(c_want).margin(1e-6));
    CHECK(double(h1.item()) == Approx(h_want).margin(1e-6));
}

TEST_CASE("lstm init sets forget-gate bias to one") {
    Rng rng(3);
    LstmCell cell = LstmCell::make(4, 3, rng);
    for (int j = 0; j < 12; ++j) {
        const double b = double(cell.b.data()[std::size_t(j)]);
        if (j >= 3 && j < 6) CHECK(b == 1.0);
        else CHECK(b == 0.0);
    }
}

TEST_CASE("bilstm with all-zero weights outputs zeros of the right shape") {
    Rng rng(1);
    LstmCell fwd = LstmCell::make(2, 3, rng);
    LstmCell bwd = LstmCell::make(2, 3, rng);
    for (Tensor t : {fwd.W, fwd.b, bwd.W, bwd.b})
        for (auto& v : t.data()) v = real(0);
    Tensor inputs = Tensor::from({5, -2, 1, 0, 3, 3}, {3, 2});
    Tensor out = bilstm_forward(inputs, fwd, bwd);
    REQUIRE(out.shape() == Shape{3, 6});
    for (real v : out.data()) CHECK(double(v) == Approx(0.0).margin(1e-7));
}

TEST_CASE("bilstm forward half ignores the future, backward half the past") {
    Rng rng(5);
    LstmCell fwd = LstmCell::make(2, 3, rng);
    LstmCell bwd = LstmCell::make(2, 3, rng);
    Tensor a = Tensor::from({1, 0, 0, 1, 1, 1}, {3, 2});
    Tensor b = Tensor::from({1, 0, 0, 1, -1, 2}, {3, 2});  // differs only at t=2
    auto ha = bilstm_forward(a, fwd, bwd).data();
    auto hb = bilstm_forward(b, fwd, bwd).data();
    // forward states at t=0 (first 3 of row 0) agree; backward states differ
    for (int j = 0; j < 3; ++j) CHECK(ha[std::size_t(j)] == hb[std::size_t(j)]);
    bool backward_differs = false;
    for (int j = 3; j < 6; ++j) backward_differs |= ha[std::size_t(j)] != hb[std::size_t(j)];
    CHECK(backward_differs);
}

TEST_CASE("attention pooling matches a softmax hand computation") {
    Tensor states = Tensor::from({1, 0, 0, 1}, {2, 2});
    Tensor u = Tensor::from({std::log(2.0), 0}, {2, 1});
    auto [pooled, w] = attention_pool(states, u);
    REQUIRE(w.size() == 2);
    CHECK(double(w[0]) == Approx(2.0 / 3).margin(1e-6));
    CHECK(double(w[1]) == Approx(1.0 / 3).margin(1e-6));
    CHECK(double(pooled.data()[0]) == Approx(2.0 / 3).margin(1e-6));
    CHECK(double(pooled.data()[1]) == Approx(1.0 / 3).margin(1e-6));
}

TEST_CASE("cnn encoder matches a hand-computed window maximum") {
    Rng rng(2);
    Vocab vocab;
    vocab.add("up");    // id 2
    vocab.add("down");  // id 3
    EmbeddingTable emb = EmbeddingTable::random(vocab, 1, rng);
    CnnEncoder enc(std::move(emb), 1, 2, rng);
    set_data(enc.embedding().vectors, {0, 0, 2, -1});  // pad, unk, up, down
    set_data(find_param(enc.named_params(), "cnn.conv_w"), {1, 1});
    set_data(find_param(enc.named_params(), "cnn.conv_b"), {0.5});
    TokenizedReview review;
    review.flat_tokens = {2, 3, 2};  // windows sum to 1 and 1; +bias = 1.5
    Tensor out = enc.encode(review);
    REQUIRE(out.shape() == Shape{1, 1});
    CHECK(double(out.item()) == Approx(1.5).margin(1e-6));
    // all-negative activations clamp to zero
    set_data(find_param(enc.named_params(), "cnn.conv_b"), {-10});
    CHECK(double(enc.encode(review).item()) == Approx(0.0).margin(1e-6));
}

TEST_CASE("cnn encoder pads inputs shorter than the window") {
    Rng rng(6);
    Vocab vocab;
    vocab.add("word");
    EmbeddingTable emb = EmbeddingTable::random(vocab, 4, rng);
    CnnEncoder enc(std::move(emb), 5, 3, rng);
    TokenizedReview one_token;
    one_token.flat_tokens = {2};
    EncoderTrace trace;
    Tensor out = enc.encode(one_token, &trace);
    REQUIRE(out.shape() == Shape{1, 5});
    CHECK(trace.token_ids[0] == std::vector<int>{2, Vocab::kPad, Vocab::kPad});
    CHECK_FALSE(trace.has_attention);
}

TEST_CASE("han attention weights are positive and sum to one") {
    Rng rng(8);
    Vocab vocab;
    for (int i = 0; i < 12; ++i) vocab.add("w" + std::to_string(i));
    EmbeddingTable emb = EmbeddingTable::random(vocab, 6, rng);
    HanEncoder enc(std::move(emb), 4, 4, rng);
    TokenizedReview review;
    review.sentences = {{2, 5, 7}, {3, 4}, {10, 11, 12, 13}};
    EncoderTrace trace;
    Tensor out = enc.encode(review, &trace);
    REQUIRE(out.shape() == Shape{1, 8});
    CHECK(trace.has_attention);
    REQUIRE(trace.word_attention.size() == 3);
    for (std::size_t s = 0; s < 3; ++s) {
        REQUIRE(trace.word_attention[s].size() == review.sentences[s].size());
        double sum = 0;
        for (real w : trace.word_attention[s]) {
            CHECK(double(w) > 0.0);
            sum += double(w);
        }
        CHECK(sum == Approx(1.0).margin(1e-5));
    }
    double ssum = 0;
    for (real w : trace.sentence_attention) {
        CHECK(double(w) > 0.0);
        ssum += double(w);
    }
    REQUIRE(trace.sentence_attention.size() == 3);
    CHECK(ssum == Approx(1.0).margin(1e-5));
}

TEST_CASE("han attention concentrates on the distinctive sentence") {
    // word-level oracle with controlled weights: the context vector scores
    // hidden states, so a sentence with stronger-activating words should win.
    Rng rng(9);
    Vocab vocab;
    for (int i = 0; i < 6; ++i) vocab.add("w" + std::to_string(i));
    EmbeddingTable emb = EmbeddingTable::random(vocab, 3, rng);
    HanEncoder enc(std::move(emb), 2, 2, rng);
    // scale one embedding row hard so its hidden state dominates the scores,
    // and amplify the context vector so score gaps survive the softmax
    for (int d = 0; d < 3; ++d) enc.embedding().vectors.data()[std::size_t(4 * 3 + d)] = real(3);
    for (auto& v : find_param(enc.named_params(), "han.u_word").data()) v *= real(30);
    TokenizedReview review;
    review.sentences = {{2, 4, 3}};  // middle word is the loud one
    EncoderTrace trace;
    enc.encode(review, &trace);
    const auto& w = trace.word_attention[0];
    // not asserting which direction the score moves, only that attention is
    // not uniform once one input is far out of distribution
    const double uniform = 1.0 / 3;
    bool deviates = false;
    for (real x : w) deviates |= std::fabs(double(x) - uniform) > 0.05;
    CHECK(deviates);
}

TEST_CASE("han rejects an empty review") {
    Rng rng(4);
    Vocab vocab;
    vocab.add("w");
    EmbeddingTable emb = EmbeddingTable::random(vocab, 2, rng);
    HanEncoder enc(std::move(emb), 2, 2, rng);
    TokenizedReview empty;
    CHECK_THROWS_AS(enc.encode(empty), RevsentError);
}

TEST_CASE("encoders are deterministic given the same construction seed") {
    auto build_encode = [](std::uint64_t seed) {
        Rng rng(seed);
        Vocab vocab;
        for (int i = 0; i < 8; ++i) vocab.add("w" + std::to_string(i));
        EmbeddingTable emb = EmbeddingTable::random(vocab, 4, rng);
        HanEncoder enc(std::move(emb), 3, 3, rng);
        TokenizedReview review;
        review.sentences = {{2, 3}, {4, 5, 6}};
        return enc.encode(review).data();
    };
    CHECK(build_encode(77) == build_encode(77));
    CHECK(build_encode(77) != build_encode(78));
}

TEST_CASE("meta encoder applies relu of an affine map") {
    Rng rng(10);
    MetaEncoder enc(2, 2, real(0.5), rng);
    set_data(find_param(enc.named_params(), "meta.W"), {1, 0, 0, -1});
    set_data(find_param(enc.named_params(), "meta.b"), {0.5, 0.25});
    Rng unused(0);
    Tensor out = enc.encode({1.0, 2.0}, false, unused);
    REQUIRE(out.shape() == Shape{1, 2});
    CHECK(double(out.data()[0]) == Approx(1.5).margin(1e-6));   // 1*1 + 0.5
    CHECK(double(out.data()[1]) == Approx(0.0).margin(1e-6));   // relu(-2 + 0.25)
    CHECK_THROWS_AS(enc.encode({1.0, 2.0, 3.0}, false, unused), ShapeError);
}

TEST_CASE("meta encoder dropout fires only in training mode") {
    Rng rng(11);
    MetaEncoder enc(4, 16, real(0.5), rng);
    std::vector<double> m = {0.5, -1, 2, 0.25};
    Rng e1(3), e2(4);
    CHECK(enc.encode(m, false, e1).data() == enc.encode(m, false, e2).data());
    Rng t1(3);
    auto train_out = enc.encode(m, true, t1).data();
    auto eval_out = enc.encode(m, false, t1).data();
    int zeros_train = 0, zeros_eval = 0;
    for (std::size_t i = 0; i < train_out.size(); ++i) {
        zeros_train += train_out[i] == real(0);
        zeros_eval += eval_out[i] == real(0);
    }
    CHECK(zeros_train > zeros_eval);
}
