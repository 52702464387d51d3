#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "revsent/checkpoint.hpp"
#include "revsent/encoders.hpp"
#include "revsent/optim.hpp"

namespace revsent {

enum class EncoderKind { Cnn, Han };
enum class InputMode { MetaOnly, TextOnly, Joint };
enum class LossMode { Single, Weighted, Uncertainty };
enum class LabelMode { Binary, FiveStar };

inline std::string to_string(EncoderKind k) { return k == EncoderKind::Cnn ? "cnn" : "han"; }
inline std::string to_string(InputMode m) {
    switch (m) {
        case InputMode::MetaOnly: return "meta";
        case InputMode::TextOnly: return "text";
        default: return "joint";
    }
}
inline std::string to_string(LossMode m) {
    switch (m) {
        case LossMode::Single: return "single";
        case LossMode::Weighted: return "weighted";
        default: return "uncertainty";
    }
}
inline std::string to_string(LabelMode m) { return m == LabelMode::Binary ? "binary" : "five"; }

// ---- loss combination ----------------------------------------------------

inline Tensor weighted_loss(const Tensor& l1, const Tensor& l2, real lambda) {
    if (lambda < 0 || lambda > 1)
        throw RevsentError("weighted_loss: lambda " + std::to_string(double(lambda)) + " outside [0,1]");
    return add(scale(l1, lambda), scale(l2, real(1) - lambda));
}

// L = e^{-eta1} L1/2 + e^{-eta2} L2/2 + (eta1 + eta2)/2 with eta = log(sigma^2),
// so sigma^2 stays positive with eta unconstrained.
inline Tensor uncertainty_loss(const Tensor& l1, const Tensor& l2, const Tensor& eta1,
                               const Tensor& eta2) {
    Tensor t1 = scale(mul(exp_op(scale(eta1, real(-1))), l1), real(0.5));
    Tensor t2 = scale(mul(exp_op(scale(eta2, real(-1))), l2), real(0.5));
    Tensor reg = scale(add(eta1, eta2), real(0.5));
    return add(add(t1, t2), reg);
}

// ---- model ---------------------------------------------------------------

struct JointModelConfig {
    EncoderKind encoder = EncoderKind::Cnn;
    InputMode input = InputMode::TextOnly;
    LossMode loss = LossMode::Single;
    LabelMode labels = LabelMode::Binary;
    int embed_dim = 100;
    int num_filters = 256;
    int window = 3;
    int word_hidden = 50;
    int sentence_hidden = 50;
    int meta_hidden = 512;
    int fusion_hidden = 256;
    int meta_dim = 0;  // required when input == Joint
    real meta_dropout = real(0.1);
    real lambda = real(0.5);
    bool train_embeddings = true;

    int num_classes() const { return labels == LabelMode::Binary ? 2 : 5; }
};

struct ForwardResult {
    Tensor logits;     // [1, C]
    Tensor sentiment;  // [1, 1], defined when the model has a regression head
    EncoderTrace trace;
};

class JointModel {
public:
    JointModel() = default;

    JointModel(JointModelConfig cfg, EmbeddingTable embedding, Rng& rng) : cfg_(cfg) {
        if (cfg.input == InputMode::MetaOnly)
            throw RevsentError("deep models require text input; meta-only reduces to the MLP baseline");
        if (cfg.input == InputMode::Joint && cfg.meta_dim <= 0)
            throw RevsentError("joint input mode requires meta_dim > 0");
        if (cfg.encoder == EncoderKind::Cnn)
            cnn_ = CnnEncoder(std::move(embedding), cfg.num_filters, cfg.window, rng,
                              cfg.train_embeddings);
        else
            han_ = HanEncoder(std::move(embedding), cfg.word_hidden, cfg.sentence_hidden, rng,
                              cfg.train_embeddings);
        const int text_dim = cfg.encoder == EncoderKind::Cnn ? cfg.num_filters : 2 * cfg.sentence_hidden;
        if (cfg.input == InputMode::Joint)
            meta_enc_ = MetaEncoder(cfg.meta_dim, cfg.meta_hidden, cfg.meta_dropout, rng);
        const int fusion_in = text_dim + (cfg.input == InputMode::Joint ? cfg.meta_hidden : 0);
        const real fb = real(1) / std::sqrt(real(fusion_in));
        fusion_w_ = Tensor::uniform({fusion_in, cfg.fusion_hidden}, fb, rng, true);
        fusion_b_ = Tensor::zeros({cfg.fusion_hidden}, true);
        const real hb = real(1) / std::sqrt(real(cfg.fusion_hidden));
        cls_w_ = Tensor::uniform({cfg.fusion_hidden, cfg.num_classes()}, hb, rng, true);
        cls_b_ = Tensor::zeros({cfg.num_classes()}, true);
        if (cfg.loss != LossMode::Single) {
            reg_w_ = Tensor::uniform({cfg.fusion_hidden, 1}, hb, rng, true);
            reg_b_ = Tensor::zeros({1}, true);
        }
        if (cfg.loss == LossMode::Uncertainty) {
            eta1_ = Tensor::zeros({1}, true);
            eta2_ = Tensor::zeros({1}, true);
        }
    }

    const JointModelConfig& config() const { return cfg_; }
    bool has_regression_head() const { return cfg_.loss != LossMode::Single; }
    Tensor eta1() const { return eta1_; }
    Tensor eta2() const { return eta2_; }

    ForwardResult forward(const TokenizedReview& review, const std::vector<double>* meta,
                          bool train = false, Rng* rng = nullptr) const {
        ForwardResult out;
        Tensor text = cfg_.encoder == EncoderKind::Cnn ? cnn_.encode(review, &out.trace)
                                                       : han_.encode(review, &out.trace);
        Tensor rep = text;
        if (cfg_.input == InputMode::Joint) {
            if (!meta)
                throw RevsentError("joint model invoked without a meta vector");
            static Rng dummy(0);
            rep = concat({text, meta_enc_.encode(*meta, train, rng ? *rng : dummy)}, 1);
        }
        Tensor fused = relu(add(matmul(rep, fusion_w_), fusion_b_));
        out.logits = add(matmul(fused, cls_w_), cls_b_);
        if (has_regression_head()) out.sentiment = add(matmul(fused, reg_w_), reg_b_);
        return out;
    }

    NamedParams named_params() {
        NamedParams p = cfg_.encoder == EncoderKind::Cnn ? cnn_.named_params() : han_.named_params();
        if (cfg_.input == InputMode::Joint)
            for (auto& e : meta_enc_.named_params()) p.push_back(e);
        p.emplace_back("fusion.W", fusion_w_);
        p.emplace_back("fusion.b", fusion_b_);
        p.emplace_back("cls.W", cls_w_);
        p.emplace_back("cls.b", cls_b_);
        if (has_regression_head()) {
            p.emplace_back("reg.W", reg_w_);
            p.emplace_back("reg.b", reg_b_);
        }
        if (cfg_.loss == LossMode::Uncertainty) {
            p.emplace_back("loss.eta1", eta1_);
            p.emplace_back("loss.eta2", eta2_);
        }
        return p;
    }

    std::vector<Tensor> params() {
        std::vector<Tensor> out;
        for (auto& [n, t] : named_params()) out.push_back(t);
        return out;
    }

    EmbeddingTable& embedding() {
        return cfg_.encoder == EncoderKind::Cnn ? cnn_.embedding() : han_.embedding();
    }

    Checkpoint to_checkpoint() {
        Checkpoint c;
        c.add_meta("encoder", to_string(cfg_.encoder));
        c.add_meta("input", to_string(cfg_.input));
        c.add_meta("loss", to_string(cfg_.loss));
        c.add_meta("labels", to_string(cfg_.labels));
        c.add_meta("embed_dim", std::to_string(cfg_.embed_dim));
        c.add_meta("num_filters", std::to_string(cfg_.num_filters));
        c.add_meta("window", std::to_string(cfg_.window));
        c.add_meta("word_hidden", std::to_string(cfg_.word_hidden));
        c.add_meta("sentence_hidden", std::to_string(cfg_.sentence_hidden));
        c.add_meta("meta_hidden", std::to_string(cfg_.meta_hidden));
        c.add_meta("fusion_hidden", std::to_string(cfg_.fusion_hidden));
        c.add_meta("meta_dim", std::to_string(cfg_.meta_dim));
        c.add_meta("lambda", std::to_string(double(cfg_.lambda)));
        c.add_meta("vocab_size", std::to_string(embedding().vectors.dim(0)));
        c.params = named_params();
        return c;
    }

    static JointModel from_checkpoint(const Checkpoint& c) {
        JointModelConfig cfg;
        const std::string enc = c.meta_value("encoder");
        cfg.encoder = enc == "cnn" ? EncoderKind::Cnn : EncoderKind::Han;
        const std::string in = c.meta_value("input");
        cfg.input = in == "text" ? InputMode::TextOnly : InputMode::Joint;
        const std::string lm = c.meta_value("loss");
        cfg.loss = lm == "single" ? LossMode::Single
                                  : (lm == "weighted" ? LossMode::Weighted : LossMode::Uncertainty);
        cfg.labels = c.meta_value("labels") == "binary" ? LabelMode::Binary : LabelMode::FiveStar;
        cfg.embed_dim = std::stoi(c.meta_value("embed_dim"));
        cfg.num_filters = std::stoi(c.meta_value("num_filters"));
        cfg.window = std::stoi(c.meta_value("window"));
        cfg.word_hidden = std::stoi(c.meta_value("word_hidden"));
        cfg.sentence_hidden = std::stoi(c.meta_value("sentence_hidden"));
        cfg.meta_hidden = std::stoi(c.meta_value("meta_hidden"));
        cfg.fusion_hidden = std::stoi(c.meta_value("fusion_hidden"));
        cfg.meta_dim = std::stoi(c.meta_value("meta_dim"));
        cfg.lambda = real(std::stod(c.meta_value("lambda")));
        const int vocab_size = std::stoi(c.meta_value("vocab_size"));
        Rng rng(0);
        EmbeddingTable emb;
        emb.dim = cfg.embed_dim;
        emb.vectors = Tensor::zeros({vocab_size, cfg.embed_dim}, true);
        JointModel m(cfg, std::move(emb), rng);
        for (auto& [name, t] : m.named_params()) {
            const Tensor& src = c.param(name);
            if (src.shape() != t.shape())
                throw RevsentError("checkpoint: parameter `" + name + "` shape " +
                                   shape_str(src.shape()) + " != expected " + shape_str(t.shape()));
            t.data() = src.data();
        }
        return m;
    }

private:
    JointModelConfig cfg_;
    CnnEncoder cnn_;
    HanEncoder han_;
    MetaEncoder meta_enc_;
    Tensor fusion_w_, fusion_b_, cls_w_, cls_b_, reg_w_, reg_b_, eta1_, eta2_;
};

// ---- prediction ----------------------------------------------------------

struct Prediction {
    int cls = 0;  // argmax, ties to the lower index
    std::vector<real> probabilities;
    real sentiment = 0;
    bool has_sentiment = false;
};

inline Prediction predict(const JointModel& model, const TokenizedReview& review,
                          const std::vector<double>* meta = nullptr) {
    ForwardResult fr = model.forward(review, model.config().input == InputMode::Joint ? meta : nullptr);
    Prediction p;
    Tensor probs = softmax(fr.logits);
    p.probabilities = probs.data();
    p.cls = int(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                p.probabilities.begin());
    if (model.has_regression_head()) {
        p.sentiment = fr.sentiment.item();
        p.has_sentiment = true;
    }
    return p;
}

// ---- training ------------------------------------------------------------

struct EncodedDataset {
    std::vector<TokenizedReview> reviews;
    std::vector<std::vector<double>> meta;  // may be empty for text-only
    std::vector<int> labels;                // class indices matching LabelMode
    std::vector<real> targets;              // sentiment regression targets

    std::size_t size() const { return reviews.size(); }
};

struct TrainConfig {
    int batch_size = 32;
    int epochs = 5;
    real lr = real(1e-4);
    real clip_norm = real(0);
    std::uint64_t seed = 0;
    int patience = 2;  // epochs of no val-loss improvement before stopping
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
    double val_accuracy = 0;
};

using TrainHistory = std::vector<EpochStats>;

namespace detail {

inline Tensor sample_loss(const JointModel& model, const EncodedDataset& ds, std::size_t i,
                          bool train, Rng* rng) {
    const auto* meta = ds.meta.empty() ? nullptr : &ds.meta[i];
    ForwardResult fr = model.forward(ds.reviews[i], meta, train, rng);
    Tensor l1 = cross_entropy(fr.logits, {ds.labels[i]});
    switch (model.config().loss) {
        case LossMode::Single:
            return l1;
        case LossMode::Weighted:
            return weighted_loss(l1, mse(fr.sentiment, {ds.targets[i]}), model.config().lambda);
        default:
            return uncertainty_loss(l1, mse(fr.sentiment, {ds.targets[i]}), model.eta1(),
                                    model.eta2());
    }
}

inline std::pair<double, double> eval_loss_accuracy(const JointModel& model,
                                                    const EncodedDataset& ds) {
    double total = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        total += double(sample_loss(model, ds, i, false, nullptr).item());
        const auto* meta = ds.meta.empty() ? nullptr : &ds.meta[i];
        if (predict(model, ds.reviews[i], meta).cls == ds.labels[i]) ++correct;
    }
    return {total / double(ds.size()), double(correct) / double(ds.size())};
}

}  // namespace detail

// Mini-batch training with early stopping on validation loss; the returned
// history has one row per completed epoch and the model is restored to its
// best-validation snapshot.
inline TrainHistory train(JointModel& model, const EncodedDataset& train_ds,
                          const EncodedDataset& val_ds, const TrainConfig& cfg) {
    if (train_ds.size() == 0 || val_ds.size() == 0)
        throw RevsentError("train: empty train or validation split");
    for (int y : train_ds.labels)
        if (y < 0 || y >= model.config().num_classes())
            throw RevsentError("train: label " + std::to_string(y) + " outside head size " +
                               std::to_string(model.config().num_classes()));

    Adam opt({.lr = cfg.lr, .clip_norm = cfg.clip_norm});
    auto params = model.params();
    opt.attach(params);
    Rng shuffle_rng(make_rng(derive_seed(cfg.seed, 0x5f1)));
    Rng dropout_rng(make_rng(derive_seed(cfg.seed, 0xd20)));

    TrainHistory history;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::vector<real>> best_params;
    int stale = 0;

    std::vector<std::size_t> order(train_ds.size());
    std::iota(order.begin(), order.end(), std::size_t(0));

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + std::size_t(cfg.batch_size));
            std::vector<Tensor> losses;
            for (std::size_t j = start; j < end; ++j)
                losses.push_back(detail::sample_loss(model, train_ds, order[j], true, &dropout_rng));
            Tensor batch_loss = scale(sum_all(concat(losses, 0)), real(1) / real(end - start));
            const double lv = double(batch_loss.item());
            if (!std::isfinite(lv))
                throw RevsentError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batches + 1));
            opt.zero_grad();
            backward(batch_loss);
            opt.step();
            epoch_loss += lv;
            ++batches;
        }
        auto [val_loss, val_acc] = detail::eval_loss_accuracy(model, val_ds);
        history.push_back({epoch, epoch_loss / double(batches), val_loss, val_acc});
        if (val_loss < best_val) {
            best_val = val_loss;
            best_params.clear();
            for (auto& p : params) best_params.push_back(p.data());
            stale = 0;
        } else if (++stale > cfg.patience) {
            break;
        }
    }
    if (!best_params.empty())
        for (std::size_t i = 0; i < params.size(); ++i) params[i].data() = best_params[i];
    return history;
}

}  // namespace revsent
